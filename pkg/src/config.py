"""
Configuration centrale du projet ppwgan
======================================
Ce fichier contient toutes les configurations partagées entre les différents modules.
Les fichiers JSON passés à main.py viennent se superposer à ces valeurs par défaut.
"""

import logging
import os
from pathlib import Path

# --- CHEMINS DU PROJET ---
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"
DATASETS_DIR = DATA_DIR / "datasets"
CHECKPOINTS_DIR = DATA_DIR / "checkpoints"
REPORTS_DIR = DATA_DIR / "reports"
LOGS_DIR = PROJECT_ROOT / "logs"

# Version du schéma des fichiers de configuration JSON
CONFIG_SCHEMA_VERSION = 1

# --- CONFIGURATION SIMULATION (vérité terrain) ---
SIMULATION_CONFIG = {
    "horizon": 15.0,
    "n_sequences": 20000,
    # Paramètres publiés, reproduits tels quels (centres confondus)
    "ip": {"weights": [3.0, 7.0, 11.0], "centers": [1.0, 1.0, 1.0], "sds": [2.0, 3.0, 2.0]},
    # Variante NON publiée, centres écartés pour une intensité réellement multimodale
    "ip_spread": {"weights": [3.0, 7.0, 11.0], "centers": [3.0, 7.0, 11.0], "sds": [2.0, 3.0, 2.0]},
    "se": {"mu": 1.0, "beta": 0.8, "omega": 1.0},
    "sc": {"eta": 1.0, "gamma": 0.2},
    "nn": {"hidden_dim": 8, "seed": 2017},
    # Facteur de sécurité et pas de grille pour la borne de l'IP
    "ip_bound_grid_step": 1e-3,
    "ip_bound_safety": 1.2,
    "thinning_max_doublings": 20,
}

# --- CONFIGURATION ENTRAÎNEMENT WGAN ---
TRAIN_CONFIG = {
    "nu": 0.3,
    "lr": 1e-4,
    "beta1": 0.5,
    "beta2": 0.9,
    "batch_size": 256,
    "n_critic": 5,
    "hidden_dim": 64,
    "max_iters": 4000,
    "log_every": 50,
    "eval_every": 500,
    "eval_samples": 500,
    "checkpoint_every": 1000,
    "early_stop_window": 0,  # 0 = désactivé
    "early_stop_tol": 1e-4,
    "min_pair_distance": 1e-9,
    "init_scale": 0.1,
    "seed": 0,
}

# --- CONFIGURATION MLE (baselines) ---
MLE_CONFIG = {
    "lr_parametric": 1e-2,
    "lr_nn": 1e-3,
    "max_iters": 2000,
    "grad_tol": 1e-5,
    "ip_kernels": 3,
    "nn_hidden_dim": 8,
    "seed": 0,
}

# --- CONFIGURATION ÉVALUATION ---
EVAL_CONFIG = {
    "bin_width": 0.1,
    "n_generated": 2000,
    "figure_size": (8, 4),
    "svg_hashsalt": "ppwgan",
}

# --- PRÉRÉGLAGES DE REPRODUCTION ---
REPRO_PRESETS = {
    "desk": {"n_sequences": 2000, "max_iters": 4000, "hidden_dim": 64, "n_seeds": 3, "run": True},
    "paper": {"n_sequences": 20000, "max_iters": 100000, "hidden_dim": 64, "n_seeds": 10, "run": False},
    "smoke": {"n_sequences": 60, "max_iters": 2, "hidden_dim": 4, "n_seeds": 1, "run": True,
              "batch_size": 16, "mle_iters": 5, "n_generated": 60},
}

DATASET_NAMES = ["IP", "SE", "SC", "NN", "IP+SE+SC", "IP+SC+NN", "IP+SE+NN", "SE+SC+NN"]
ESTIMATORS = ["MLE-IP", "MLE-SE", "MLE-SC", "MLE-NN", "WGAN"]


def get_threads():
    """Nombre de processus autorisés (variable PPWGAN_THREADS)."""
    valeur = os.environ.get("PPWGAN_THREADS", "1")
    try:
        n = int(valeur)
    except ValueError:
        logging.getLogger(__name__).warning(f"⚠ PPWGAN_THREADS invalide ({valeur!r}) - 1 processus utilisé")
        return 1
    return max(1, n)


# Création automatique des dossiers nécessaires
def setup_directories():
    """Crée tous les dossiers nécessaires s'ils n'existent pas."""
    for directory in [DATASETS_DIR, CHECKPOINTS_DIR, REPORTS_DIR, LOGS_DIR]:
        directory.mkdir(parents=True, exist_ok=True)


def configurer_logging(level=logging.INFO):
    """Installe le format de log commun (console + fichier logs/ppwgan.log)."""
    LOGS_DIR.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(LOGS_DIR / "ppwgan.log", encoding='utf-8'),
            logging.StreamHandler()
        ]
    )


if __name__ == "__main__":
    setup_directories()
    print("Configuration chargée avec succès!")
    print(f"Dossier projet: {PROJECT_ROOT}")
