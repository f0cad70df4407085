"""
ppwgan - Point Process WGAN
===========================
Point d'entrée unique du cycle d'expérience complet

Sous-commandes:
    simulate  : Génération d'un jeu de données (vérité terrain)
    train     : Entraînement du WGAN sur un jeu de données
    fit       : Ajustement d'une baseline MLE (IP, SE, SC, NN)
    evaluate  : Écart d'intensité empirique ou pente QQ contre la vérité
    reproduce : Reproduction complète (desk, paper, smoke)
    distance  : Distances ⋆ entre deux jeux de données

Usage:
    python main.py simulate --config configs/sc.json --out data/
    python main.py train data/datasets/SC.jsonl --iters 4000 --seed 0
    python main.py fit data/datasets/SC.jsonl --family SC
    python main.py evaluate --truth SC --model data/wgan_checkpoint.json --metric intensity
    python main.py reproduce --preset desk

Codes de sortie: 0 succès, 2 usage, 3 domaine, 4 numérique, 5 entrées/sorties.
"""

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas as pd

from src.config import DATA_DIR, DATASETS_DIR, SIMULATION_CONFIG, configurer_logging, setup_directories
from src.core.dataset_io import read_dataset, write_dataset
from src.core.types import Window
from src.core.errors import IoError, PPWGANError, QQNotFeasibleError, UsageError
from src.distance.star_distance import pairwise_star_distances
from src.evaluation.metrics import empirical_intensity, intensity_deviation, pooled_increments, qq_from_increments
from src.evaluation.report import EvaluationRecord, emit_report
from src.experiments.config_files import (
    evaluation_settings,
    fit_settings,
    load_config,
    simulation_settings,
    train_settings,
)
from src.experiments.reproduction import ReproductionPipeline
from src.mle.fitter import fit, load_fitted_model, sample_fitted, save_fitted_model
from src.neural.checkpoint import CHECKPOINT_FORMAT, load_checkpoint, save_checkpoint
from src.simulation.intensities import MixtureModel
from src.simulation.simulator import make_dataset
from src.wgan.trainer import WganTrainer, sample_generator

logger = logging.getLogger("ppwgan")

LOCK_NAME = ".ppwgan.lock"


# ============================================
# FONCTIONS UTILITAIRES
# ============================================

def print_banner(text, char="="):
    """Affiche un bandeau formaté."""
    print("\n" + char * 70)
    print(text.center(70))
    print(char * 70)


@contextmanager
def verrou_sortie(out_dir):
    """Empêche deux commandes d'écrire en même temps dans le même dossier."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise IoError(f"dossier de sortie verrouillé par une autre commande ({lock})")
    except OSError as e:
        raise IoError(f"création du verrou impossible ({lock}): {e}") from e
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield out_dir
    finally:
        lock.unlink(missing_ok=True)


def _truth_arg(value):
    """Nom de famille ou chemin vers un fichier JSON de modèle."""
    if value is None:
        return None
    path = Path(value)
    if path.suffix == ".json" and path.exists():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise UsageError(f"--truth: JSON invalide ({e.msg})") from e
    return value


# ============================================
# SOUS-COMMANDES
# ============================================

def commande_simulate(args):
    """Simulation d'un jeu de données décrit par un fichier de configuration."""
    settings = simulation_settings(load_config(args.config), args.n, args.seed)
    with verrou_sortie(args.out) as out:
        data = make_dataset(settings.model, None, settings.n_sequences, settings.window, settings.seed,
                            label=settings.label)
        name = settings.label or getattr(settings.model, "label", settings.model.family)
        path = out / (args.output or f"{DATASETS_DIR.name}/{name.replace('+', '_')}.jsonl")
        write_dataset(data, path)
    print(f"✓ {len(data)} séquences ({data.label}) - taux moyen {data.mean_event_rate():.4f}")
    print(f"  Fichier: {path}")
    return 0


def commande_train(args):
    """Entraînement du WGAN ; écrit le checkpoint final et le journal CSV."""
    config = load_config(args.config)
    cfg = train_settings(config, max_iters=args.iters, seed=args.seed, nu=args.nu, hidden_dim=args.k)
    data = read_dataset(args.data)
    with verrou_sortie(args.out) as out:
        cfg.checkpoint_dir = str(out / "checkpoints")
        result = WganTrainer(data, cfg).train()
        checkpoint = save_checkpoint(out / "wgan_checkpoint.json", result.checkpoint())
        log = result.write_log(out / "train_log.csv")
    print(f"✓ {result.iterations} itérations - checkpoint {checkpoint}")
    print(f"  Journal: {log}")
    return 0


def commande_fit(args):
    """Ajustement d'une baseline MLE."""
    settings = fit_settings(load_config(args.config), seed=args.seed, max_iters=args.iters)
    data = read_dataset(args.data)
    with verrou_sortie(args.out) as out:
        fitted = fit(data, args.family, settings)
        path = save_fitted_model(fitted, out / f"mle_{args.family}.json")
    print(f"✓ MLE-{args.family}: loglik moyenne {fitted.final_loglik:.4f} ({fitted.iterations} itérations)")
    print(f"  Modèle: {path}")
    return 0


def _generated_sample(model_arg, truth, settings, window):
    """Échantillon du modèle évalué : checkpoint WGAN, modèle MLE ou la vérité elle-même."""
    seed = settings.seed + 1
    if model_arg == "truth":
        return make_dataset(truth, None, settings.n_generated, window, seed, label="vérité")
    path = Path(model_arg)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"lecture du modèle impossible ({path}): {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"--model: JSON invalide ({e.msg})") from e
    if record.get("format") == CHECKPOINT_FORMAT:
        checkpoint = load_checkpoint(path)
        return sample_generator(checkpoint.generator, checkpoint.noise_rate, settings.n_generated,
                                checkpoint.window, seed)
    return sample_fitted(load_fitted_model(path), settings.n_generated, window, seed)


def commande_evaluate(args):
    """Évaluation d'un modèle contre la vérité terrain ou des données réelles de référence."""
    # sans vérité paramétrique : écart d'intensité contre --data uniquement
    truth_required = args.metric == "qq" or args.data is None or args.model == "truth"
    settings = evaluation_settings(load_config(args.config), _truth_arg(args.truth), args.n, args.seed,
                                   truth_required=truth_required)
    truth = settings.truth
    if args.metric == "qq" and isinstance(truth, MixtureModel):
        raise QQNotFeasibleError("QQ plot non réalisable pour un mélange de processus: la composante "
                                 "ayant généré chaque séquence est inconnue, le changement de temps "
                                 "n'a pas de compensateur de référence")

    reference = read_dataset(args.data) if args.data else None
    window = reference.window if reference is not None else Window(SIMULATION_CONFIG["horizon"])
    generated = _generated_sample(args.model, truth, settings, window)
    estimator = args.label or generated.label

    with verrou_sortie(args.out) as out:
        if args.metric == "intensity":
            if reference is None:
                reference = make_dataset(truth, None, settings.n_generated, window, settings.seed, label="vérité")
            if truth is not None:
                dataset_name = getattr(truth, "label", truth.family)
            else:
                dataset_name = reference.label or Path(args.data).stem
            truth_curve = empirical_intensity(reference, settings.bin_width)
            model_curve = empirical_intensity(generated, settings.bin_width)
            value = intensity_deviation(truth_curve, model_curve)
            record = EvaluationRecord(dataset_name, estimator, "intensity", settings.seed, value)
            reference_name = "vérité" if truth is not None else "données"
            emit_report([record], out, curves={reference_name: truth_curve, estimator: model_curve})
            print(f"✓ Écart d'intensité empirique ({estimator} / {dataset_name}): {value:.4f}")
        else:
            increments = pooled_increments(generated, truth)
            qq = qq_from_increments(increments)
            record = EvaluationRecord(truth.family, estimator, "qq", settings.seed, qq.slope_deviation)
            emit_report([record], out, qq_points={estimator: increments})
            print(f"✓ Pente QQ ({estimator}): {qq.slope:.4f} - écart {qq.slope_deviation:.4f} "
                  f"({qq.sample_size} incréments)")
    return 0


def commande_reproduce(args):
    """Reproduction complète : simulation, entraînement, ajustements, évaluation."""
    print_banner(f"🚀 PPWGAN - REPRODUCTION ({args.preset}) 🚀")
    with verrou_sortie(args.out) as out:
        pipeline = ReproductionPipeline(out, args.preset, n_seeds=args.seeds, max_iters=args.iters,
                                        base_seed=args.seed or 0, show_progress=not args.quiet)
        written = pipeline.execute_full_pipeline()
    print("\n📁 Fichiers générés:")
    for path in written:
        print(f"  ✓ {path}")
    return 0


def commande_distance(args):
    """Distances ⋆ entre les séquences de deux fichiers."""
    left, right = read_dataset(args.left), read_dataset(args.right)
    if left.window != right.window:
        raise UsageError(f"fenêtres différentes: T={left.window.horizon_T} et T={right.window.horizon_T}")
    if args.paired and len(left) != len(right):
        raise UsageError(f"--paired: {len(left)} et {len(right)} séquences")
    rows = pairwise_star_distances(left.sequences, right.sequences, left.window, paired=args.paired)
    table = pd.DataFrame(rows, columns=["left", "right", "distance"])
    with verrou_sortie(args.out) as out:
        path = out / "distances.csv"
        table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    mean = float(np.mean(table["distance"])) if len(table) else 0.0
    print(f"✓ {len(table)} distances - moyenne {mean:.4f}")
    print(f"  Fichier: {path}")
    return 0


# ============================================
# MAIN
# ============================================

def construire_parser():
    parser = argparse.ArgumentParser(
        description="ppwgan - WGAN pour processus ponctuels temporels",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples:
  python main.py simulate --config sc.json --n 2000 --seed 7
  python main.py train data/datasets/SC.jsonl --iters 0
  python main.py fit data/datasets/SC.jsonl --family IP
  python main.py evaluate --truth IP+SE+SC --model truth --metric intensity
  python main.py reproduce --preset smoke --out /tmp/ppwgan
        """
    )
    parser.add_argument("--verbose", action="store_true", help="Journalisation DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=str(DATA_DIR), help="Dossier de sortie (défaut: data/)")
        p.add_argument("--seed", type=int, default=None, help="Graine")

    p = sub.add_parser("simulate", help="Générer un jeu de données")
    common(p)
    p.add_argument("--config", required=True, help="Fichier JSON (section simulate)")
    p.add_argument("--n", type=int, default=None, help="Nombre de séquences")
    p.add_argument("--output", default=None, help="Fichier JSONL (relatif à --out)")
    p.set_defaults(func=commande_simulate)

    p = sub.add_parser("train", help="Entraîner le WGAN")
    common(p)
    p.add_argument("data", help="Jeu de données JSONL")
    p.add_argument("--config", default=None)
    p.add_argument("--iters", type=int, default=None, help="Itérations du générateur")
    p.add_argument("--nu", type=float, default=None, help="Coefficient de la pénalité de Lipschitz")
    p.add_argument("--k", type=int, default=None, help="Taille des états cachés")
    p.set_defaults(func=commande_train)

    p = sub.add_parser("fit", help="Ajuster une baseline MLE")
    common(p)
    p.add_argument("data", help="Jeu de données JSONL")
    p.add_argument("--family", required=True, choices=["IP", "SE", "SC", "NN"])
    p.add_argument("--config", default=None)
    p.add_argument("--iters", type=int, default=None)
    p.set_defaults(func=commande_fit)

    p = sub.add_parser("evaluate", help="Évaluer un modèle contre la vérité ou des données")
    common(p)
    p.add_argument("--truth", default=None,
                   help="Famille (SC, IP+SE+SC) ou fichier JSON de modèle ; facultatif pour intensity avec --data")
    p.add_argument("--model", required=True, help="Checkpoint WGAN, modèle MLE ou 'truth'")
    p.add_argument("--metric", required=True, choices=["qq", "intensity"])
    p.add_argument("--data", default=None, help="Données réelles de référence (intensité)")
    p.add_argument("--config", default=None)
    p.add_argument("--n", type=int, default=None, help="Taille de l'échantillon généré")
    p.add_argument("--label", default=None, help="Nom de l'estimateur dans le rapport")
    p.set_defaults(func=commande_evaluate)

    p = sub.add_parser("reproduce", help="Reproduction complète")
    common(p)
    p.add_argument("--preset", default="desk", choices=["desk", "paper", "smoke"])
    p.add_argument("--seeds", type=int, default=None, help="Nombre de graines")
    p.add_argument("--iters", type=int, default=None, help="Itérations du générateur")
    p.add_argument("--quiet", action="store_true", help="Sans barre de progression")
    p.set_defaults(func=commande_reproduce)

    p = sub.add_parser("distance", help="Distances ⋆ entre deux jeux de données")
    common(p)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--paired", action="store_true", help="Distance entre séquences de même rang")
    p.set_defaults(func=commande_distance)
    return parser


def main(argv=None):
    """Point d'entrée principal ; retourne le code de sortie."""
    parser = construire_parser()
    args = parser.parse_args(argv)
    configurer_logging(logging.DEBUG if args.verbose else logging.INFO)
    if Path(args.out).resolve() == Path(DATA_DIR).resolve():
        setup_directories()

    try:
        return args.func(args)
    except PPWGANError as e:
        print(f"✗ {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n\n⚠️  Interruption utilisateur (Ctrl+C)", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
