"""
Estimation par maximum de vraisemblance - ppwgan
================================================
Montée de gradient (Adam) sur les coordonnées non contraintes de chaque famille,
arrêt quand la norme du gradient passe sous grad_tol ou au bout du budget.
Le meilleur itéré rencontré est conservé.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from ..config import MLE_CONFIG
from ..core.errors import DomainError, IoError, NumericalError, ParseError, UsageError
from ..core.rng import RngStream
from ..neural.adam import AdamState, adam_step
from ..simulation.intensities import model_from_dict, model_to_dict
from ..simulation.simulator import make_dataset
from .families import EventBatch, make_family
from .likelihood import mean_loglik

logger = logging.getLogger(__name__)


@dataclass
class FittedModel:
    model: object
    family: str
    final_loglik: float
    iterations: int = 0
    grad_norm: float = float("nan")
    converged: bool = False

    @property
    def label(self):
        return f"MLE-{self.family}"

    def diagnostics(self):
        return {"family": self.family, "final_loglik": self.final_loglik, "iterations": self.iterations,
                "grad_norm": self.grad_norm, "converged": self.converged}


def _fit_settings(fit_config):
    settings = dict(MLE_CONFIG)
    settings.update(fit_config or {})
    unknown = set(settings) - set(MLE_CONFIG) - {"lr", "show_progress"}
    if unknown:
        raise UsageError(f"paramètres d'estimation inconnus: {sorted(unknown)}")
    return settings


def _norm(grads):
    return float(np.sqrt(sum(float(np.sum(g ** 2)) for g in grads.values())))


def fit(data, family, fit_config=None):
    """
    Ajuste une famille paramétrique à un Dataset.

    Args:
        data (Dataset): séquences observées
        family (str): "IP", "SE", "SC" ou "NN"
        fit_config (dict): surcharge de MLE_CONFIG (lr, max_iters, grad_tol, ip_kernels, ...)

    Returns:
        FittedModel
    """
    if len(data) == 0:
        raise DomainError("impossible d'ajuster un modèle sur un jeu de données vide")
    settings = _fit_settings(fit_config)
    objective = make_family(family, settings["ip_kernels"], settings["nn_hidden_dim"])
    lr = settings.get("lr") or (settings["lr_nn"] if family == "NN" else settings["lr_parametric"])

    batch = EventBatch.from_dataset(data)
    u = objective.initial(data, RngStream(settings["seed"], 0).generator())
    state = AdamState.for_params(u, lr=lr, beta1=0.9, beta2=0.999)

    logger.info(f"Ajustement MLE-{family} sur {len(data)} séquences (lr={lr}, {settings['max_iters']} itérations max)")
    best_value, best_u, best_norm = -np.inf, u, np.nan
    value, norm, converged, iteration = np.nan, np.nan, False, 0
    progress = tqdm(range(settings["max_iters"]), desc=f"MLE-{family}", disable=not settings.get("show_progress", True))
    for iteration in progress:
        value, grads = objective.value_and_grad(u, batch)
        norm = _norm(grads)
        if not np.isfinite(value) or not np.isfinite(norm):
            progress.close()
            raise NumericalError(f"MLE-{family}: divergence à l'itération {iteration} "
                                 f"(loglik={value}, |grad|={norm}, meilleur loglik={best_value:.6g})")
        if value > best_value:
            best_value, best_u, best_norm = value, u, norm
        if norm < settings["grad_tol"]:
            converged = True
            break
        # ascension : Adam minimise, on lui passe -grad
        u, state = adam_step(u, {k: -g for k, g in grads.items()}, state)
    else:
        iteration = settings["max_iters"]
        if iteration:
            value, grads = objective.value_and_grad(u, batch)
            if np.isfinite(value) and value > best_value:
                best_value, best_u, best_norm = value, u, _norm(grads)
    progress.close()

    if not np.isfinite(best_value):
        value, grads = objective.value_and_grad(u, batch)
        best_value, best_norm = value, _norm(grads)

    model = objective.to_model(best_u)
    status = "✓ convergé" if converged else "⚠ budget atteint"
    logger.info(f"{status} - MLE-{family}: loglik moyenne {best_value:.4f}, |grad|={best_norm:.2e}, "
                f"{iteration} itérations")
    return FittedModel(model, family, float(best_value), int(iteration), float(best_norm), converged)


def sample_fitted(fitted, count, window, seed):
    """Séquences simulées par amincissement sous le modèle ajusté."""
    return make_dataset([fitted.model], [1.0], count, window, seed, label=fitted.label)


def heldout_loglik(model, data):
    """Log-vraisemblance moyenne d'un modèle (ajusté ou non) sur des données de test."""
    model = getattr(model, "model", model)
    return mean_loglik(model, data)


# ============================================================
# Fichiers de modèles ajustés
# ============================================================

def save_fitted_model(fitted, path):
    path = Path(path)
    record = model_to_dict(fitted.model)
    record["diagnostics"] = fitted.diagnostics()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(record, indent=2), encoding="utf-8")
    except OSError as e:
        raise IoError(f"écriture du modèle impossible ({path}): {e}") from e
    return path


def load_fitted_model(path):
    path = Path(path)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"lecture du modèle impossible ({path}): {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: JSON invalide ({e.msg})", line_number=e.lineno) from e
    model = model_from_dict(record, path=str(path))
    diag = record.get("diagnostics", {})
    return FittedModel(model, diag.get("family", model.family), float(diag.get("final_loglik", np.nan)),
                       int(diag.get("iterations", 0)), float(diag.get("grad_norm", np.nan)),
                       bool(diag.get("converged", False)))
