"""
Fichiers de configuration JSON (schéma versionné)
=================================================
{
  "schema_version": 1,
  "simulate": {"model": "SC" | {"family": "SC", "params": {...}}, "n_sequences": 2000,
               "horizon": 15, "seed": 7, "label": "..."},
  "train":    {champs de TrainConfig},
  "fit":      {champs de MLE_CONFIG},
  "evaluate": {"truth": modèle, "bin_width": 0.1, "n_generated": 2000, "seed": 0}
}
Chaque erreur indique le chemin du champ fautif (ex. "simulate.n_sequences").
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ..config import CONFIG_SCHEMA_VERSION, EVAL_CONFIG, MLE_CONFIG, SIMULATION_CONFIG
from ..core.errors import DomainError, IoError, UsageError
from ..core.types import Window
from ..simulation.intensities import default_model, model_from_dict
from ..wgan.trainer import TrainConfig

logger = logging.getLogger(__name__)

SECTIONS = ("simulate", "train", "fit", "evaluate")


@dataclass
class SimulationSettings:
    model: object
    n_sequences: int
    window: Window
    seed: int
    label: str = None


@dataclass
class EvaluationSettings:
    truth: object
    bin_width: float
    n_generated: int
    seed: int


def load_config(path):
    """Lit et vérifie l'en-tête d'un fichier de configuration ; None -> configuration vide."""
    if path is None:
        return {"schema_version": CONFIG_SCHEMA_VERSION}
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"lecture de la configuration impossible ({path}): {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: JSON invalide ligne {e.lineno} ({e.msg})") from e
    if not isinstance(data, dict):
        raise UsageError(f"{path}: objet JSON attendu à la racine")
    version = data.get("schema_version")
    if version is None:
        raise UsageError(f"{path}: schema_version: champ manquant")
    if version != CONFIG_SCHEMA_VERSION:
        raise UsageError(f"{path}: schema_version: version {version!r} non supportée (attendu {CONFIG_SCHEMA_VERSION})")
    unknown = set(data) - set(SECTIONS) - {"schema_version"}
    if unknown:
        raise UsageError(f"{path}: sections inconnues {sorted(unknown)}")
    for section in SECTIONS:
        if section in data and not isinstance(data[section], dict):
            raise UsageError(f"{section}: objet attendu")
    return data


def _int_field(section, name, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise UsageError(f"{section}.{name}: entier >= {minimum} attendu (reçu {value!r})")
    return value


def _float_field(section, name, value, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or (positive and not value > 0):
        raise UsageError(f"{section}.{name}: réel {'> 0 ' if positive else ''}attendu (reçu {value!r})")
    return float(value)


def parse_model(description, path):
    """Nom de famille ("SC", "IP+SE+SC") ou objet {"family", "params"}."""
    try:
        if isinstance(description, str):
            return default_model(description)
        return model_from_dict(description, path=path)
    except DomainError as e:
        message = str(e)
        raise UsageError(message if message.startswith(path) else f"{path}: {message}") from e


def simulation_settings(config, n_sequences=None, seed=None):
    section = config.get("simulate")
    if section is None:
        raise UsageError("simulate: section manquante")
    if "model" not in section:
        raise UsageError("simulate.model: champ manquant")
    model = parse_model(section["model"], "simulate.model")
    n = n_sequences if n_sequences is not None else section.get("n_sequences", SIMULATION_CONFIG["n_sequences"])
    horizon = section.get("horizon", SIMULATION_CONFIG["horizon"])
    seed = seed if seed is not None else section.get("seed", 0)
    return SimulationSettings(
        model=model,
        n_sequences=_int_field("simulate", "n_sequences", n),
        window=Window(_float_field("simulate", "horizon", horizon)),
        seed=_int_field("simulate", "seed", seed),
        label=section.get("label"),
    )


def train_settings(config, **overrides):
    """TrainConfig = valeurs par défaut < fichier < options de la ligne de commande."""
    values = dict(config.get("train", {}))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrainConfig.from_dict(values)
    except TypeError as e:
        raise UsageError(f"train: {e}") from e
    except UsageError as e:
        raise UsageError(f"train.{e}") from e


def fit_settings(config, **overrides):
    values = dict(config.get("fit", {}))
    unknown = set(values) - set(MLE_CONFIG) - {"lr"}
    if unknown:
        raise UsageError(f"fit: paramètres inconnus {sorted(unknown)}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return values


def evaluation_settings(config, truth=None, n_generated=None, seed=None, truth_required=True):
    """Paramètres d'évaluation ; la vérité peut manquer si truth_required est faux (données réelles)."""
    section = config.get("evaluate", {})
    description = truth if truth is not None else section.get("truth")
    if description is None and truth_required:
        raise UsageError("evaluate.truth: champ manquant")
    n = n_generated if n_generated is not None else section.get("n_generated", EVAL_CONFIG["n_generated"])
    seed = seed if seed is not None else section.get("seed", 0)
    return EvaluationSettings(
        truth=parse_model(description, "evaluate.truth") if description is not None else None,
        bin_width=_float_field("evaluate", "bin_width", section.get("bin_width", EVAL_CONFIG["bin_width"])),
        n_generated=_int_field("evaluate", "n_generated", n, minimum=1),
        seed=_int_field("evaluate", "seed", seed),
    )
