"""
Points de sauvegarde du WGAN (JSON versionné)
=============================================
{"format": "ppwgan-checkpoint", "version": 1, "hidden_dim": k,
 "horizon_T": T, "noise_rate": λ_z, "iteration": i,
 "generator": {nom: tableau}, "critic": {nom: tableau}}

Les réels passent par repr() : relecture exacte en double précision.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ..core.errors import IoError, ParseError
from ..core.types import Window
from .rnn import CriticParams, GeneratorParams

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "ppwgan-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    generator: GeneratorParams
    critic: CriticParams
    noise_rate: float
    window: Window
    iteration: int = 0

    @property
    def hidden_dim(self):
        return self.generator.hidden_dim


def save_checkpoint(path, checkpoint):
    path = Path(path)
    record = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "hidden_dim": checkpoint.hidden_dim,
        "horizon_T": checkpoint.window.horizon_T,
        "noise_rate": float(checkpoint.noise_rate),
        "iteration": int(checkpoint.iteration),
        "generator": {k: v.tolist() for k, v in checkpoint.generator.as_dict().items()},
        "critic": {k: v.tolist() for k, v in checkpoint.critic.as_dict().items()},
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(record), encoding="utf-8")
    except OSError as e:
        raise IoError(f"écriture du checkpoint impossible ({path}): {e}") from e
    logger.info(f"✓ Checkpoint sauvegardé: {path} (itération {checkpoint.iteration})")
    return path


def load_checkpoint(path):
    path = Path(path)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"lecture du checkpoint impossible ({path}): {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"checkpoint JSON invalide ({e.msg})", line_number=e.lineno) from e

    if not isinstance(record, dict) or record.get("format") != CHECKPOINT_FORMAT:
        found = record.get("format") if isinstance(record, dict) else type(record).__name__
        raise ParseError(f"{path}: format {found!r} inattendu")
    if record.get("version") != CHECKPOINT_VERSION:
        raise ParseError(f"{path}: version {record.get('version')!r} non supportée")
    try:
        generator = GeneratorParams.from_dict(record["generator"]).check()
        critic = CriticParams.from_dict(record["critic"]).check()
        return Checkpoint(generator, critic, float(record["noise_rate"]),
                          Window(float(record["horizon_T"])), int(record.get("iteration", 0)))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: champ manquant ou invalide ({e})") from e
