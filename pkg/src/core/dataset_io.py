"""
Format de fichier des jeux de données (JSON Lines)
==================================================
Ligne 1 : en-tête {"T": <réel>, "label": <texte>}
Lignes suivantes : un tableau JSON de temps strictement croissants par séquence.

Les réels sont écrits avec repr(), ce qui garantit un aller-retour exact.
"""

import json
import logging
import math
from pathlib import Path

from .errors import DomainError, IoError, ParseError
from .types import Dataset, Window, validate_sequence

logger = logging.getLogger(__name__)


def write_dataset(dataset, path):
    """Écrit un Dataset au format JSONL."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            header = {"T": dataset.window.horizon_T, "label": dataset.label}
            f.write(json.dumps(header, ensure_ascii=False) + "\n")
            for seq in dataset.sequences:
                f.write(json.dumps(list(seq.times)) + "\n")
    except OSError as e:
        raise IoError(f"écriture impossible de {path}: {e}") from e
    logger.info(f"✓ {len(dataset)} séquences écrites dans {path}")
    return path


def read_dataset(path, window=None):
    """
    Lit un fichier JSONL.

    Args:
        path: chemin du fichier
        window (Window, optionnel): fenêtre attendue ; un en-tête différent lève DomainError

    Returns:
        Dataset
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise IoError(f"lecture impossible de {path}: {e}") from e

    if not lines:
        raise ParseError("fichier vide, en-tête manquant", line_number=1)

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"en-tête JSON invalide ({e.msg})", line_number=1) from e
    if not isinstance(header, dict) or "T" not in header:
        raise ParseError('en-tête attendu {"T": ..., "label": ...}', line_number=1)
    T = header["T"]
    if isinstance(T, bool) or not isinstance(T, (int, float)):
        raise ParseError(f"T doit être un réel, reçu {T!r}", line_number=1)
    file_window = Window(float(T))
    if window is not None and window.horizon_T != file_window.horizon_T:
        raise DomainError(f"fenêtre incompatible: fichier T={file_window.horizon_T}, attendu T={window.horizon_T}")

    sequences = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            values = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"JSON invalide ({e.msg})", line_number=number) from e
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in values
        ):
            raise ParseError("un tableau de réels est attendu", line_number=number)
        try:
            sequences.append(validate_sequence(values, file_window))
        except DomainError as e:
            raise DomainError(f"ligne {number}: {e}") from e

    label = header.get("label", "")
    logger.info(f"✓ {len(sequences)} séquences chargées depuis {path}")
    return Dataset(file_window, tuple(sequences), str(label))


def dataset_io(path, direction, dataset=None, window=None):
    """Point d'entrée unique : direction 'read' ou 'write'."""
    if direction == "read":
        return read_dataset(path, window=window)
    if direction == "write":
        if dataset is None:
            raise DomainError("aucun Dataset fourni pour l'écriture")
        return write_dataset(dataset, path)
    raise DomainError(f"direction inconnue: {direction!r} (attendu 'read' ou 'write')")
