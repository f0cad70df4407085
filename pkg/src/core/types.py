"""
Types du domaine - ppwgan
=========================
Fenêtre d'observation, séquence d'événements et jeu de données.
Tous les objets sont immuables après construction.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """Intervalle d'observation [0, T) ; le point d'ancrage s vaut T."""

    horizon_T: float

    def __post_init__(self):
        T = float(self.horizon_T)
        if not math.isfinite(T) or T <= 0:
            raise DomainError(f"horizon T invalide: {self.horizon_T} (doit être > 0)")
        object.__setattr__(self, "horizon_T", T)

    @property
    def anchor_s(self):
        return self.horizon_T

    def contains(self, t):
        return 0.0 <= t < self.horizon_T


@dataclass(frozen=True)
class EventSequence:
    """Réalisation {t1 < t2 < ... < tn} d'un processus ponctuel temporel."""

    times: tuple = ()

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    @property
    def array(self):
        return np.asarray(self.times, dtype=np.float64)


def validate_sequence(times, window, quiet=False):
    """
    Construit une EventSequence valide à partir d'une liste de temps.

    Les temps sont triés ; les doublons sont décalés du plus petit incrément
    représentable (et signalés), vers le bas s'ils touchent le bord T.
    Un temps hors de [0, T) lève DomainError.

    Args:
        times: itérable de réels
        window (Window): fenêtre d'observation
        quiet (bool): journalise les doublons en DEBUG au lieu de WARNING

    Returns:
        EventSequence
    """
    arr = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=np.float64).ravel()
    if arr.size == 0:
        return EventSequence(())

    T = window.horizon_T
    bad = ~np.isfinite(arr) | (arr < 0.0) | (arr >= T)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise DomainError(f"temps d'événement hors fenêtre à l'indice {idx}: {arr[idx]} (T={T})")

    arr = np.sort(arr, kind="stable")
    n_ties = 0
    if arr.size > 1 and np.any(np.diff(arr) <= 0.0):
        for i in range(1, arr.size):
            if arr[i] <= arr[i - 1]:
                arr[i] = np.nextafter(arr[i - 1], np.inf)
                n_ties += 1
        if arr[-1] >= T:
            # amas collé au bord droit : séparation vers le bas depuis le dernier flottant < T
            arr[-1] = np.nextafter(T, 0.0)
            for i in range(arr.size - 2, -1, -1):
                if arr[i] < arr[i + 1]:
                    break
                arr[i] = np.nextafter(arr[i + 1], -np.inf)
            if arr[0] < 0.0:
                raise DomainError(f"impossible de séparer les doublons dans la fenêtre (T={T})")
    if n_ties:
        level = logging.DEBUG if quiet else logging.WARNING
        logger.log(level, f"⚠ {n_ties} doublon(s) de temps décalé(s) d'un ulp")

    return EventSequence(tuple(float(t) for t in arr))


@dataclass(frozen=True)
class Dataset:
    """Ensemble de séquences partageant une même fenêtre."""

    window: Window
    sequences: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        T = self.window.horizon_T
        for i, seq in enumerate(self.sequences):
            arr = seq.array
            if arr.size == 0:
                continue
            if not (np.isfinite(arr).all() and arr[0] >= 0.0 and arr[-1] < T):
                raise DomainError(f"séquence {i}: temps hors de la fenêtre [0, {T})")
            if arr.size > 1 and np.any(np.diff(arr) <= 0.0):
                raise DomainError(f"séquence {i}: temps non strictement croissants")

    def __len__(self):
        return len(self.sequences)

    def counts(self):
        return np.array([len(s) for s in self.sequences], dtype=np.int64)

    def mean_event_rate(self):
        """Nombre total d'événements / (nombre de séquences x T)."""
        if not self.sequences:
            return 0.0
        return float(self.counts().sum()) / (len(self.sequences) * self.window.horizon_T)

    def with_label(self, label):
        return replace(self, label=label)
