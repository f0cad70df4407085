"""
Mesures d'évaluation - ppwgan
=============================
- Intensité empirique : λ'(t) = E[N(t + δt) - N(t)] / δt, par classes de largeur δt
- Écart d'intensité : distance L1 entre deux courbes
- Pente QQ : changement de temps par le compensateur de la vérité terrain,
  régression des quantiles empiriques contre ceux d'une Exp(1)
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from ..core.errors import DomainError, QQNotFeasibleError
from ..mle.likelihood import compensator
from ..simulation.intensities import MixtureModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntensityCurve:
    bin_width: float
    values: tuple

    @property
    def array(self):
        return np.asarray(self.values, dtype=np.float64)

    @property
    def edges(self):
        return np.arange(len(self.values) + 1) * self.bin_width


@dataclass(frozen=True)
class QqResult:
    slope: float
    intercept: float
    slope_deviation: float
    sample_size: int


def empirical_intensity(data, bin_width):
    """
    Intensité empirique moyenne sur les séquences du Dataset.

    Returns:
        IntensityCurve avec ceil(T / δt) classes
    """
    if not bin_width > 0:
        raise DomainError(f"largeur de classe δt doit être > 0 (reçu {bin_width})")
    if len(data) == 0:
        raise DomainError("jeu de données vide: intensité empirique indéfinie")
    T = data.window.horizon_T
    n_bins = math.ceil(T / bin_width - 1e-12)
    counts = np.zeros(n_bins)
    for seq in data.sequences:
        if len(seq):
            idx = np.minimum((seq.array / bin_width).astype(np.int64), n_bins - 1)
            counts += np.bincount(idx, minlength=n_bins)
    values = counts / len(data) / bin_width
    return IntensityCurve(float(bin_width), tuple(float(v) for v in values))


def intensity_deviation(a, b):
    """Σ_j |a_j - b_j| δt."""
    if a.bin_width != b.bin_width or len(a.values) != len(b.values):
        raise DomainError(f"courbes incompatibles (δt {a.bin_width} / {b.bin_width}, "
                          f"{len(a.values)} / {len(b.values)} classes)")
    return float(np.abs(a.array - b.array).sum() * a.bin_width)


def exponential_quantiles(n):
    i = np.arange(1, n + 1)
    return -np.log1p(-i / (n + 1.0))


def qq_from_increments(values):
    """Régression des Λ triés contre les quantiles théoriques d'une Exp(1)."""
    values = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if values.size < 2:
        raise DomainError(f"au moins 2 incréments de compensateur requis (reçu {values.size})")
    if not np.all(np.isfinite(values)):
        raise DomainError("incréments de compensateur non finis")
    fit = linregress(exponential_quantiles(values.size), values)
    return QqResult(float(fit.slope), float(fit.intercept), abs(float(fit.slope) - 1.0), int(values.size))


def pooled_increments(generated, truth):
    """
    Incréments Λ entre événements consécutifs, séquences mises bout à bout.

    Après changement de temps, chaque séquence est un Poisson de taux 1 sur [0, Λ(T)).
    Le morceau [t_n, T) d'une séquence est reporté sur le premier incrément de la
    suivante (absence de mémoire) ; seul le dernier report est censuré.
    """
    if isinstance(truth, MixtureModel):
        raise QQNotFeasibleError("QQ plot non réalisable pour un mélange de processus "
                                 "(la composante de chaque séquence est inconnue)")
    increments, carry = [], 0.0
    for seq in generated.sequences:
        pieces = compensator(truth, seq, generated.window)
        if pieces.size == 1:
            carry += pieces[0]
            continue
        increments.append(pieces[0] + carry)
        increments.extend(pieces[1:-1])
        carry = pieces[-1]
    return np.asarray(increments, dtype=np.float64)


def qq_slope(generated, truth):
    """
    Écart de pente du QQ plot des séquences générées sous le compensateur de la vérité.

    Returns:
        QqResult (pente, ordonnée à l'origine, |pente - 1|, taille d'échantillon)
    """
    return qq_from_increments(pooled_increments(generated, truth))
