"""
Vraisemblance et compensateur des quatre familles
=================================================
log L = Σ_i log λ(t_i | historique) - ∫_0^T λ(s) ds

Le compensateur est renvoyé morceau par morceau : [0, t1), [t1, t2), ..., [tn, T).
- IP : différences de fonctions d'erreur, une par noyau
- SE : forme close avec l'accumulateur récursif d'excitation
- SC : forme close de ∫ exp(η s - k γ) ds entre deux événements
- NN : quadrature de Gauss-Legendre à 16 nœuds par intervalle
"""

import logging
from functools import lru_cache, singledispatch

import numpy as np
from scipy.special import erf

from ..core.errors import DomainError
from ..simulation.intensities import IpParams, MixtureModel, NnIntensityParams, ScParams, SeParams, softplus

logger = logging.getLogger(__name__)

GAUSS_LEGENDRE_NODES = 16


@lru_cache(maxsize=8)
def gauss_legendre(n=GAUSS_LEGENDRE_NODES):
    """Nœuds et poids sur [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)


def expm1_ratio(x):
    """expm1(x) / x, prolongé par 1 en 0."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x / 2.0, np.expm1(safe) / safe)


def _times_of(seq, window):
    t = np.asarray(getattr(seq, "times", seq), dtype=np.float64).ravel()
    if t.size and (t[0] < 0 or t[-1] >= window.horizon_T):
        raise DomainError(f"séquence hors de la fenêtre [0, {window.horizon_T})")
    return t


# ============================================================
# Intensité aux événements
# ============================================================

@singledispatch
def _event_intensities(model, times):
    raise DomainError(f"vraisemblance non définie pour {type(model).__name__}")


@_event_intensities.register
def _(model: IpParams, times):
    return model.rate(times)


@_event_intensities.register
def _(model: SeParams, times):
    out = np.empty(times.size)
    excitation, last = 0.0, 0.0
    for i, t in enumerate(times):
        decayed = excitation * np.exp(-model.omega * (t - last))
        out[i] = model.mu + model.beta * decayed
        excitation, last = decayed + 1.0, t
    return out


@_event_intensities.register
def _(model: ScParams, times):
    return np.exp(model.eta * times - model.gamma * np.arange(times.size))


@_event_intensities.register
def _(model: NnIntensityParams, times):
    out = np.empty(times.size)
    h, last = model.initial_state(), 0.0
    for i, t in enumerate(times):
        out[i] = model.readout(h, t - last)
        h, last = model.update(h, t - last), t
    return out


# ============================================================
# Compensateur par morceaux
# ============================================================

@singledispatch
def _pieces(model, times, T):
    raise DomainError(f"compensateur non défini pour {type(model).__name__}")


@_pieces.register
def _(model: IpParams, times, T):
    edges = np.concatenate([[0.0], times, [T]])
    a = np.asarray(model.weights)
    c = np.asarray(model.centers)
    s = np.asarray(model.sds)
    cumulative = erf((edges[:, None] - c) / s) @ (a / (2.0 * np.sqrt(2.0)))
    return np.diff(cumulative) + model.baseline * np.diff(edges)


@_pieces.register
def _(model: SeParams, times, T):
    edges = np.concatenate([[0.0], times, [T]])
    gaps = np.diff(edges)
    out = np.empty(gaps.size)
    excitation = 0.0
    for i, gap in enumerate(gaps):
        decay = np.exp(-model.omega * gap)
        out[i] = model.mu * gap + model.beta / model.omega * excitation * (1.0 - decay)
        excitation = excitation * decay + 1.0
    return out


@_pieces.register
def _(model: ScParams, times, T):
    starts = np.concatenate([[0.0], times])
    gaps = np.diff(np.append(starts, T))
    counts = np.arange(starts.size)
    return np.exp(model.eta * starts - model.gamma * counts) * gaps * expm1_ratio(model.eta * gaps)


@_pieces.register
def _(model: NnIntensityParams, times, T):
    nodes, weights = gauss_legendre()
    starts = np.concatenate([[0.0], times])
    gaps = np.diff(np.append(starts, T))
    out = np.empty(gaps.size)
    h = model.initial_state()
    base = float(model.v_readout @ h)
    for i, gap in enumerate(gaps):
        elapsed = gap * (nodes + 1.0) / 2.0
        out[i] = gap / 2.0 * float(weights @ softplus(base + model.v_elapsed * elapsed + model.b_readout))
        if i < times.size:
            h = model.update(h, gap)
            base = float(model.v_readout @ h)
    return out


def compensator(model, seq, window):
    """
    Λ_i sur chaque intervalle entre événements consécutifs.

    Returns:
        tableau de n + 1 valeurs >= 0 : [0, t1), [t1, t2), ..., [tn, T)
    """
    if isinstance(model, MixtureModel):
        raise DomainError("compensateur d'un mélange non défini (composante inconnue)")
    times = _times_of(seq, window)
    pieces = _pieces(model, times, window.horizon_T)
    return np.maximum(pieces, 0.0)


def total_compensator(model, window, seq=()):
    return float(compensator(model, seq, window).sum())


def loglik(model, seq, window):
    """Log-vraisemblance d'une séquence ; -inf si λ(t_i) <= 0 en un événement."""
    if isinstance(model, MixtureModel):
        raise DomainError("vraisemblance d'un mélange non supportée")
    times = _times_of(seq, window)
    integral = float(_pieces(model, times, window.horizon_T).sum())
    if times.size == 0:
        return -integral
    rates = _event_intensities(model, times)
    if np.any(rates <= 0.0):
        return -np.inf
    return float(np.log(rates).sum()) - integral


def mean_loglik(model, data):
    """Moyenne de loglik sur les séquences d'un Dataset."""
    if len(data) == 0:
        raise DomainError("jeu de données vide")
    return float(np.mean([loglik(model, seq, data.window) for seq in data.sequences]))
