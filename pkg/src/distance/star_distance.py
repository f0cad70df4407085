"""
Distance ⋆ entre séquences d'événements
=======================================
Trois calculs équivalents :
- star_distance : forme close, appariement des événements dans l'ordre croissant,
  les événements non appariés sont envoyés sur l'ancre s = T
- star_distance_oracle : minimum sur toutes les permutations (tests uniquement)
- counting_measure_l1 : aire entre les deux fonctions de comptage

La forme close retenue est Σ_{i<=n} |t_i - τ_i| + Σ_{i>n} (T - τ_i).
"""

import itertools

import numpy as np

from ..core.errors import DomainError

ORACLE_MAX_LENGTH = 9


def _times(seq):
    return np.asarray(getattr(seq, "times", seq), dtype=np.float64).ravel()


def _check_window(window, *arrays):
    T = window.horizon_T
    for arr in arrays:
        if arr.size and (arr[0] < 0.0 or arr[-1] >= T):
            raise DomainError(f"séquence hors de la fenêtre [0, {T})")
        if arr.size > 1 and np.any(np.diff(arr) < 0.0):
            raise DomainError("temps d'événements non triés")


def _sorted_star(a, b, T):
    if a.size > b.size:
        a, b = b, a
    n = a.size
    return float(np.abs(a - b[:n]).sum() + (T - b[n:]).sum())


def star_distance(xi, rho, window):
    """
    Distance ⋆ en O(n + m).

    Args:
        xi, rho: EventSequence (ou tableaux triés)
        window (Window)

    Returns:
        float >= 0
    """
    a, b = _times(xi), _times(rho)
    _check_window(window, a, b)
    return _sorted_star(a, b, window.horizon_T)


def star_distance_oracle(xi, rho, window):
    """Définition par permutations : coût minimal d'appariement, ancre s = T."""
    a, b = _times(xi), _times(rho)
    _check_window(window, a, b)
    if a.size > b.size:
        a, b = b, a
    n, m = a.size, b.size
    if m > ORACLE_MAX_LENGTH:
        raise DomainError(f"oracle limité à {ORACLE_MAX_LENGTH} événements (reçu {m})")
    s = window.anchor_s
    best = np.inf
    for perm in itertools.permutations(range(m)):
        cost = 0.0
        for i in range(n):
            cost += abs(a[i] - b[perm[i]])
        for i in range(n, m):
            cost += abs(s - b[perm[i]])
        best = min(best, cost)
    return float(best) if m else 0.0


def counting_measure_l1(xi, rho, window):
    """∫_0^T |N_ξ(t) - N_ρ(t)| dt, par accumulation sur les segments constants."""
    a, b = _times(xi), _times(rho)
    _check_window(window, a, b)
    points = np.concatenate([a, b])
    if points.size == 0:
        return 0.0
    steps = np.concatenate([np.ones(a.size), -np.ones(b.size)])
    order = np.argsort(points, kind="stable")
    points, steps = points[order], steps[order]
    level = np.cumsum(steps)
    lengths = np.diff(np.append(points, window.horizon_T))
    return float(np.abs(level) @ lengths)


def pairwise_star_distances(left, right, window, paired=False):
    """
    Distances entre deux listes de séquences.

    Returns:
        liste de tuples (i, j, distance) ; en mode apparié seulement (i, i)
    """
    left = [_times(s) for s in left]
    right = [_times(s) for s in right]
    _check_window(window, *left, *right)
    T = window.horizon_T
    if paired:
        return [(i, i, _sorted_star(a, b, T)) for i, (a, b) in enumerate(zip(left, right))]
    return [(i, j, _sorted_star(a, b, T)) for i, a in enumerate(left) for j, b in enumerate(right)]
