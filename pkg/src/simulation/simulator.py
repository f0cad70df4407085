"""
Simulateurs de processus ponctuels - ppwgan
===========================================
- simulate_thinning : algorithme d'amincissement d'Ogata, borne locale par famille
- simulate_homogeneous : Poisson homogène (processus de bruit du générateur)
- make_dataset : jeux de données simples ou mélanges, une graine par séquence
"""

import logging
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from ..config import SIMULATION_CONFIG, get_threads
from ..core.errors import DomainError, NumericalError
from ..core.rng import RngStream
from ..core.types import Dataset, validate_sequence
from .intensities import IpParams, MixtureModel, NnIntensityParams, ScParams, SeParams

logger = logging.getLogger(__name__)


# ============================================================
# États d'amincissement (un par famille)
# ============================================================
# Chaque état expose :
#   rate(t)   -> λ(t | événements acceptés)
#   bound(t)  -> (λ̄, t_fin) : majorant de λ sur [t, t_fin)
#   accept(t) -> enregistre un événement en t

@lru_cache(maxsize=64)
def _ip_global_bound(params, horizon, step, safety):
    grid = np.arange(0.0, horizon + step, step)
    return float(params.rate(grid).max()) * safety


class _IpState:
    def __init__(self, params, horizon):
        self.params = params
        self.horizon = horizon
        self.lam_bar = _ip_global_bound(params, horizon, SIMULATION_CONFIG["ip_bound_grid_step"],
                                        SIMULATION_CONFIG["ip_bound_safety"])

    def rate(self, t):
        return float(self.params.rate(t))

    def bound(self, t):
        return self.lam_bar, self.horizon

    def accept(self, t):
        pass


class _SeState:
    """Accumulateur récursif S = Σ exp(-ω (t_dernier - ti))."""

    def __init__(self, params, horizon):
        self.params = params
        self.horizon = horizon
        self.excitation = 0.0
        self.last = 0.0

    def rate(self, t):
        p = self.params
        return p.mu + p.beta * self.excitation * np.exp(-p.omega * (t - self.last))

    def bound(self, t):
        # l'intensité décroît entre deux événements
        return self.rate(t), self.horizon

    def accept(self, t):
        self.excitation = self.excitation * np.exp(-self.params.omega * (t - self.last)) + 1.0
        self.last = t


class _ScState:
    def __init__(self, params, horizon):
        self.params = params
        self.horizon = horizon
        self.count = 0

    def rate(self, t):
        return float(np.exp(self.params.eta * t - self.params.gamma * self.count))

    def bound(self, t):
        eta = self.params.eta
        t_end = self.horizon if eta == 0 else min(self.horizon, t + 1.0 / abs(eta))
        return float(np.exp(max(eta * t, eta * t_end) - self.params.gamma * self.count)), t_end

    def accept(self, t):
        self.count += 1


class _NnState:
    SEGMENT = 1.0

    def __init__(self, params, horizon):
        self.params = params
        self.horizon = horizon
        self.h = params.initial_state()
        self.last = 0.0

    def rate(self, t):
        return float(self.params.readout(self.h, t - self.last))

    def bound(self, t):
        # argument du softplus affine en t : maximum atteint à une extrémité du segment
        t_end = min(self.horizon, t + self.SEGMENT)
        return max(self.rate(t), float(self.params.readout(self.h, t_end - self.last))), t_end

    def accept(self, t):
        self.h = self.params.update(self.h, t - self.last)
        self.last = t


_STATES = {IpParams: _IpState, SeParams: _SeState, ScParams: _ScState, NnIntensityParams: _NnState}


def _as_generator(rng):
    return rng.generator() if isinstance(rng, RngStream) else rng


def simulate_thinning(model, window, rng):
    """
    Tire une séquence par amincissement (Ogata).

    Args:
        model: IpParams | SeParams | ScParams | NnIntensityParams
        window (Window)
        rng: RngStream ou numpy.random.Generator

    Returns:
        EventSequence
    """
    state_cls = _STATES.get(type(model))
    if state_cls is None:
        raise DomainError(f"simulation impossible pour {type(model).__name__}")
    gen = _as_generator(rng)
    T = window.horizon_T
    state = state_cls(model, T)
    max_doublings = SIMULATION_CONFIG["thinning_max_doublings"]

    events = []
    t = 0.0
    while t < T:
        lam_bar, t_end = state.bound(t)
        if not np.isfinite(lam_bar):
            raise NumericalError(f"borne d'intensité non finie en t={t:.4f}")
        scale = 1.0
        t_seg = t
        while True:
            bound = lam_bar * scale
            if bound <= 0.0:
                t = t_end
                break
            t = t + gen.exponential(1.0 / bound)
            if t >= t_end:
                t = t_end
                break
            lam = state.rate(t)
            if lam > bound * (1.0 + 1e-12):
                scale *= 2.0
                if scale > 2.0 ** max_doublings:
                    raise NumericalError(f"borne d'intensité violée en t={t:.4f} après {max_doublings} doublements")
                t = t_seg
                continue
            if gen.uniform() * bound <= lam:
                events.append(t)
                state.accept(t)
                break
    return validate_sequence(events, window)


def simulate_homogeneous(rate, window, rng):
    """Poisson homogène de taux `rate` sur [0, T)."""
    if not rate > 0 or not np.isfinite(rate):
        raise DomainError(f"le taux doit être > 0 (reçu {rate})")
    gen = _as_generator(rng)
    T = window.horizon_T
    n = gen.poisson(rate * T)
    return validate_sequence(gen.uniform(0.0, T, n), window)


# ============================================================
# Jeux de données
# ============================================================

def _check_weights(models, weights):
    if not models:
        raise DomainError("liste de modèles vide")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(models),):
        raise DomainError(f"{weights.size} poids pour {len(models)} modèles")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise DomainError(f"poids invalides (somme = {weights.sum()!r}), un simplexe est attendu")
    return weights


def mixture_assignments(weights, count, seed):
    """Composante tirée pour chaque séquence ; le flux (seed, i) est celui de make_dataset."""
    weights = np.asarray(weights, dtype=np.float64)
    return np.array([_pick_component(RngStream(seed, i).generator(), weights) for i in range(count)],
                    dtype=np.int64)


def _pick_component(gen, weights):
    # toujours un seul tirage : la suite du flux ne dépend pas du nombre de composantes
    u = gen.uniform()
    return min(int(np.searchsorted(np.cumsum(weights), u, side="right")), weights.size - 1)


def _simulate_chunk(models, weights, indices, window, seed):
    sequences = []
    for i in indices:
        gen = RngStream(seed, int(i)).generator()
        model = models[_pick_component(gen, weights)]
        sequences.append(simulate_thinning(model, window, gen))
    return sequences


def _mixture_label(models, weights):
    if len(models) == 1:
        return models[0].family
    parts = [f"{m.family}={w:.6g}" for m, w in zip(models, weights)]
    return "mixture:" + ",".join(parts)


def make_dataset(models, mixture_weights, count, window, seed, label=None, n_jobs=None):
    """
    Génère `count` séquences, chacune issue d'un modèle choisi selon les poids.

    La séquence i utilise le flux RngStream(seed, i) : le résultat ne dépend
    ni de l'ordre d'exécution ni du nombre de processus.
    """
    if isinstance(models, MixtureModel):
        models, mixture_weights = models.components, models.weights
    elif not isinstance(models, (list, tuple)):
        models, mixture_weights = [models], [1.0]
    models = list(models)
    weights = _check_weights(models, mixture_weights)
    if count < 0:
        raise DomainError(f"nombre de séquences négatif: {count}")

    n_jobs = n_jobs or get_threads()
    indices = np.arange(count)
    if n_jobs > 1 and count > 1:
        chunks = [c for c in np.array_split(indices, n_jobs) if c.size]
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_simulate_chunk)(models, weights, c, window, seed) for c in chunks
        )
        sequences = [s for part in parts for s in part]
    else:
        sequences = _simulate_chunk(models, weights, indices, window, seed)

    label = label or _mixture_label(models, weights)
    dataset = Dataset(window, tuple(sequences), label)
    logger.info(f"✓ {count} séquences simulées ({label}) - taux moyen {dataset.mean_event_rate():.3f}")
    return dataset
