"""
Familles d'intensité conditionnelle - ppwgan
============================================
Quatre familles paramétriques :
- IP : Poisson inhomogène, somme de k noyaux gaussiens (+ plancher constant optionnel)
- SE : auto-excitant (Hawkes) à noyau exponentiel g(t) = exp(-ω t)
- SC : auto-correcteur, λ(t) = exp(η t - γ N(t-))
- NN : intensité récurrente, λ(t) = softplus(v·h + v_e (t - t_dernier) + b_o)

Plus MixtureModel, qui décrit un mélange de ces familles (jeux de données mixtes).
"""

import logging
import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from ..core.errors import DomainError
from ..core.rng import RngStream

logger = logging.getLogger(__name__)

FAMILIES = ("IP", "SE", "SC", "NN")


def softplus(z):
    return np.logaddexp(0.0, z)


# ============================================================
# Paramètres des familles
# ============================================================

@dataclass(frozen=True)
class IpParams:
    """Poisson inhomogène à k noyaux gaussiens."""

    weights: tuple
    centers: tuple
    sds: tuple
    baseline: float = 0.0

    family = "IP"

    def __post_init__(self):
        for name in ("weights", "centers", "sds"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "baseline", float(self.baseline))
        k = len(self.weights)
        if k < 1 or len(self.centers) != k or len(self.sds) != k:
            raise DomainError(f"IP: weights/centers/sds doivent avoir la même longueur k >= 1 (reçu {k}, "
                              f"{len(self.centers)}, {len(self.sds)})")
        values = self.weights + self.centers + self.sds + (self.baseline,)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("IP: paramètres non finis")
        if any(s <= 0 for s in self.sds):
            raise DomainError(f"IP: écarts-types strictement positifs requis, reçu {self.sds}")
        if any(a < 0 for a in self.weights) or self.baseline < 0:
            raise DomainError("IP: poids et plancher doivent être positifs ou nuls")

    @property
    def k(self):
        return len(self.weights)

    def rate(self, t):
        """Intensité vectorisée (indépendante de l'historique)."""
        t = np.asarray(t, dtype=np.float64)
        a = np.asarray(self.weights)
        c = np.asarray(self.centers)
        s = np.asarray(self.sds)
        z = (t[..., None] - c) / s
        dens = a / np.sqrt(2.0 * np.pi * s ** 2) * np.exp(-z ** 2)
        return self.baseline + dens.sum(axis=-1)


@dataclass(frozen=True)
class SeParams:
    """Hawkes : λ(t) = μ + β Σ exp(-ω (t - ti))."""

    mu: float
    beta: float
    omega: float

    family = "SE"

    def __post_init__(self):
        for name in ("mu", "beta", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"SE: {name} non fini")
            object.__setattr__(self, name, value)
        if self.mu < 0 or self.beta < 0:
            raise DomainError(f"SE: mu et beta doivent être >= 0 (mu={self.mu}, beta={self.beta})")
        if self.omega <= 0:
            raise DomainError(f"SE: omega doit être > 0 (reçu {self.omega})")
        if self.beta / self.omega >= 1.0:
            logger.warning(f"⚠ SE instable: β/ω = {self.beta / self.omega:.3f} >= 1")


@dataclass(frozen=True)
class ScParams:
    """Auto-correcteur : λ(t) = exp(η t - γ N(t-))."""

    eta: float
    gamma: float

    family = "SC"

    def __post_init__(self):
        for name in ("eta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"SC: {name} non fini")
            object.__setattr__(self, name, value)


@dataclass(frozen=True, eq=False)
class NnIntensityParams:
    """
    Intensité récurrente.

    L'état caché est mis à jour à chaque événement à partir de l'écart inter-événements :
        h <- tanh(w_input * Δ + w_hidden @ h + b_hidden)
    avec h0 = tanh(w_input * initial_input + b_hidden).
    """

    w_input: np.ndarray
    w_hidden: np.ndarray
    b_hidden: np.ndarray
    v_readout: np.ndarray
    v_elapsed: float
    b_readout: float
    initial_input: float = 0.5

    family = "NN"

    def __post_init__(self):
        arrays = {}
        for name in ("w_input", "w_hidden", "b_hidden", "v_readout"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            arrays[name] = arr
        H = arrays["w_input"].shape[0] if arrays["w_input"].ndim == 1 else -1
        expected = {"w_input": (H,), "w_hidden": (H, H), "b_hidden": (H,), "v_readout": (H,)}
        if H < 1 or any(arrays[n].shape != s for n, s in expected.items()):
            raise DomainError(f"NN: formes incohérentes {[(n, a.shape) for n, a in arrays.items()]}")
        for name, arr in arrays.items():
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"NN: {name} non fini")
            object.__setattr__(self, name, arr)
        for name in ("v_elapsed", "b_readout", "initial_input"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"NN: {name} non fini")
            object.__setattr__(self, name, value)

    @property
    def hidden_dim(self):
        return self.w_input.shape[0]

    def initial_state(self):
        return np.tanh(self.w_input * self.initial_input + self.b_hidden)

    def update(self, h, gap):
        return np.tanh(self.w_input * gap + self.w_hidden @ h + self.b_hidden)

    def readout(self, h, elapsed):
        return softplus(float(self.v_readout @ h) + self.v_elapsed * elapsed + self.b_readout)


@dataclass(frozen=True)
class MixtureModel:
    """Mélange de familles, chaque séquence provenant d'une composante tirée selon les poids."""

    components: tuple
    weights: tuple = ()

    family = "MIX"

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise DomainError("mélange vide: au moins un modèle est requis")
        weights = tuple(float(w) for w in self.weights) or tuple([1.0 / len(components)] * len(components))
        if len(weights) != len(components):
            raise DomainError(f"{len(weights)} poids pour {len(components)} composantes")
        if any(w < 0 or not math.isfinite(w) for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
            raise DomainError(f"les poids doivent former un simplexe (somme = {sum(weights)!r})")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "weights", weights)

    @property
    def label(self):
        return "+".join(m.family for m in self.components)


# ============================================================
# Intensité conditionnelle λ(t | historique)
# ============================================================

@singledispatch
def _rate(model, t, history):
    raise DomainError(f"famille d'intensité inconnue: {type(model).__name__}")


@_rate.register
def _(model: IpParams, t, history):
    return float(model.rate(t))


@_rate.register
def _(model: SeParams, t, history):
    if history.size == 0:
        return model.mu
    return model.mu + model.beta * float(np.exp(-model.omega * (t - history)).sum())


@_rate.register
def _(model: ScParams, t, history):
    return float(np.exp(model.eta * t - model.gamma * history.size))


@_rate.register
def _(model: NnIntensityParams, t, history):
    h = model.initial_state()
    last = 0.0
    for ti in history:
        h = model.update(h, ti - last)
        last = ti
    return float(model.readout(h, t - last))


def intensity_at(model, t, history, window):
    """
    λ(t | historique) pour l'une des quatre familles.

    Args:
        model: IpParams | SeParams | ScParams | NnIntensityParams
        t (float): instant d'évaluation, 0 <= t < T
        history: EventSequence ou tableau ; seuls les événements < t sont utilisés
        window (Window)

    Returns:
        float >= 0
    """
    if isinstance(model, MixtureModel):
        raise DomainError("l'intensité d'un mélange n'est pas définie conditionnellement")
    if not window.contains(t):
        raise DomainError(f"t={t} hors de la fenêtre [0, {window.horizon_T})")
    hist = np.asarray(getattr(history, "times", history), dtype=np.float64).ravel()
    hist = hist[hist < t]
    return _rate(model, float(t), hist)


# ============================================================
# Construction / sérialisation
# ============================================================

def random_nn_intensity(hidden_dim, seed, scale=0.5, target_rate=2.0):
    """
    Vérité terrain NN : poids tirés au hasard puis figés.

    L'entrée initiale u0 ~ U[0,1] est tirée une fois et fait partie des paramètres.
    """
    if hidden_dim < 1:
        raise DomainError(f"hidden_dim doit être >= 1 (reçu {hidden_dim})")
    rng = RngStream(seed, 0).generator()
    bound = scale / np.sqrt(hidden_dim)
    return NnIntensityParams(
        w_input=rng.uniform(-1.0, 1.0, hidden_dim),
        w_hidden=rng.uniform(-bound, bound, (hidden_dim, hidden_dim)),
        b_hidden=rng.uniform(-0.5, 0.5, hidden_dim),
        v_readout=rng.uniform(-1.0, 1.0, hidden_dim),
        v_elapsed=float(rng.uniform(-0.1, 0.1)),
        b_readout=float(np.log(np.expm1(target_rate))),
        initial_input=float(rng.uniform(0.0, 1.0)),
    )


def default_model(family, config=None):
    """Modèle avec les paramètres publiés (SIMULATION_CONFIG)."""
    from ..config import SIMULATION_CONFIG

    cfg = config or SIMULATION_CONFIG
    if family == "IP":
        return IpParams(**cfg["ip"])
    if family == "IP_SPREAD":
        return IpParams(**cfg["ip_spread"])
    if family == "SE":
        return SeParams(**cfg["se"])
    if family == "SC":
        return ScParams(**cfg["sc"])
    if family == "NN":
        return random_nn_intensity(cfg["nn"]["hidden_dim"], cfg["nn"]["seed"])
    if "+" in family:
        return MixtureModel(tuple(default_model(f, cfg) for f in family.split("+")))
    raise DomainError(f"famille inconnue: {family!r}")


def model_to_dict(model):
    if isinstance(model, IpParams):
        params = {"weights": list(model.weights), "centers": list(model.centers),
                  "sds": list(model.sds), "baseline": model.baseline}
    elif isinstance(model, SeParams):
        params = {"mu": model.mu, "beta": model.beta, "omega": model.omega}
    elif isinstance(model, ScParams):
        params = {"eta": model.eta, "gamma": model.gamma}
    elif isinstance(model, NnIntensityParams):
        params = {
            "hidden_dim": model.hidden_dim,
            "w_input": model.w_input.tolist(),
            "w_hidden": model.w_hidden.tolist(),
            "b_hidden": model.b_hidden.tolist(),
            "v_readout": model.v_readout.tolist(),
            "v_elapsed": model.v_elapsed,
            "b_readout": model.b_readout,
            "initial_input": model.initial_input,
        }
    elif isinstance(model, MixtureModel):
        return {"family": "MIX", "components": [model_to_dict(m) for m in model.components],
                "weights": list(model.weights)}
    else:
        raise DomainError(f"modèle non sérialisable: {type(model).__name__}")
    return {"family": model.family, "params": params}


def model_from_dict(data, path="model"):
    """Inverse de model_to_dict ; `path` sert à localiser l'erreur dans un fichier de config."""
    if not isinstance(data, dict) or "family" not in data:
        raise DomainError(f"{path}: objet avec un champ 'family' attendu")
    family = data["family"]
    if family == "MIX":
        components = data.get("components")
        if not isinstance(components, list):
            raise DomainError(f"{path}.components: liste attendue")
        models = tuple(model_from_dict(c, f"{path}.components[{i}]") for i, c in enumerate(components))
        return MixtureModel(models, tuple(data.get("weights", ())))
    params = data.get("params")
    if params is None:
        return default_model(family)
    if not isinstance(params, dict):
        raise DomainError(f"{path}.params: objet attendu")
    builders = {"IP": IpParams, "SE": SeParams, "SC": ScParams}
    try:
        if family in builders:
            return builders[family](**params)
        if family == "NN":
            params = {k: v for k, v in params.items() if k != "hidden_dim"}
            return NnIntensityParams(**params)
    except TypeError as e:
        raise DomainError(f"{path}.params: {e}") from e
    except DomainError as e:
        raise DomainError(f"{path}.params: {e}") from e
    raise DomainError(f"{path}.family: famille inconnue {family!r}")
