"""
Réseaux récurrents du WGAN - ppwgan
===================================
Générateur g_θ : séquence de bruit ζ -> séquence générée, même longueur
    h_i = tanh(A_h z_i + B_h h_{i-1} + b_h)
    x_i = tanh(B_x h_i + b_x),  t_i = T (x_i + 1) / 2, puis tri
Critique f_w : séquence -> réel
    h_i = tanh(A_h t_i + B_h h_{i-1} + b_h)
    a_i = tanh(B_a h_i + b_a),  f_w(ρ) = Σ a_i

Passes avant/arrière vectorisées sur un lot complété par des zéros (masque de longueur).
La rétropropagation dans le temps est exacte ; le tri du générateur est traversé
avec la permutation effectivement choisie.
"""

from dataclasses import dataclass, fields

import numpy as np

from ..core.errors import DomainError, NumericalError
from ..core.types import validate_sequence


# ============================================================
# Paramètres
# ============================================================

class _RnnParams:
    """Comportement commun : (dé)sérialisation en dictionnaire de tableaux."""

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, arrays):
        return cls(**{f.name: np.array(arrays[f.name], dtype=np.float64) for f in fields(cls)})

    @property
    def hidden_dim(self):
        return self.B_h.shape[0]

    @classmethod
    def shapes(cls, k):
        names = [f.name for f in fields(cls)]
        return dict(zip(names, [(k, 1), (k, k), (k,), (1, k), (1,)]))

    @classmethod
    def initialize(cls, k, rng, scale=0.1):
        """Uniforme sur [-scale/√k, scale/√k]."""
        if k < 1:
            raise DomainError(f"hidden_dim doit être >= 1 (reçu {k})")
        bound = scale / np.sqrt(k)
        return cls(**{name: rng.uniform(-bound, bound, shape) for name, shape in cls.shapes(k).items()})

    @classmethod
    def zeros(cls, k):
        return cls(**{name: np.zeros(shape) for name, shape in cls.shapes(k).items()})

    def check(self):
        k = self.hidden_dim
        for name, shape in self.shapes(k).items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise DomainError(f"{type(self).__name__}.{name}: forme {arr.shape}, attendu {shape}")
            if not np.all(np.isfinite(arr)):
                raise NumericalError(f"{type(self).__name__}.{name}: valeurs non finies")
        return self


@dataclass
class GeneratorParams(_RnnParams):
    A_h: np.ndarray
    B_h: np.ndarray
    b_h: np.ndarray
    B_x: np.ndarray
    b_x: np.ndarray


@dataclass
class CriticParams(_RnnParams):
    A_h: np.ndarray
    B_h: np.ndarray
    b_h: np.ndarray
    B_a: np.ndarray
    b_a: np.ndarray


# ============================================================
# Lots
# ============================================================

def pad_batch(sequences):
    """Empile des séquences de longueurs variables : (temps (B, L), masque (B, L), longueurs)."""
    arrays = [np.asarray(getattr(s, "times", s), dtype=np.float64).ravel() for s in sequences]
    lengths = np.array([a.size for a in arrays], dtype=np.int64)
    L = int(lengths.max()) if lengths.size else 0
    times = np.zeros((len(arrays), L))
    for b, a in enumerate(arrays):
        times[b, :a.size] = a
    mask = np.arange(L)[None, :] < lengths[:, None]
    return times, mask, lengths


@dataclass
class GeneratorTrace:
    inputs: np.ndarray      # (B, L) bruit ζ
    mask: np.ndarray        # (B, L)
    lengths: np.ndarray     # (B,)
    hidden: np.ndarray      # (L + 1, B, k), hidden[0] = h0 = 0
    squashed: np.ndarray    # (B, L) sorties tanh avant mise à l'échelle
    raw_times: np.ndarray   # (B, L) temps avant tri
    orders: list            # permutation de tri par séquence
    horizon: float


@dataclass
class CriticTrace:
    inputs: np.ndarray
    mask: np.ndarray
    hidden: np.ndarray
    outputs: np.ndarray     # (B, L) a_i


def _recurrence(params, inputs):
    B, L = inputs.shape
    k = params.hidden_dim
    hidden = np.zeros((L + 1, B, k))
    A = params.A_h[:, 0]
    h = hidden[0]
    for i in range(L):
        h = np.tanh(inputs[:, i, None] * A + h @ params.B_h.T + params.b_h)
        hidden[i + 1] = h
    return hidden


# ============================================================
# Générateur
# ============================================================

def generator_forward_batch(theta, zetas, window):
    """
    Transforme un lot de séquences de bruit.

    Returns:
        (liste d'EventSequence, GeneratorTrace)
    """
    inputs, mask, lengths = pad_batch(zetas)
    hidden = _recurrence(theta, inputs)
    squashed = np.tanh(hidden[1:] @ theta.B_x[0] + theta.b_x[0]).T
    if not np.all(np.isfinite(squashed)):
        raise NumericalError("activation non finie dans le générateur")
    T = window.horizon_T
    # tanh peut valoir exactement ±1 en flottant : on reste dans [0, T)
    raw = np.clip(T * (squashed + 1.0) / 2.0, 0.0, np.nextafter(T, 0.0))

    outputs, orders = [], []
    for b, n in enumerate(lengths):
        r = raw[b, :n]
        order = np.argsort(r, kind="stable")
        orders.append(order)
        outputs.append(validate_sequence(r[order], window, quiet=True))
    trace = GeneratorTrace(inputs, mask, lengths, hidden, squashed, raw, orders, T)
    return outputs, trace


def generator_forward(theta, zeta, window):
    """g_θ(ζ) pour une seule séquence."""
    outputs, _ = generator_forward_batch(theta, [zeta], window)
    return outputs[0]


def generator_backward(theta, trace, grad_sorted):
    """
    Gradient d'une perte par rapport à θ.

    Args:
        theta (GeneratorParams)
        trace (GeneratorTrace): passe avant correspondante
        grad_sorted: (B, L) gradient de la perte par rapport aux temps générés triés

    Returns:
        GeneratorParams des gradients
    """
    grad_sorted = np.asarray(grad_sorted, dtype=np.float64)
    B, L = trace.inputs.shape
    if grad_sorted.shape != (B, L):
        raise DomainError(f"gradient amont de forme {grad_sorted.shape}, attendu {(B, L)}")

    grad_raw = np.zeros((B, L))
    for b, order in enumerate(trace.orders):
        grad_raw[b, order] = grad_sorted[b, :order.size]
    grad_raw *= trace.mask

    d_pre_x = grad_raw * (trace.horizon / 2.0) * (1.0 - trace.squashed ** 2)   # (B, L)
    grads = GeneratorParams.zeros(theta.hidden_dim)
    dh_next = np.zeros((B, theta.hidden_dim))
    for i in reversed(range(L)):
        h, h_prev = trace.hidden[i + 1], trace.hidden[i]
        grads.B_x[0] += d_pre_x[:, i] @ h
        grads.b_x[0] += d_pre_x[:, i].sum()
        dh = d_pre_x[:, i, None] * theta.B_x[0] + dh_next
        d_pre = dh * (1.0 - h ** 2)
        grads.A_h[:, 0] += d_pre.T @ trace.inputs[:, i]
        grads.B_h += d_pre.T @ h_prev
        grads.b_h += d_pre.sum(axis=0)
        dh_next = d_pre @ theta.B_h
    return grads


# ============================================================
# Critique
# ============================================================

def critic_forward_batch(w, sequences):
    """f_w sur un lot ; retourne (valeurs (B,), CriticTrace)."""
    inputs, mask, _ = pad_batch(sequences)
    hidden = _recurrence(w, inputs)
    outputs = np.tanh(hidden[1:] @ w.B_a[0] + w.b_a[0]).T
    values = (outputs * mask).sum(axis=1)
    if not np.all(np.isfinite(values)):
        raise NumericalError("valeur non finie dans la critique")
    return values, CriticTrace(inputs, mask, hidden, outputs)


def critic_forward(w, rho):
    values, _ = critic_forward_batch(w, [rho])
    return float(values[0])


def critic_backward(w, trace, upstream):
    """
    Gradient de Σ_b upstream[b] · f_w(ρ_b).

    Returns:
        (CriticParams des gradients, gradient par rapport aux temps d'entrée (B, L))
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    B, L = trace.inputs.shape
    if upstream.shape != (B,):
        raise DomainError(f"gradient amont de forme {upstream.shape}, attendu {(B,)}")

    d_pre_a = upstream[:, None] * trace.mask * (1.0 - trace.outputs ** 2)
    grads = CriticParams.zeros(w.hidden_dim)
    A = w.A_h[:, 0]
    d_inputs = np.zeros((B, L))
    dh_next = np.zeros((B, w.hidden_dim))
    for i in reversed(range(L)):
        h, h_prev = trace.hidden[i + 1], trace.hidden[i]
        grads.B_a[0] += d_pre_a[:, i] @ h
        grads.b_a[0] += d_pre_a[:, i].sum()
        dh = d_pre_a[:, i, None] * w.B_a[0] + dh_next
        d_pre = dh * (1.0 - h ** 2)
        grads.A_h[:, 0] += d_pre.T @ trace.inputs[:, i]
        grads.B_h += d_pre.T @ h_prev
        grads.b_h += d_pre.sum(axis=0)
        d_inputs[:, i] = d_pre @ A
        dh_next = d_pre @ w.B_h
    return grads, d_inputs * trace.mask
