"""Optimiseur Adam partagé par le WGAN et les baselines MLE."""

from dataclasses import dataclass

import numpy as np

from ..core.errors import DomainError


def _as_dict(params):
    return params.as_dict() if hasattr(params, "as_dict") else dict(params)


def _rebuild(template, arrays):
    return type(template).from_dict(arrays) if hasattr(template, "from_dict") else arrays


@dataclass
class AdamState:
    """Moments d'ordre 1 et 2 + compteur de pas ; hyperparamètres α, β1, β2, ε."""

    m: dict
    v: dict
    step: int = 0
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, lr=1e-4, beta1=0.5, beta2=0.9, eps=1e-8):
        arrays = _as_dict(params)
        return cls(
            m={k: np.zeros_like(a, dtype=np.float64) for k, a in arrays.items()},
            v={k: np.zeros_like(a, dtype=np.float64) for k, a in arrays.items()},
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_step(params, grads, state):
    """
    Un pas de descente Adam avec correction de biais.

    Args:
        params: GeneratorParams / CriticParams ou dict de tableaux
        grads: même structure que params
        state (AdamState)

    Returns:
        (nouveaux paramètres, nouvel état) ; les entrées ne sont pas modifiées
    """
    p, g = _as_dict(params), _as_dict(grads)
    if p.keys() != state.m.keys() or p.keys() != g.keys():
        raise DomainError("structure des paramètres, gradients et moments incohérente")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m, v, updated = {}, {}, {}
    for name, value in p.items():
        grad = np.asarray(g[name], dtype=np.float64)
        if grad.shape != value.shape or state.m[name].shape != value.shape:
            raise DomainError(f"{name}: forme du gradient {grad.shape} != {value.shape}")
        m[name] = b1 * state.m[name] + (1.0 - b1) * grad
        v[name] = b2 * state.v[name] + (1.0 - b2) * grad ** 2
        m_hat = m[name] / (1.0 - b1 ** step)
        v_hat = v[name] / (1.0 - b2 ** step)
        updated[name] = value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)

    new_state = AdamState(m, v, step, state.lr, state.beta1, state.beta2, state.eps)
    return _rebuild(params, updated), new_state
