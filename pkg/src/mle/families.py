"""
Objectifs d'estimation par famille
==================================
Chaque famille travaille sur des coordonnées non contraintes (log pour les
paramètres positifs) et fournit la log-vraisemblance moyenne d'un lot
avec son gradient exact :
- IP, SE, SC : dérivées des formes closes
- NN : rétropropagation à travers la récurrence et la quadrature

Les séquences sont complétées par T : un intervalle de longueur nulle
n'ajoute rien au compensateur et ses termes d'événement sont masqués.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, expit

from ..core.errors import DomainError
from ..simulation.intensities import IpParams, NnIntensityParams, ScParams, SeParams, softplus
from .likelihood import expm1_ratio, gauss_legendre

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass
class EventBatch:
    """Temps (B, L + 1) complétés par T ; masque des vrais événements."""

    times: np.ndarray
    mask: np.ndarray
    lengths: np.ndarray
    horizon: float

    @classmethod
    def from_dataset(cls, data):
        if len(data) == 0:
            raise DomainError("jeu de données vide")
        T = data.window.horizon_T
        lengths = data.counts()
        L = int(lengths.max())
        times = np.full((len(data), L + 1), T)
        for b, seq in enumerate(data.sequences):
            times[b, :len(seq)] = seq.times
        mask = np.arange(L + 1)[None, :] < lengths[:, None]
        return cls(times, mask, lengths, T)

    @property
    def size(self):
        return self.times.shape[0]

    def starts(self):
        return np.concatenate([np.zeros((self.size, 1)), self.times[:, :-1]], axis=1)


def _scalar(u, name):
    return float(np.asarray(u[name]).ravel()[0])


# ============================================================
# IP
# ============================================================

class IpFamily:
    """Noyaux gaussiens + plancher : log α, c, log σ, log b0."""

    name = "IP"

    def __init__(self, n_kernels=3):
        if n_kernels < 1:
            raise DomainError(f"au moins un noyau requis (reçu {n_kernels})")
        self.n_kernels = n_kernels

    def initial(self, data, rng=None):
        T = data.window.horizon_T
        K = self.n_kernels
        mean_count = max(float(data.counts().mean()), 1e-3)
        return {
            "log_weights": np.full(K, np.log(_SQRT2 * 0.95 * mean_count / K)),
            "centers": (np.arange(K) + 0.5) * T / K,
            "log_sds": np.full(K, np.log(T / (2.0 * K))),
            "log_baseline": np.array([np.log(0.05 * mean_count / T)]),
        }

    def to_model(self, u):
        return IpParams(np.exp(u["log_weights"]), u["centers"], np.exp(u["log_sds"]),
                        baseline=float(np.exp(_scalar(u, "log_baseline"))))

    def from_model(self, model):
        return {
            "log_weights": np.log(np.maximum(np.asarray(model.weights), 1e-300)),
            "centers": np.asarray(model.centers, dtype=np.float64),
            "log_sds": np.log(np.asarray(model.sds)),
            "log_baseline": np.array([np.log(max(model.baseline, 1e-300))]),
        }

    def value_and_grad(self, u, batch):
        a, c, s = np.exp(u["log_weights"]), u["centers"], np.exp(u["log_sds"])
        b0 = np.exp(_scalar(u, "log_baseline"))
        T, B = batch.horizon, batch.size

        t = batch.times[batch.mask]                           # (N,)
        z = (t[:, None] - c) / s                              # (N, K)
        g = np.exp(-z ** 2) / (_SQRT2PI * s)
        rates = b0 + g @ a
        inv = 1.0 / rates
        d_a = (g * inv[:, None]).sum(axis=0)
        d_c = ((a * g * 2.0 * z / s) * inv[:, None]).sum(axis=0)
        d_s = ((a * g * (2.0 * z ** 2 - 1.0) / s) * inv[:, None]).sum(axis=0)
        d_b0 = inv.sum()

        # compensateur identique pour toutes les séquences
        z_T, z_0 = (T - c) / s, -c / s
        e_T, e_0 = np.exp(-z_T ** 2), np.exp(-z_0 ** 2)
        comp = b0 * T + a @ (erf(z_T) - erf(z_0)) / (2.0 * _SQRT2)
        d_a -= B * (erf(z_T) - erf(z_0)) / (2.0 * _SQRT2)
        d_c -= B * (-a / (_SQRT2PI * s) * (e_T - e_0))
        d_s -= B * (-a / (_SQRT2PI * s) * (z_T * e_T - z_0 * e_0))
        d_b0 -= B * T

        value = (np.log(rates).sum() - B * comp) / B
        grads = {"log_weights": a * d_a / B, "centers": d_c / B, "log_sds": s * d_s / B,
                 "log_baseline": np.array([b0 * d_b0 / B])}
        return float(value), grads


# ============================================================
# SE
# ============================================================

class SeFamily:
    """Hawkes exponentiel : log μ, log β, log ω."""

    name = "SE"

    def initial(self, data, rng=None):
        rate = max(data.mean_event_rate(), 1e-3)
        return {"log_mu": np.array([np.log(0.5 * rate)]), "log_beta": np.array([np.log(0.5)]),
                "log_omega": np.array([0.0])}

    def to_model(self, u):
        return SeParams(np.exp(_scalar(u, "log_mu")), np.exp(_scalar(u, "log_beta")),
                        np.exp(_scalar(u, "log_omega")))

    def from_model(self, model):
        return {"log_mu": np.array([np.log(model.mu)]), "log_beta": np.array([np.log(model.beta)]),
                "log_omega": np.array([np.log(model.omega)])}

    def value_and_grad(self, u, batch):
        mu, beta, omega = (np.exp(_scalar(u, n)) for n in ("log_mu", "log_beta", "log_omega"))
        gaps = batch.times - batch.starts()                  # (B, L + 1)
        B, steps = gaps.shape

        S = np.zeros(B)          # excitation juste après l'événement précédent
        dS = np.zeros(B)         # dS / dω
        log_terms = 0.0
        g_mu = g_beta = g_omega = 0.0
        comp = 0.0
        for j in range(steps):
            gap, m = gaps[:, j], batch.mask[:, j]
            E = np.exp(-omega * gap)
            R = S * E
            dR = dS * E - S * gap * E
            # terme d'événement
            lam = mu + beta * R
            log_terms += np.log(lam[m]).sum()
            g_mu += (1.0 / lam[m]).sum()
            g_beta += (R[m] / lam[m]).sum()
            g_omega += (beta * dR[m] / lam[m]).sum()
            # morceau de compensateur
            one_minus = 1.0 - E
            comp += (mu * gap + beta / omega * S * one_minus).sum()
            g_mu -= gap.sum()
            g_beta -= (S * one_minus).sum() / omega
            g_omega -= (-beta / omega ** 2 * S * one_minus
                        + beta / omega * (dS * one_minus + S * gap * E)).sum()
            S, dS = R + 1.0, dR

        value = (log_terms - comp) / B
        grads = {"log_mu": np.array([mu * g_mu / B]), "log_beta": np.array([beta * g_beta / B]),
                 "log_omega": np.array([omega * g_omega / B])}
        return float(value), grads


# ============================================================
# SC
# ============================================================

def _expm1_ratio_prime(x):
    """Dérivée de expm1(x) / x."""
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    exact = (np.exp(safe) * (safe - 1.0) + 1.0) / safe ** 2
    return np.where(small, 0.5 + x / 3.0 + x ** 2 / 8.0, exact)


class ScFamily:
    """Auto-correcteur : η et γ sans contrainte."""

    name = "SC"

    def initial(self, data, rng=None):
        return {"eta": np.array([0.5]), "gamma": np.array([0.1])}

    def to_model(self, u):
        return ScParams(_scalar(u, "eta"), _scalar(u, "gamma"))

    def from_model(self, model):
        return {"eta": np.array([model.eta]), "gamma": np.array([model.gamma])}

    def value_and_grad(self, u, batch):
        eta, gamma = _scalar(u, "eta"), _scalar(u, "gamma")
        B = batch.size
        starts = batch.starts()
        gaps = batch.times - starts
        counts = np.broadcast_to(np.arange(gaps.shape[1]), gaps.shape)

        t, k = batch.times[batch.mask], counts[batch.mask]
        log_terms = (eta * t - gamma * k).sum()
        g_eta, g_gamma = t.sum(), -k.sum()

        base = np.exp(eta * starts - gamma * counts)
        x = eta * gaps
        pieces = base * gaps * expm1_ratio(x)
        comp = pieces.sum()
        g_eta -= (starts * pieces + base * gaps ** 2 * _expm1_ratio_prime(x)).sum()
        g_gamma -= (-counts * pieces).sum()

        value = (log_terms - comp) / B
        return float(value), {"eta": np.array([g_eta / B]), "gamma": np.array([g_gamma / B])}


# ============================================================
# NN
# ============================================================

class NnFamily:
    """Intensité récurrente ; u0 fixé à `initial_input`, les autres poids sont appris."""

    name = "NN"
    NAMES = ("w_input", "w_hidden", "b_hidden", "v_readout", "v_elapsed", "b_readout")

    def __init__(self, hidden_dim=8, initial_input=0.5, init_scale=0.1):
        if hidden_dim < 1:
            raise DomainError(f"hidden_dim doit être >= 1 (reçu {hidden_dim})")
        self.hidden_dim = hidden_dim
        self.initial_input = initial_input
        self.init_scale = init_scale

    def initial(self, data, rng):
        H, bound = self.hidden_dim, self.init_scale
        rate = max(data.mean_event_rate(), 1e-3)
        return {
            "w_input": rng.uniform(-bound, bound, H),
            "w_hidden": rng.uniform(-bound, bound, (H, H)),
            "b_hidden": rng.uniform(-bound, bound, H),
            "v_readout": rng.uniform(-bound, bound, H),
            "v_elapsed": np.array([0.0]),
            "b_readout": np.array([np.log(np.expm1(rate))]),
        }

    def to_model(self, u):
        return NnIntensityParams(u["w_input"], u["w_hidden"], u["b_hidden"], u["v_readout"],
                                 _scalar(u, "v_elapsed"), _scalar(u, "b_readout"), self.initial_input)

    def from_model(self, model):
        return {"w_input": np.array(model.w_input), "w_hidden": np.array(model.w_hidden),
                "b_hidden": np.array(model.b_hidden), "v_readout": np.array(model.v_readout),
                "v_elapsed": np.array([model.v_elapsed]), "b_readout": np.array([model.b_readout])}

    def value_and_grad(self, u, batch):
        w_in, W, b_h, v = u["w_input"], u["w_hidden"], u["b_hidden"], u["v_readout"]
        v_e, b_o = _scalar(u, "v_elapsed"), _scalar(u, "b_readout")
        nodes, qweights = gauss_legendre()
        B = batch.size
        gaps = batch.times - batch.starts()                   # (B, J)
        J = gaps.shape[1]
        u0 = self.initial_input

        # passe avant
        h0 = np.tanh(w_in * u0 + b_h)
        hs = [np.broadcast_to(h0, (B, self.hidden_dim))]
        for j in range(J - 1):
            hs.append(np.tanh(gaps[:, j, None] * w_in + hs[-1] @ W.T + b_h))

        value = 0.0
        grads = {name: np.zeros_like(np.asarray(u[name], dtype=np.float64)) for name in self.NAMES}
        dh_next = np.zeros((B, self.hidden_dim))
        for j in reversed(range(J)):
            h, gap, m = hs[j], gaps[:, j], batch.mask[:, j]
            proj = h @ v + b_o                               # (B,)
            # événement
            z = proj + v_e * gap
            lam = softplus(z)
            value += np.log(lam[m]).sum()
            g_z = np.where(m, expit(z) / np.where(m, lam, 1.0), 0.0)
            # compensateur : Λ = gap/2 Σ_q w_q softplus(proj + v_e s_q)
            s = gap[:, None] * (nodes + 1.0) / 2.0           # (B, Q)
            y = proj[:, None] + v_e * s
            value -= (gap / 2.0 * (softplus(y) @ qweights)).sum()
            c = gap[:, None] / 2.0 * qweights * expit(y)     # dΛ / dy
            g_proj = g_z - c.sum(axis=1)
            grads["v_readout"] += g_proj @ h
            grads["b_readout"][0] += g_proj.sum()
            grads["v_elapsed"][0] += g_z @ gap - (c * s).sum()
            dh = g_proj[:, None] * v + dh_next
            # récurrence h_j = tanh(w_in gap_{j-1} + W h_{j-1} + b_h)
            if j > 0:
                d_pre = dh * (1.0 - h ** 2)
                grads["w_input"] += d_pre.T @ gaps[:, j - 1]
                grads["w_hidden"] += d_pre.T @ hs[j - 1]
                grads["b_hidden"] += d_pre.sum(axis=0)
                dh_next = d_pre @ W
            else:
                d_pre = (dh * (1.0 - h ** 2)).sum(axis=0)
                grads["w_input"] += d_pre * u0
                grads["b_hidden"] += d_pre

        return float(value / B), {name: g / B for name, g in grads.items()}


def make_family(name, ip_kernels=3, nn_hidden_dim=8):
    if name == "IP":
        return IpFamily(ip_kernels)
    if name == "SE":
        return SeFamily()
    if name == "SC":
        return ScFamily()
    if name == "NN":
        return NnFamily(nn_hidden_dim)
    raise DomainError(f"famille inconnue: {name!r} (IP, SE, SC ou NN)")
