"""
Entraînement WGAN pour processus ponctuels - ppwgan
===================================================
Jeu minimax entre le générateur g_θ (bruit Poisson -> séquence) et la critique f_w :
- critique : minimise  (1/m)Σ f_w(g_θ(ζ)) - (1/m)Σ f_w(ξ) + ν Σ_paires | |Δf| / |ξ - g_θ(ζ)|_⋆ - 1 |
- générateur : minimise -(1/m)Σ f_w(g_θ(ζ))
n_critic pas de critique par pas de générateur, Adam pour les deux réseaux.
"""

import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import linregress
from tqdm import tqdm

from ..config import EVAL_CONFIG, TRAIN_CONFIG
from ..core.errors import DomainError, NumericalError, UsageError
from ..core.rng import RngStream
from ..core.types import Dataset
from ..distance.star_distance import pairwise_star_distances
from ..neural.adam import AdamState, adam_step
from ..neural.checkpoint import Checkpoint, save_checkpoint
from ..neural.rnn import (
    CriticParams,
    GeneratorParams,
    critic_backward,
    critic_forward_batch,
    generator_backward,
    generator_forward_batch,
)
from ..simulation.simulator import simulate_homogeneous

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["iter", "phase", "critic_loss", "penalty_mean", "skipped_pairs", "generator_loss", "wall_ms"]

# Flux aléatoires dérivés de la graine d'entraînement
_STREAM_INIT, _STREAM_NOISE, _STREAM_REAL, _STREAM_PAIRS, _STREAM_EVAL = range(5)


@dataclass
class TrainConfig:
    """Hyperparamètres de l'algorithme d'entraînement (valeurs par défaut : TRAIN_CONFIG)."""

    nu: float = TRAIN_CONFIG["nu"]
    lr: float = TRAIN_CONFIG["lr"]
    beta1: float = TRAIN_CONFIG["beta1"]
    beta2: float = TRAIN_CONFIG["beta2"]
    batch_size: int = TRAIN_CONFIG["batch_size"]
    n_critic: int = TRAIN_CONFIG["n_critic"]
    hidden_dim: int = TRAIN_CONFIG["hidden_dim"]
    max_iters: int = TRAIN_CONFIG["max_iters"]
    lambda_z: float = None  # None : déduit des données
    log_every: int = TRAIN_CONFIG["log_every"]
    eval_every: int = TRAIN_CONFIG["eval_every"]
    eval_samples: int = TRAIN_CONFIG["eval_samples"]
    checkpoint_every: int = TRAIN_CONFIG["checkpoint_every"]
    checkpoint_dir: str = None
    early_stop_window: int = TRAIN_CONFIG["early_stop_window"]
    early_stop_tol: float = TRAIN_CONFIG["early_stop_tol"]
    min_pair_distance: float = TRAIN_CONFIG["min_pair_distance"]
    init_scale: float = TRAIN_CONFIG["init_scale"]
    seed: int = TRAIN_CONFIG["seed"]
    record_wall_time: bool = True
    show_progress: bool = True

    def __post_init__(self):
        if not self.nu >= 0:
            raise UsageError(f"nu doit être >= 0 (reçu {self.nu})")
        if not self.lr > 0:
            raise UsageError(f"lr doit être > 0 (reçu {self.lr})")
        for name in ("beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise UsageError(f"{name} doit être dans [0, 1) (reçu {getattr(self, name)})")
        for name in ("batch_size", "n_critic", "hidden_dim"):
            if int(getattr(self, name)) < 1:
                raise UsageError(f"{name} doit être un entier >= 1 (reçu {getattr(self, name)})")
        for name in ("max_iters", "log_every", "eval_every", "checkpoint_every", "early_stop_window", "eval_samples"):
            if int(getattr(self, name)) < 0:
                raise UsageError(f"{name} doit être >= 0 (reçu {getattr(self, name)})")
        if self.lambda_z is not None and not self.lambda_z > 0:
            raise UsageError(f"lambda_z doit être > 0 (reçu {self.lambda_z})")

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise UsageError(f"paramètres d'entraînement inconnus: {sorted(unknown)}")
        return cls(**values)

    def to_dict(self):
        return asdict(self)


# ============================================================
# Briques de l'objectif
# ============================================================

def infer_noise_rate(data):
    """λ_z = taux d'événements moyen des données réelles."""
    if len(data) == 0:
        raise DomainError("jeu de données vide: taux de bruit indéfini")
    rate = data.mean_event_rate()
    if rate <= 0:
        raise DomainError("aucun événement dans les données: taux de bruit nul")
    return rate


@dataclass
class CriticLoss:
    value: float
    penalty: float
    penalty_mean: float
    skipped_pairs: int
    n_pairs: int
    grads: CriticParams = None


def critic_loss(w, real_batch, fake_batch, nu, window, rng=None, pairing=None,
                min_pair_distance=TRAIN_CONFIG["min_pair_distance"], with_grad=True):
    """
    Perte de la critique avec pénalité de Lipschitz directe.

    Les paires (réel i, généré pairing[i]) forment une bijection entre les deux lots,
    tirée avec `rng` si `pairing` n'est pas fourni (identité sinon).
    Les paires à distance ⋆ < min_pair_distance sont ignorées et comptées.

    Returns:
        CriticLoss (value, penalty, penalty_mean, skipped_pairs, n_pairs, grads)
    """
    m = len(real_batch)
    if m == 0 or m != len(fake_batch):
        raise DomainError(f"lots réel/généré de tailles {m} et {len(fake_batch)} (égales et > 0 attendues)")
    if pairing is None:
        pairing = rng.permutation(m) if rng is not None else np.arange(m)
    pairing = np.asarray(pairing, dtype=np.int64)
    if sorted(pairing.tolist()) != list(range(m)):
        raise DomainError("l'appariement doit être une permutation du lot")

    f_real, trace_real = critic_forward_batch(w, real_batch)
    f_fake, trace_fake = critic_forward_batch(w, fake_batch)

    distances = np.array([d for _, _, d in
                          pairwise_star_distances(real_batch, [fake_batch[j] for j in pairing], window, paired=True)])
    kept = distances >= min_pair_distance
    diff = f_real - f_fake[pairing]
    ratio = np.zeros(m)
    ratio[kept] = np.abs(diff[kept]) / distances[kept]
    terms = np.where(kept, np.abs(ratio - 1.0), 0.0)
    penalty = float(terms.sum())
    n_kept = int(kept.sum())

    value = float(f_fake.mean() - f_real.mean() + nu * penalty)
    if not np.isfinite(value):
        raise NumericalError(f"perte de la critique non finie ({value})")
    result = CriticLoss(value, penalty, penalty / n_kept if n_kept else 0.0, m - n_kept, m)
    if not with_grad:
        return result

    # d|r - 1| / d f_real[i] = sign(r - 1) sign(diff) / d
    d_pair = np.zeros(m)
    d_pair[kept] = np.sign(ratio[kept] - 1.0) * np.sign(diff[kept]) / distances[kept]
    up_real = -np.ones(m) / m + nu * d_pair
    up_fake = np.ones(m) / m
    np.subtract.at(up_fake, pairing, nu * d_pair)

    g_real, _ = critic_backward(w, trace_real, up_real)
    g_fake, _ = critic_backward(w, trace_fake, up_fake)
    result.grads = CriticParams.from_dict({k: g_real.as_dict()[k] + g_fake.as_dict()[k] for k in g_real.as_dict()})
    return result


def generator_loss(theta, w, zetas, window):
    """-(1/m) Σ f_w(g_θ(ζ)) et son gradient par rapport à θ (à travers la critique)."""
    m = len(zetas)
    if m == 0:
        raise DomainError("lot de bruit vide")
    fakes, g_trace = generator_forward_batch(theta, zetas, window)
    values, c_trace = critic_forward_batch(w, fakes)
    loss = float(-values.mean())
    if not np.isfinite(loss):
        raise NumericalError(f"perte du générateur non finie ({loss})")
    _, d_times = critic_backward(w, c_trace, -np.ones(m) / m)
    return loss, generator_backward(theta, g_trace, d_times), fakes


def sample_noise(noise_rate, count, window, gen):
    return [simulate_homogeneous(noise_rate, window, gen) for _ in range(count)]


def sample_generator(theta, noise_rate, count, window, seed, batch_size=256):
    """Dataset de `count` séquences générées ; la séquence i utilise le bruit RngStream(seed, i)."""
    sequences = []
    for start in range(0, count, batch_size):
        zetas = [simulate_homogeneous(noise_rate, window, RngStream(seed, i))
                 for i in range(start, min(count, start + batch_size))]
        outputs, _ = generator_forward_batch(theta, zetas, window)
        sequences.extend(outputs)
    return Dataset(window, tuple(sequences), "WGAN")


# ============================================================
# Boucle d'entraînement
# ============================================================

@dataclass
class TrainingResult:
    generator: GeneratorParams
    critic: CriticParams
    noise_rate: float
    window: object
    log: pd.DataFrame
    evaluations: list = field(default_factory=list)
    iterations: int = 0
    stopped_early: bool = False

    def checkpoint(self):
        return Checkpoint(self.generator, self.critic, self.noise_rate, self.window, self.iterations)

    def write_log(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.log.to_csv(path, index=False)
        return path


class WganTrainer:
    """État d'entraînement : paramètres, moments Adam et flux aléatoires."""

    def __init__(self, data, cfg=None):
        self.data = data
        self.cfg = cfg or TrainConfig()
        self.window = data.window
        self.noise_rate = self.cfg.lambda_z or infer_noise_rate(data)

        init_gen = RngStream(self.cfg.seed, _STREAM_INIT).generator()
        k = self.cfg.hidden_dim
        self.theta = GeneratorParams.initialize(k, init_gen, self.cfg.init_scale)
        self.w = CriticParams.initialize(k, init_gen, self.cfg.init_scale)
        adam = dict(lr=self.cfg.lr, beta1=self.cfg.beta1, beta2=self.cfg.beta2)
        self.theta_adam = AdamState.for_params(self.theta, **adam)
        self.w_adam = AdamState.for_params(self.w, **adam)

        self.noise_gen = RngStream(self.cfg.seed, _STREAM_NOISE).generator()
        self.real_gen = RngStream(self.cfg.seed, _STREAM_REAL).generator()
        self.pair_gen = RngStream(self.cfg.seed, _STREAM_PAIRS).generator()
        self.iteration = 0
        self.rows = []
        self.evaluations = []
        self._critic_means = []

    # --- pas élémentaires ---

    def _real_batch(self):
        n, m = len(self.data), self.cfg.batch_size
        idx = self.real_gen.choice(n, size=m, replace=n < m)
        return [self.data.sequences[i] for i in idx]

    def _row(self, phase, start, **values):
        wall = (time.perf_counter() - start) * 1000.0 if self.cfg.record_wall_time else 0.0
        row = {"iter": self.iteration, "phase": phase, "critic_loss": np.nan, "penalty_mean": np.nan,
               "skipped_pairs": np.nan, "generator_loss": np.nan, "wall_ms": round(wall, 3)}
        row.update(values)
        self.rows.append(row)

    def critic_step(self):
        """Un pas d'Adam sur w ; θ n'est pas modifié."""
        start = time.perf_counter()
        real = self._real_batch()
        zetas = sample_noise(self.noise_rate, self.cfg.batch_size, self.window, self.noise_gen)
        fakes, _ = generator_forward_batch(self.theta, zetas, self.window)
        loss = critic_loss(self.w, real, fakes, self.cfg.nu, self.window, rng=self.pair_gen,
                           min_pair_distance=self.cfg.min_pair_distance)
        self.w, self.w_adam = adam_step(self.w, loss.grads, self.w_adam)
        self.w.check()
        self._row("critic", start, critic_loss=loss.value, penalty_mean=loss.penalty_mean,
                  skipped_pairs=loss.skipped_pairs)
        return loss

    def generator_step(self):
        """Un pas d'Adam sur θ ; w n'est pas modifié."""
        start = time.perf_counter()
        zetas = sample_noise(self.noise_rate, self.cfg.batch_size, self.window, self.noise_gen)
        loss, grads, _ = generator_loss(self.theta, self.w, zetas, self.window)
        self.theta, self.theta_adam = adam_step(self.theta, grads, self.theta_adam)
        self.theta.check()
        self._row("generator", start, generator_loss=loss)
        return loss

    # --- suivi ---

    def evaluate(self):
        """Écart d'intensité empirique entre les données et un échantillon généré."""
        from ..evaluation.metrics import empirical_intensity, intensity_deviation

        seed = int(RngStream(self.cfg.seed, _STREAM_EVAL).generator().integers(2**32)) + self.iteration
        generated = sample_generator(self.theta, self.noise_rate, self.cfg.eval_samples, self.window, seed)
        dt = EVAL_CONFIG["bin_width"]
        deviation = intensity_deviation(empirical_intensity(self.data, dt), empirical_intensity(generated, dt))
        self.evaluations.append({"iter": self.iteration, "intensity_deviation": deviation})
        logger.info(f"  itération {self.iteration}: écart d'intensité {deviation:.4f}")
        return deviation

    def _should_stop(self):
        window = self.cfg.early_stop_window
        if window < 2 or len(self._critic_means) < window:
            return False
        recent = self._critic_means[-window:]
        return abs(linregress(np.arange(window), recent).slope) < self.cfg.early_stop_tol

    def save(self, name):
        if self.cfg.checkpoint_dir is None:
            return None
        return save_checkpoint(Path(self.cfg.checkpoint_dir) / name, self.result().checkpoint())

    def result(self, stopped_early=False):
        log = pd.DataFrame(self.rows, columns=LOG_COLUMNS)
        return TrainingResult(self.theta, self.w, self.noise_rate, self.window, log,
                              list(self.evaluations), self.iteration, stopped_early)

    # --- boucle principale ---

    def train(self):
        cfg = self.cfg
        logger.info(f"Entraînement WGAN: {len(self.data)} séquences, λ_z={self.noise_rate:.4f}, "
                    f"k={cfg.hidden_dim}, m={cfg.batch_size}, n_critic={cfg.n_critic}, {cfg.max_iters} itérations")
        stopped_early = False
        progress = tqdm(range(cfg.max_iters), desc="WGAN", disable=not cfg.show_progress)
        try:
            for _ in progress:
                self.iteration += 1
                losses = [self.critic_step().value for _ in range(cfg.n_critic)]
                g_loss = self.generator_step()
                self._critic_means.append(float(np.mean(losses)))

                if cfg.log_every and self.iteration % cfg.log_every == 0:
                    logger.info(f"  itération {self.iteration}: critique {self._critic_means[-1]:.4f}, "
                                f"générateur {g_loss:.4f}")
                if cfg.eval_every and cfg.eval_samples and self.iteration % cfg.eval_every == 0:
                    self.evaluate()
                if cfg.checkpoint_every and self.iteration % cfg.checkpoint_every == 0:
                    self.save(f"wgan_iter{self.iteration}.json")
                if self._should_stop():
                    logger.info(f"✓ Arrêt anticipé à l'itération {self.iteration} (pente de la perte critique "
                                f"< {cfg.early_stop_tol})")
                    stopped_early = True
                    break
        except NumericalError as e:
            self.save(f"wgan_abort_iter{self.iteration}.json")
            logger.error(f"✗ Divergence à l'itération {self.iteration}: {e}")
            raise NumericalError(f"itération {self.iteration}: {e}") from e
        finally:
            progress.close()

        logger.info(f"✓ Entraînement terminé après {self.iteration} itérations")
        return self.result(stopped_early)


def train(data, cfg=None):
    """
    Entraîne le WGAN sur un jeu de données.

    Args:
        data (Dataset): séquences réelles
        cfg (TrainConfig)

    Returns:
        TrainingResult (générateur entraîné, critique, journal)
    """
    return WganTrainer(data, cfg).train()
