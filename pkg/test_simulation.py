"""
Tests du module simulation : familles d'intensité, amincissement, jeux de données
"""

import logging
import os
import sys

import numpy as np
import pytest
from scipy import integrate, stats

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from src.core import DomainError, RngStream, Window
from src.evaluation.metrics import pooled_increments
from src.mle.likelihood import total_compensator
from src.simulation import (
    IpParams,
    MixtureModel,
    ScParams,
    SeParams,
    default_model,
    intensity_at,
    make_dataset,
    mixture_assignments,
    model_from_dict,
    model_to_dict,
    random_nn_intensity,
    simulate_homogeneous,
    simulate_thinning,
)

W15 = Window(15.0)


# ============================================================
# Intensités
# ============================================================

def test_se_intensity_with_history():
    model = SeParams(1.0, 0.8, 1.0)
    assert intensity_at(model, 2.0, [1.0], W15) == pytest.approx(1.0 + 0.8 * np.exp(-1.0))


def test_history_after_t_is_ignored():
    model = SeParams(1.0, 0.8, 1.0)
    assert intensity_at(model, 2.0, [1.0, 3.0], W15) == intensity_at(model, 2.0, [1.0], W15)


def test_sc_intensity_drops_with_events():
    model = ScParams(1.0, 0.2)
    assert intensity_at(model, 1.0, [0.2, 0.5], W15) == pytest.approx(np.exp(1.0 - 0.4))


def test_ip_kernel_formula():
    model = IpParams([3.0], [1.0], [2.0])
    expected = 3.0 / np.sqrt(2 * np.pi * 4.0) * np.exp(-((4.0 - 1.0) ** 2) / 4.0)
    assert intensity_at(model, 4.0, [], W15) == pytest.approx(expected)


def test_intensity_outside_window():
    with pytest.raises(DomainError):
        intensity_at(ScParams(1.0, 0.2), 15.0, [], W15)


def test_invalid_parameters():
    with pytest.raises(DomainError):
        IpParams([1.0, 2.0], [0.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        IpParams([1.0], [0.0], [0.0])
    with pytest.raises(DomainError):
        SeParams(1.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        MixtureModel((ScParams(1.0, 0.2), SeParams(1.0, 0.8, 1.0)), (0.7, 0.7))


def test_unstable_hawkes_is_logged(caplog):
    with caplog.at_level(logging.WARNING):
        SeParams(1.0, 1.5, 1.0)
    assert "instable" in caplog.text


def test_model_dict_roundtrip_nn():
    model = random_nn_intensity(4, seed=3)
    back = model_from_dict(model_to_dict(model))
    assert np.array_equal(back.w_hidden, model.w_hidden)
    assert back.initial_input == model.initial_input
    assert intensity_at(back, 2.5, [0.5, 1.0], W15) == intensity_at(model, 2.5, [0.5, 1.0], W15)


def test_model_from_dict_defaults_and_errors():
    assert model_from_dict({"family": "SC"}) == ScParams(1.0, 0.2)
    with pytest.raises(DomainError, match=r"model\.params"):
        model_from_dict({"family": "SE", "params": {"mu": 1.0, "beta": 0.8}})
    with pytest.raises(DomainError, match=r"components\[1\]"):
        model_from_dict({"family": "MIX", "components": [{"family": "SC"}, {"family": "XX", "params": {}}]})


def test_default_mixture_is_uniform():
    mixture = default_model("IP+SE+SC")
    assert mixture.label == "IP+SE+SC"
    assert mixture.weights == pytest.approx((1 / 3, 1 / 3, 1 / 3))


# ============================================================
# Amincissement
# ============================================================

def test_zero_intensity_gives_empty_sequences():
    model = IpParams([0.0], [1.0], [1.0])
    data = make_dataset(model, None, 5, W15, seed=1)
    assert all(len(s) == 0 for s in data.sequences)


def test_thinning_is_deterministic():
    model = default_model("SE")
    a = simulate_thinning(model, W15, RngStream(11, 0))
    b = simulate_thinning(model, W15, RngStream(11, 0))
    assert a == b
    assert all(0.0 <= t < 15.0 for t in a)


def test_dataset_independent_of_thread_count():
    model = default_model("SC")
    serial = make_dataset(model, None, 12, W15, seed=5, n_jobs=1)
    parallel = make_dataset(model, None, 12, W15, seed=5, n_jobs=2)
    assert serial == parallel


def test_homogeneous_mean_count():
    gen = RngStream(0).generator()
    counts = [len(simulate_homogeneous(2.0, W15, gen)) for _ in range(2000)]
    assert np.mean(counts) == pytest.approx(30.0, abs=4 * np.sqrt(30.0 / 2000))


def test_homogeneous_rejects_nonpositive_rate():
    with pytest.raises(DomainError):
        simulate_homogeneous(0.0, W15, RngStream(0))


def test_ip_mean_count_matches_compensator():
    model = default_model("IP")
    data = make_dataset(model, None, 2000, W15, seed=2)
    expected = total_compensator(model, W15)
    assert data.counts().mean() == pytest.approx(expected, abs=4 * np.sqrt(expected / 2000))


def test_se_mean_count_matches_moment_equation():
    """m' = ω μ + (β - ω) m pour m(t) = E[λ(t)], N(T) = ∫ m."""
    mu, beta, omega = 1.0, 0.8, 1.0
    sol = integrate.solve_ivp(lambda t, y: [omega * mu + (beta - omega) * y[0], y[0]], (0.0, 15.0), [mu, 0.0],
                              rtol=1e-10, atol=1e-10)
    expected = sol.y[1, -1]
    assert expected == pytest.approx(55.996, abs=0.01)
    data = make_dataset(SeParams(mu, beta, omega), None, 2000, W15, seed=3)
    assert data.counts().mean() == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("family", ["IP", "SE", "SC", "NN"])
def test_time_change_gives_unit_exponentials(family):
    model = default_model(family)
    data = make_dataset(model, None, 400, W15, seed=17)
    increments = pooled_increments(data, model)
    assert increments.size > 1000
    assert stats.kstest(increments, "expon").pvalue > 0.01


def test_mixture_label_and_assignments():
    mixture = default_model("IP+SE+SC")
    data = make_dataset(mixture, None, 30, W15, seed=9)
    assert data.label == "mixture:IP=0.333333,SE=0.333333,SC=0.333333"
    picks = mixture_assignments(mixture.weights, 30, seed=9)
    assert set(picks) <= {0, 1, 2}
    assert len(set(picks)) > 1
    single = make_dataset(mixture.components[int(picks[0])], None, 1, W15, seed=9)
    assert data.sequences[0] == single.sequences[0]


def test_bad_mixture_weights():
    with pytest.raises(DomainError):
        make_dataset([ScParams(1.0, 0.2), SeParams(1.0, 0.8, 1.0)], [0.5, 0.6], 3, W15, seed=0)


def test_tiny_rate_gives_empty_sequence():
    assert len(simulate_homogeneous(1e-9, W15, RngStream(4))) == 0


def test_uniform_mixture_selects_each_component_evenly():
    picks = mixture_assignments((1 / 3, 1 / 3, 1 / 3), 3000, seed=21)
    counts = np.bincount(picks, minlength=3)
    assert counts.sum() == 3000
    assert np.all(np.abs(counts - 1000) <= 100)


# ============================================================
# Propriétés statistiques (10⁴ tirages)
# ============================================================

def bin_counts(sequences, edges):
    return np.array([np.histogram(s.array, bins=edges)[0] for s in sequences])


def within_gaps(sequences):
    return np.concatenate([np.diff(s.array) for s in sequences if len(s) > 1])


@pytest.mark.slow
def test_homogeneous_variance_and_disjoint_bins():
    gen = RngStream(3).generator()
    sequences = [simulate_homogeneous(2.0, W15, gen) for _ in range(10_000)]
    counts = np.array([len(s) for s in sequences])
    assert counts.mean() == pytest.approx(30.0, abs=3 * np.sqrt(30.0 / 10_000))
    assert counts.var() == pytest.approx(30.0, rel=0.1)
    bins = bin_counts(sequences, [0.0, 5.0, 10.0])
    assert abs(np.corrcoef(bins[:, 0], bins[:, 1])[0, 1]) < 0.03


@pytest.mark.slow
def test_constant_thinning_matches_homogeneous():
    # η = γ = 0 : λ(t) = 1 quel que soit l'historique
    thinned = make_dataset(ScParams(0.0, 0.0), None, 10_000, W15, seed=8).counts()
    gen = RngStream(9).generator()
    direct = np.array([len(simulate_homogeneous(1.0, W15, gen)) for _ in range(10_000)])
    assert stats.ks_2samp(thinned, direct).pvalue > 0.01


@pytest.mark.slow
def test_se_excitation_adds_events():
    model = SeParams(1.0, 0.8, 1.0)
    excited = make_dataset(model, None, 10_000, W15, seed=12).counts()
    gen = RngStream(13).generator()
    baseline = np.array([len(simulate_homogeneous(model.mu, W15, gen)) for _ in range(10_000)])
    assert excited.mean() > baseline.mean()


@pytest.mark.slow
def test_sc_gaps_are_more_regular_than_poisson():
    data = make_dataset(ScParams(2.0, 2.0), None, 10_000, W15, seed=14)
    gen = RngStream(15).generator()
    poisson = [simulate_homogeneous(data.mean_event_rate(), W15, gen) for _ in range(10_000)]
    assert within_gaps(data.sequences).var() < 0.8 * within_gaps(poisson).var()


@pytest.mark.slow
def test_sc_first_arrival_is_unit_exponential():
    data = make_dataset(ScParams(0.0, 1.0), None, 10_000, W15, seed=16)
    first = np.array([s.times[0] for s in data.sequences if len(s)])
    assert first.size > 9_990
    assert stats.kstest(first, "expon").statistic < 0.02
