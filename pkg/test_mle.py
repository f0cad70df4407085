"""
Tests du module mle : compensateur, log-vraisemblance, objectifs par famille, ajustement
"""

import os
import sys

import numpy as np
import pytest
from scipy import integrate, stats

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from src.core import Dataset, DomainError, IoError, ParseError, RngStream, UsageError, Window, validate_sequence
from src.mle import (
    EventBatch,
    FittedModel,
    IpFamily,
    NnFamily,
    ScFamily,
    SeFamily,
    compensator,
    fit,
    heldout_loglik,
    load_fitted_model,
    loglik,
    make_family,
    mean_loglik,
    sample_fitted,
    save_fitted_model,
    total_compensator,
)
from src.simulation import IpParams, ScParams, SeParams, default_model, intensity_at, make_dataset

W15 = Window(15.0)
TIMES = (0.4, 1.1, 1.3, 4.0, 9.5, 14.2)


def seq(*times):
    return validate_sequence(times, W15)


def quad_pieces(model, times):
    edges = (0.0,) + tuple(times) + (15.0,)
    return np.array([
        integrate.quad(lambda t: intensity_at(model, t, times, W15), a, b, epsabs=1e-12, epsrel=1e-10)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ])


# ============================================================
# Compensateur et log-vraisemblance
# ============================================================

@pytest.mark.parametrize("family", ["IP", "SE", "SC", "NN"])
def test_compensator_pieces_match_quadrature(family):
    model = default_model(family)
    pieces = compensator(model, seq(*TIMES), W15)
    assert pieces.shape == (len(TIMES) + 1,)
    assert np.all(pieces >= 0)
    np.testing.assert_allclose(pieces, quad_pieces(model, TIMES), rtol=1e-6, atol=1e-9)


def test_sc_compensator_closed_form():
    assert total_compensator(ScParams(1.0, 0.2), W15) == pytest.approx(np.expm1(15.0))
    assert total_compensator(ScParams(0.0, 0.2), W15) == pytest.approx(15.0)


def test_ip_compensator_without_events():
    model = default_model("IP")
    expected = integrate.quad(lambda t: float(model.rate(t)), 0.0, 15.0, epsabs=1e-12)[0]
    assert total_compensator(model, W15) == pytest.approx(expected, rel=1e-9)


def test_flat_surrogate_loglik():
    flat = IpParams([0.0], [1.0], [1.0], baseline=1.0)
    assert loglik(flat, seq(*TIMES), W15) == pytest.approx(-15.0)


def test_zero_rate_at_event_gives_minus_inf():
    silent = IpParams([0.0], [1.0], [1.0])
    assert loglik(silent, seq(2.0), W15) == -np.inf
    assert loglik(silent, seq(), W15) == 0.0


def test_se_loglik_by_hand():
    model = SeParams(1.0, 0.8, 1.0)
    rates = [1.0, 1.0 + 0.8 * np.exp(-1.0)]
    integral = 1.0 * 15.0 + 0.8 * (1 - np.exp(-14.0)) + 0.8 * (1 - np.exp(-13.0))
    assert loglik(model, seq(1.0, 2.0), W15) == pytest.approx(np.log(rates).sum() - integral, rel=1e-12)


def test_mixture_has_no_likelihood():
    with pytest.raises(DomainError):
        loglik(default_model("IP+SE+SC"), seq(1.0), W15)
    with pytest.raises(DomainError):
        compensator(default_model("IP+SE+SC"), seq(1.0), W15)


def test_sequence_outside_window():
    with pytest.raises(DomainError):
        compensator(default_model("SE"), np.array([1.0, 15.0]), W15)


# ============================================================
# Objectifs par famille
# ============================================================

@pytest.fixture(scope="module")
def small_data():
    return make_dataset(default_model("SE"), None, 12, W15, seed=5, label="SE")


def perturbed_start(family, data, seed):
    rng = np.random.default_rng(seed)
    u = family.initial(data, RngStream(seed).generator())
    return {k: np.asarray(v, dtype=np.float64) + rng.normal(0, 0.1, np.shape(v)) for k, v in u.items()}


FAMILIES = [IpFamily(2), SeFamily(), ScFamily(), NnFamily(hidden_dim=3)]


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
def test_family_value_is_mean_loglik(family, small_data):
    u = perturbed_start(family, small_data, 0)
    value, _ = family.value_and_grad(u, EventBatch.from_dataset(small_data))
    assert value == pytest.approx(mean_loglik(family.to_model(u), small_data), rel=1e-10)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
@pytest.mark.parametrize("seed", [1, 2])
def test_family_gradient(family, seed, small_data):
    u = perturbed_start(family, small_data, seed)
    batch = EventBatch.from_dataset(small_data)
    _, grads = family.value_and_grad(u, batch)
    h = 1e-6
    for name, arr in u.items():
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up, _ = family.value_and_grad(u, batch)
            arr[idx] = old - h
            down, _ = family.value_and_grad(u, batch)
            arr[idx] = old
            assert grads[name][idx] == pytest.approx((up - down) / (2 * h), rel=1e-5, abs=1e-6), name


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
def test_model_coordinates_round_trip(family, small_data):
    u = perturbed_start(family, small_data, 3)
    back = family.from_model(family.to_model(u))
    for name in u:
        np.testing.assert_allclose(np.ravel(back[name]), np.ravel(u[name]), rtol=1e-12)


def test_padding_adds_nothing():
    data = Dataset(W15, (seq(1.0, 2.0, 3.0, 4.0), seq()), "x")
    u = SeFamily().from_model(SeParams(1.0, 0.8, 1.0))
    value, _ = SeFamily().value_and_grad(u, EventBatch.from_dataset(data))
    expected = (loglik(SeParams(1.0, 0.8, 1.0), data.sequences[0], W15) - 15.0) / 2
    assert value == pytest.approx(expected, rel=1e-12)


def test_unknown_family():
    with pytest.raises(DomainError):
        make_family("XX")


# ============================================================
# Ajustement
# ============================================================

def test_fit_rejects_empty_data():
    with pytest.raises(DomainError):
        fit(Dataset(W15, (), "vide"), "SE")


def test_fit_rejects_unknown_setting(small_data):
    with pytest.raises(UsageError):
        fit(small_data, "SE", {"learning_rate": 0.1})


def test_fit_improves_loglik(small_data):
    family = ScFamily()
    start = mean_loglik(family.to_model(family.initial(small_data)), small_data)
    fitted = fit(small_data, "SC", {"max_iters": 200, "show_progress": False})
    assert isinstance(fitted, FittedModel)
    assert fitted.label == "MLE-SC"
    assert fitted.final_loglik > start
    assert fitted.final_loglik == pytest.approx(mean_loglik(fitted.model, small_data), rel=1e-9)


def test_loose_tolerance_converges_immediately(small_data):
    fitted = fit(small_data, "SE", {"grad_tol": 1e9, "show_progress": False})
    assert fitted.converged
    assert fitted.iterations == 0


def test_heldout_loglik(small_data):
    fitted = fit(small_data, "SE", {"max_iters": 20, "show_progress": False})
    test_data = make_dataset(default_model("SE"), None, 5, W15, seed=99)
    assert heldout_loglik(fitted, test_data) == mean_loglik(fitted.model, test_data)


def test_sample_fitted(small_data):
    fitted = fit(small_data, "IP", {"max_iters": 20, "show_progress": False})
    sample = sample_fitted(fitted, 30, W15, seed=4)
    assert len(sample) == 30
    assert sample.label == "MLE-IP"
    assert sample_fitted(fitted, 30, W15, seed=4).sequences == sample.sequences


def test_fitted_model_file(tmp_path, small_data):
    fitted = fit(small_data, "SE", {"max_iters": 20, "show_progress": False})
    path = save_fitted_model(fitted, tmp_path / "mle_SE.json")
    loaded = load_fitted_model(path)
    assert loaded.model == fitted.model
    assert loaded.diagnostics() == fitted.diagnostics()


def test_fitted_model_file_errors(tmp_path):
    with pytest.raises(IoError):
        load_fitted_model(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{ pas du json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_fitted_model(broken)


def fits_over_seeds(family, seeds=range(10)):
    fits = []
    for seed in seeds:
        data = make_dataset(default_model(family), None, 2000, W15, seed=100 + seed)
        fits.append(fit(data, family, {"max_iters": 3000, "show_progress": False}).model)
    return fits


@pytest.mark.slow
def test_se_parameters_are_recovered():
    fits = fits_over_seeds("SE")
    assert np.median([m.mu for m in fits]) == pytest.approx(1.0, rel=0.15)
    assert np.median([m.beta for m in fits]) == pytest.approx(0.8, rel=0.15)


@pytest.mark.slow
def test_sc_parameters_are_recovered():
    fits = fits_over_seeds("SC")
    assert np.median([m.eta for m in fits]) == pytest.approx(1.0, rel=0.15)
    assert np.median([m.gamma for m in fits]) == pytest.approx(0.2, rel=0.15)


def test_se_compensator_increments_are_unit_exponentials():
    model = default_model("SE")
    data = make_dataset(model, None, 250, W15, seed=31)
    # le dernier morceau [t_n, T) est censuré
    increments = np.concatenate([compensator(model, s, W15)[:-1] for s in data.sequences])
    assert increments.size >= 10_000
    assert stats.kstest(increments[:10_000], "expon").pvalue > 0.01


TRUTH_FAMILIES = ["IP", "SE", "SC"]
ALL_FAMILIES = ["IP", "SE", "SC", "NN"]


@pytest.mark.slow
@pytest.mark.parametrize("truth", TRUTH_FAMILIES)
def test_own_family_wins_on_heldout_data(truth):
    """Médiane sur 10 graines de l'avantage de la bonne famille, en log-vraisemblance de test."""
    margins = {family: [] for family in ALL_FAMILIES if family != truth}
    for seed in range(10):
        train = make_dataset(default_model(truth), None, 1000, W15, seed=200 + seed)
        test = make_dataset(default_model(truth), None, 1000, W15, seed=300 + seed)
        scores = {family: heldout_loglik(fit(train, family, {"show_progress": False}), test)
                  for family in ALL_FAMILIES}
        for family in margins:
            margins[family].append(scores[truth] - scores[family])
    for family in ("IP", "SE", "SC"):
        if family != truth:
            assert np.median(margins[family]) >= 0.0, family
    # NN approche toute intensité régulière : égalité admise au bruit près
    assert np.median(margins["NN"]) >= -0.01 * abs(scores[truth])
