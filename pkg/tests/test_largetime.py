import math

import numpy as np
import pytest

import fracwave.reconstruction.largetime as lt
from fracwave.errors import WindowTooNarrow
from fracwave.forward import TimeTrace
from fracwave.model import DampingModel, Excitation
from fracwave.reconstruction import Status
from fracwave.reconstruction.largetime import (
    AsymptoticTermSet,
    LargeTimeOptions,
    composite_coefficient,
    coefficient_gradient,
    largetime_model,
    largetime_newton,
    masked_terms,
)

from .oracles import fd_jacobian, multi_indices

THIRDS = (0.25, 1 / 3, 2 / 3)


def test_single_term_leading_value():
    terms = AsymptoticTermSet.build([0.25])
    assert terms.indices == ((1,), (2,), (3,))
    v, _ = largetime_model([0.25], [2.0, 0.0, 0.0], [10.0, 100.0], terms)
    assert np.allclose(v, 2.0 * np.array([10.0, 100.0]) ** -0.25 / math.gamma(0.75), rtol=1e-14)


def test_truncation_depth():
    terms = AsymptoticTermSet.build([0.4, 0.45])
    assert terms.m_max == 2
    assert not terms.by_degree(3)


def test_three_term_set_matches_brute_force():
    terms = AsymptoticTermSet.build(THIRDS)
    assert terms.m_max == 4
    assert set(terms.indices) == set(multi_indices(THIRDS, 4))
    assert (0, 0, 2) not in terms.indices
    assert np.all(terms.sigmas() < 1)


@pytest.mark.parametrize("orders", [(0.3,), (0.2, 0.5), THIRDS, (0.15, 0.4, 0.55)])
def test_term_set_property(orders):
    terms = AsymptoticTermSet.build(orders)
    assert set(terms.indices) == set(multi_indices(orders, terms.m_max))


def test_model_gradient_matches_finite_differences():
    rng = np.random.default_rng(31)
    t = np.geomspace(5e4, 2e5, 40)
    for _ in range(10):
        p = np.sort(rng.uniform(0.2, 0.7, 3))
        terms = AsymptoticTermSet.build(p)
        c = rng.uniform(-1, 1, len(terms))
        x = np.concatenate([p, c])

        def f(v):
            return largetime_model(v[:3], v[3:], t, terms)[0]

        _, g = largetime_model(p, c, t, terms)
        Jfd = fd_jacobian(f, x)
        assert np.max(np.abs(g - Jfd)) < 1e-6 * np.max(np.abs(g))


def test_tied_fit_jacobian():
    rng = np.random.default_rng(32)
    t = np.geomspace(5e4, 2e5, 30)
    h = np.full(30, 0.01)
    fit = lt._Fit(t, h, 3, 1.0, 1.0, 1.0, LargeTimeOptions())
    for _ in range(10):
        x = np.concatenate([np.sort(rng.uniform(0.2, 0.7, 3)), rng.uniform(0.05, 0.2, 3)])
        terms = AsymptoticTermSet.build(x[:3])
        r, J = fit.residual(x, terms)
        Jfd = fd_jacobian(lambda v: fit.residual(v, terms)[0], x)
        assert np.max(np.abs(J - Jfd)) < 1e-6 * np.max(np.abs(J))


def test_coefficient_gradient():
    bs = np.array([0.1, 0.2, 0.05])
    for idx in [(1, 0, 0), (2, 1, 0), (1, 1, 1)]:
        fd = fd_jacobian(lambda b: np.array([composite_coefficient(idx, b, 1.5)]), bs)[0]
        assert np.allclose(coefficient_gradient(idx, bs, 1.5), fd, rtol=1e-7)


def test_leading_coefficient_mapping():
    # c_1j = W b_j lam / Lambda for a u0 trace
    assert composite_coefficient((1, 0), [0.1, 0.3], 4.0, weight=2.0) == pytest.approx(2.0 * 0.1 / 4.0)
    assert composite_coefficient((1, 1), [0.1, 0.3], 4.0) == pytest.approx(-2 * 0.03 / 16.0)


def _expansion_trace(model, t):
    terms = AsymptoticTermSet.build(model.alphas)
    c = [composite_coefficient(i, model.bs, model.big_lambda) for i in terms.indices]
    return TimeTrace(t, largetime_model(model.alphas, c, t, terms)[0])


def test_exact_start_on_expansion_data():
    truth = DampingModel.from_arrays(1.0, THIRDS, [0.1, 0.1, 0.1])
    trace = _expansion_trace(truth, np.geomspace(5e4, 2e5, 200))
    rep = largetime_newton(truth, trace)
    assert rep.history[1].residual < 1e-10
    assert rep.status is Status.CONVERGED


def test_recovers_from_perturbed_start_on_expansion_data():
    truth = DampingModel.from_arrays(1.0, [0.2, 0.45], [0.1, 0.2])
    trace = _expansion_trace(truth, np.geomspace(5e4, 2e5, 200))
    rep = largetime_newton(DampingModel.from_arrays(1.0, [0.22, 0.4], [0.09, 0.25]), trace, opts=LargeTimeOptions(max_iter=30))
    assert np.allclose(rep.recovered.alphas, truth.alphas, atol=1e-6)
    assert np.allclose(rep.recovered.bs, truth.bs, atol=1e-5)


def test_pruning_log_and_gamma_arguments(monkeypatch):
    # p_1 moves across 1/3 so the retained set changes during the fit
    seen = []
    orig = lt.special.gamma

    def spy(x):
        seen.append(float(x))
        return orig(x)

    monkeypatch.setattr(lt.special, "gamma", spy)
    truth = DampingModel.from_arrays(1.0, [0.3, 0.5], [0.1, 0.1])
    trace = _expansion_trace(truth, np.geomspace(5e4, 2e5, 100))
    rep = largetime_newton(DampingModel.from_arrays(1.0, [0.36, 0.5], [0.1, 0.1]), trace, opts=LargeTimeOptions(max_iter=20))
    assert any("added" in entry[2] for entry in rep.pruning_log)
    assert seen and min(seen) > 1e-9
    assert abs(rep.recovered.alphas[0] - 0.3) < 1e-6


def test_masking_rule():
    coeffs = {(1, 0): 1.0, (0, 1): 1e-6}
    assert masked_terms([0.25, 0.9], coeffs, 2e5) == [1]
    assert masked_terms([0.25, 0.4], coeffs, 2e5) == []
    assert masked_terms([0.25, 0.9], {(1, 0): 1.0, (0, 1): 1e3}, 2e5) == []


def test_input_checks():
    truth = DampingModel.from_arrays(1.0, [0.3], [0.1])
    with pytest.raises(WindowTooNarrow):
        largetime_newton(truth, TimeTrace([1e4, 1.5e4], [0.1, 0.1]))
    with pytest.raises(ValueError):
        largetime_newton(truth, TimeTrace([1e4, 1e5], [0.1, 0.1]), Excitation("u1"))
    with pytest.raises(ValueError):
        LargeTimeOptions(coefficients="mixed")
