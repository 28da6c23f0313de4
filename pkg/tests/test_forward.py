import math

import numpy as np
import pytest

from fracwave.errors import IrrationalOrder, SystemTooLarge
from fracwave.forward import build_companion, char_poly_in_z, rationalize_orders, solve_trace
from fracwave.laplace import laplace_numeric
from fracwave.model import DampingModel, Excitation, SampledProfile, hhat_analytic

from .frozen import SINGLE_TERM_U0, SINGLE_TERM_U1
from .oracles import best_rational, damped_oscillator

U0, U1 = Excitation("u0"), Excitation("u1")
SINGLE = DampingModel.from_arrays(4.0, [0.5], [0.1])
TABLE1 = DampingModel.from_arrays(4.0, [0.25, 0.5, 0.75], [0.2, 0.25, 0.1])


def test_rationalize_half():
    rat = rationalize_orders(SINGLE)
    assert (rat.M, rat.N) == (2, 4)


def test_rationalize_three_terms():
    rat = rationalize_orders(DampingModel.from_arrays(1.0, [1 / 4, 1 / 3, 2 / 3], [0.1] * 3))
    assert (rat.M, rat.N) == (12, 24)
    assert rat.damping_slots == (3, 4, 8)


def test_rationalize_loose_tolerance():
    rat = rationalize_orders(DampingModel.from_arrays(1.0, [0.2500001], [0.1]), tol=1e-3)
    assert rat.fractions["alpha_1"] == best_rational(0.2500001, 1e-3)
    assert rat.M == 4


def test_irrational_order_reports_error():
    with pytest.raises(IrrationalOrder) as info:
        rationalize_orders(DampingModel.from_arrays(1.0, [1 / math.sqrt(2)], [0.1]))
    assert info.value.best_error > 1e-9


def test_system_too_large():
    with pytest.raises(SystemTooLarge):
        rationalize_orders(DampingModel.from_arrays(1.0, [1 / 61, 1 / 59], [0.1, 0.1]))


def test_companion_undamped():
    sys = build_companion(DampingModel.from_arrays(4.0), U1)
    assert np.array_equal(sys.A, [[0.0, 1.0], [-4.0, 0.0]])
    assert np.array_equal(sys.Y0, [0.0, 1.0])


def test_companion_single_term():
    sys = build_companion(SINGLE, U0)
    assert sys.N == 4
    assert np.allclose(sys.A[-1], [-4.0, -0.1, 0.0, 0.0])
    assert np.array_equal(sys.A[:-1, 1:], np.eye(3))
    assert np.array_equal(sys.Y0, [1.0, 0.0, 0.0, 0.0])


def test_companion_root_linkage_single_term():
    z = np.linalg.eigvals(build_companion(SINGLE, U1).A)
    ref = np.roots([1.0, 0.0, 0.0, 0.1, 4.0])
    assert np.allclose(np.sort_complex(z), np.sort_complex(ref), rtol=1e-12)
    assert np.max(np.abs(char_poly_in_z(SINGLE, z, 2))) < 1e-12


def test_companion_with_higher_terms_is_normalized():
    m = DampingModel.from_arrays(4.0, [0.5], [0.1], gammas=[0.5], ds=[0.2])
    sys = build_companion(m, Excitation("u2"))
    assert sys.N == 5
    assert np.allclose(sys.A[-1], np.array([-4.0, -0.1, 0.0, 0.0, -1.0]) / 0.2)
    assert sys.Y0[4] == 1.0


def test_undamped_velocity_trace():
    h = solve_trace(DampingModel.from_arrays(4.0), U1, [np.pi / 4]).values[0]
    assert h == pytest.approx(0.5, rel=1e-14)


def test_integer_order_damping_matches_closed_form():
    t = np.linspace(0, 10, 201)
    h = solve_trace(DampingModel.from_arrays(4.0, [1.0], [0.4]), U1, t).values
    ref = damped_oscillator(t, 0.4, 4.0)
    assert np.max(np.abs(h - ref)) < 1e-8 * np.max(np.abs(ref))


@pytest.mark.parametrize("exc, frozen", [(U0, SINGLE_TERM_U0), (U1, SINGLE_TERM_U1)])
def test_single_term_against_bromwich_inversion(exc, frozen):
    t = np.array(sorted(frozen))
    h = solve_trace(SINGLE, exc, t).values
    ref = np.array([frozen[x] for x in t])
    assert np.max(np.abs(h / ref - 1)) < 1e-6


def test_initial_conditions():
    assert solve_trace(TABLE1, U0, [0.0]).values[0] == pytest.approx(1.0, abs=1e-10)
    assert abs(solve_trace(TABLE1, U1, [0.0]).values[0]) < 1e-10
    # h'(0) = 1 for u1: Richardson on forward differences
    d = [solve_trace(TABLE1, U1, [0.0, dl]).values[1] / dl for dl in (1e-4, 1e-5)]
    assert 2 * d[1] - d[0] == pytest.approx(1.0, abs=1e-4)


def test_weights_scale_trace():
    t = np.linspace(0, 5, 11)
    exc = Excitation("u1", mode_coefficient=2.0, observation_weight=0.5)
    assert np.allclose(solve_trace(TABLE1, exc, t).values, solve_trace(TABLE1, U1, t).values, rtol=1e-13, atol=1e-15)


def test_laplace_consistency():
    t = np.linspace(0, 40, 8001)
    trace = solve_trace(TABLE1, U1, t)
    s = np.array([1.0, 2.0, 3.0, 5.0, 8.0])
    num = laplace_numeric(trace, s, 4.0)
    ref = hhat_analytic(TABLE1, U1, s).real
    # |h| <= 1 here, so the dropped tail is below e^(-40 s)/s
    assert np.all(np.abs(num - ref) <= 1e-3 * np.abs(ref) + np.exp(-40 * s) / s)


def test_constant_source_undamped():
    t = np.linspace(0, 10, 101)
    h = solve_trace(DampingModel.from_arrays(4.0), Excitation("source", sigma="constant"), t).values
    assert np.allclose(h, (1 - np.cos(2 * t)) / 4, atol=1e-12)


def test_ramp_source_undamped():
    t = np.linspace(0, 10, 101)
    exc = Excitation("source", sigma=SampledProfile((0.0, 5.0, 10.0), (0.0, 5.0, 10.0)))
    h = solve_trace(DampingModel.from_arrays(4.0), exc, t).values
    assert np.allclose(h, t / 4 - np.sin(2 * t) / 8, atol=1e-11)


def test_source_trace_matches_transform():
    t = np.linspace(0, 40, 8001)
    exc = Excitation("source", sigma="constant")
    trace = solve_trace(SINGLE, exc, t)
    s = np.array([2.0, 4.0])
    num = laplace_numeric(trace, s, scheme="cubic")
    ref = hhat_analytic(SINGLE, exc, s).real
    assert np.allclose(num, ref, rtol=1e-6)


def test_determinism_and_meta():
    t = np.linspace(0, 2, 9)
    a, b = solve_trace(TABLE1, U1, t), solve_trace(TABLE1, U1, t)
    assert np.array_equal(a.values, b.values)
    assert a.meta["digest"] == b.meta["digest"]
    assert (a.meta["M"], a.meta["N"]) == (4, 8)


def test_rejects_negative_times():
    with pytest.raises(ValueError):
        solve_trace(TABLE1, U1, [-1.0, 0.0])
