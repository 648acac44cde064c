import math

import mpmath
import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqpolar.polar import default_code
from cqpolar.qsim import NoiseConfig, noisy_pipeline_channel
from cqpolar.rates import (
    InputDistribution,
    binary_entropy,
    blahut_arimoto,
    canonicalize_degenerate,
    dolinar_capacity,
    dolinar_pie,
    holevo_capacity,
    holevo_pie,
    mutual_information,
    optimize_alpha,
    optimize_input,
    pie,
)
from cqpolar.scdecoder import effective_channel

CODE4 = default_code(4)


@st.composite
def channels(draw):
    m = draw(st.integers(2, 5))
    k = draw(st.integers(2, 5))
    raw = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=m * k, max_size=m * k))).reshape(m, k) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)


@pytest.mark.parametrize("x", [-0.1, 1.5])
def test_binary_entropy_domain(x):
    with pytest.raises(ValueError):
        binary_entropy(x)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric(x):
    assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-12)


def test_mutual_information_trivial():
    assert mutual_information(np.eye(2), [0.5, 0.5]) == pytest.approx(1.0)
    assert mutual_information(np.tile([0.3, 0.7], (3, 1)), [0.2, 0.3, 0.5]) == pytest.approx(0.0, abs=1e-15)


def closed_form_information(q, k, p):
    # I = H(Y) - H(Y|U) for the two-parameter table, in arbitrary precision
    mpmath.mp.dps = 40
    q, k = mpmath.mpf(q), mpmath.mpf(k)
    p0, p1, p2, p3 = (mpmath.mpf(x) for x in p)

    def xlog(x):
        return 0 if x == 0 else x * mpmath.log(x, 2)

    y0 = p0 * q + p1 * (1 - q) + k * (p2 + p3)
    y1 = p0 * (1 - q) + p1 * q + k * (p2 + p3)
    y2 = (mpmath.mpf(1) / 2 - k) * (p2 + p3)
    hy = -(xlog(y0) + xlog(y1) + 2 * xlog(y2))
    h01 = -(xlog(q) + xlog(1 - q))
    h23 = -(2 * xlog(k) + 2 * xlog(mpmath.mpf(1) / 2 - k))
    return float(hy - (p0 + p1) * h01 - (p2 + p3) * h23)


def test_mutual_information_closed_form_oracle():
    a = math.sqrt(0.001)
    d = 4 * a * a + 1
    q, k = (2 * a * a + 2 * a + 0.5) / d, 0.5 / d
    p = [0.48, 0.48, 0.04, 0.0]
    tm = effective_channel(CODE4, a, multiphoton_policy="ignore")
    assert mutual_information(tm, p) == pytest.approx(closed_form_information(q, k, p), rel=1e-10)


def test_blahut_arimoto_bsc():
    e = 0.11
    P = np.array([[1 - e, e], [e, 1 - e]])
    res = blahut_arimoto(P)
    assert res.capacity == pytest.approx(1 - binary_entropy(e), abs=1e-9)
    nptest.assert_allclose(res.distribution, [0.5, 0.5], atol=1e-6)


def test_blahut_arimoto_noiseless():
    assert blahut_arimoto(np.eye(4)).capacity == pytest.approx(2.0, abs=1e-9)


def test_blahut_arimoto_z_channel():
    # Z channel with flip 1/2: C = log2(5/4)
    P = np.array([[1.0, 0.0], [0.5, 0.5]])
    res = blahut_arimoto(P)
    assert res.capacity == pytest.approx(math.log2(1.25), abs=1e-9)
    assert res.distribution[1] == pytest.approx(0.4, abs=1e-5)


def test_blahut_arimoto_rejects_non_stochastic():
    with pytest.raises(ValueError):
        blahut_arimoto(np.array([[0.5, 0.4], [0.5, 0.5]]))


@given(channels())
def test_blahut_arimoto_history_non_decreasing(P):
    res = blahut_arimoto(P, tol=1e-9)
    hist = np.array(res.history)
    assert np.all(np.diff(hist) >= -1e-12)
    assert res.upper_bound - res.capacity < 1e-9 or res.iterations == 200_000
    assert res.capacity <= math.log2(min(P.shape)) + 1e-12


@given(channels())
def test_optimum_beats_uniform(P):
    dist, info = optimize_input(P)
    assert info >= mutual_information(P, np.full(len(P), 1 / len(P))) - 1e-10
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-10)


@given(st.floats(0.01, 0.49))
def test_bsc_uniform_optimal(e):
    dist, _ = optimize_input(np.array([[1 - e, e], [e, 1 - e]]))
    nptest.assert_allclose(dist.probabilities, [0.5, 0.5], atol=1e-5)


def test_optimize_input_n4_reference():
    dist, _ = optimize_input(effective_channel(CODE4, math.sqrt(0.001)))
    p = dist.as_dict()
    assert p["0000"] == pytest.approx(0.48, abs=0.01)
    assert p["0001"] == pytest.approx(0.48, abs=0.01)
    assert p["0010"] + p["0011"] == pytest.approx(0.04, abs=0.01)
    assert p["0011"] == 0.0


def test_optimize_input_n8_reference():
    code = default_code(8)
    dist, _ = optimize_input(effective_channel(code, math.sqrt(0.001)))
    p = dist.probabilities
    assert p[0] == pytest.approx(0.325, abs=0.01)
    assert p[1] == pytest.approx(0.325, abs=0.01)
    for k in range(1, 8):
        assert p[2 * k] + p[2 * k + 1] == pytest.approx(0.05, abs=0.01)


@given(st.floats(0.0, 1.0))
def test_degenerate_mass_swap_leaves_information(t):
    tm = effective_channel(CODE4, 0.1)
    s = 0.1
    a = [0.45, 0.45, t * s, (1 - t) * s]
    b = [0.45, 0.45, (1 - t) * s, t * s]
    assert mutual_information(tm, a) == pytest.approx(mutual_information(tm, b), abs=1e-14)


def test_canonicalize_moves_group_mass():
    P = np.array([[0.9, 0.1], [0.2, 0.8], [0.2, 0.8]])
    nptest.assert_allclose(canonicalize_degenerate(P, [0.5, 0.2, 0.3]), [0.5, 0.5, 0.0])


def test_input_distribution_validation():
    with pytest.raises(ValueError):
        InputDistribution(np.array([0.5, 0.6]))


def test_pie_examples():
    assert pie(1.0, 4, 0.25) == 1.0
    assert pie(2.0, 4, 0.25) == 2 * pie(1.0, 4, 0.25)
    with pytest.raises(ValueError):
        pie(1.0, 4, 0.0)


def mp_h2(x):
    mpmath.mp.dps = 50
    return -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)


@pytest.mark.parametrize("nbar", [1e-4, 1e-3, 0.01, 0.5])
def test_baselines_match_high_precision(nbar):
    mpmath.mp.dps = 50
    n = mpmath.mpf(nbar)
    c1 = 1 - mp_h2((1 - mpmath.sqrt(1 - mpmath.e ** (-4 * n))) / 2)
    cinf = mp_h2((1 - mpmath.e ** (-2 * n)) / 2)
    assert dolinar_capacity(nbar) == pytest.approx(float(c1), rel=1e-10)
    assert holevo_capacity(nbar) == pytest.approx(float(cinf), rel=1e-10)


def test_holevo_example():
    assert holevo_capacity(0.5) == pytest.approx(binary_entropy((1 - math.exp(-1)) / 2), abs=1e-15)


def test_baselines_vanish_at_zero_signal():
    assert dolinar_capacity(1e-12) < 1e-9
    assert holevo_capacity(1e-12) < 1e-9
    # the verbatim form tends to one bit instead
    assert dolinar_capacity(1e-12, verbatim=True) > 0.999


@given(st.floats(1e-4, 0.5))
def test_holevo_dominates(nbar):
    assert holevo_pie(nbar) > dolinar_pie(nbar)


@pytest.mark.parametrize("f", [dolinar_pie, holevo_pie])
def test_baselines_reject_nonpositive(f):
    with pytest.raises(ValueError):
        f(0.0)


def test_superadditivity_crossover():
    def n4(nbar):
        _, info = optimize_input(effective_channel(CODE4, math.sqrt(nbar)))
        return pie(info, 4, nbar)

    assert n4(0.001) > dolinar_pie(0.001)
    assert n4(0.01) < dolinar_pie(0.01)


def test_optimize_alpha_noiseless_prefers_smallest():
    grid = np.sqrt(np.geomspace(1e-4, 1e-1, 7))
    a_star, point = optimize_alpha(lambda a: effective_channel(CODE4, a), 4, grid)
    assert a_star == pytest.approx(grid[0])
    assert point.pie == pytest.approx(pie(point.mutual_information_bits, 4, point.nbar), abs=1e-12)


def test_optimize_alpha_interior_with_noise():
    code = default_code(8)
    noise = NoiseConfig(transducer_p=0.002)
    fn = lambda a: noisy_pipeline_channel(code, a, noise)  # noqa: E731
    coarse = np.sqrt(np.geomspace(1e-5, 3e-2, 8))
    fine = np.sqrt(np.geomspace(1e-5, 3e-2, 15))
    a1, _ = optimize_alpha(fn, 8, coarse)
    a2, _ = optimize_alpha(fn, 8, fine)
    assert coarse[0] < a1 < coarse[-1]
    assert abs(a1 - a2) / a2 < 0.05


def test_optimize_alpha_rejects_empty_grid():
    with pytest.raises(ValueError):
        optimize_alpha(lambda a: effective_channel(CODE4, a), 4, [])
