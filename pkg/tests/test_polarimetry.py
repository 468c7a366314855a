import itertools
import math

import numpy as np
import pytest
from conftest import random_ket
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from sklearn.base import clone

from fourphoton.fock import ghz_state
from fourphoton.polarimetry import (
    AnalyzerSetting,
    DegenerateFitError,
    FringeCurve,
    SinusoidFit,
    analyzer_projectors,
    correlation,
    correlation_expectation,
    correlation_scan,
    fit_sinusoid,
    fringe_scan_linear,
    mixed_visibility,
    sample_counts,
)
from fourphoton.qstate import (
    PM_BASIS,
    OutcomeDistribution,
    PureState,
    born_distribution,
    mix_with_white_noise,
)

RS = 1 / math.sqrt(2)


def correlation_oracle(state, phases):
    """Loop over the 16 (l_c, l_d, l_e, l_f) outcomes with explicit eigenvectors."""
    amps = state.amplitudes
    total = 0.0
    for ls in itertools.product((1, -1), repeat=4):
        vec = np.array([1.0 + 0j])
        for l, m in zip(ls, state.mode_order):
            phi = phases.get(m, 0.0)
            # (H, V) components of (|V> + l e^{-i phi} |H>)/sqrt2
            vec = np.kron(vec, np.array([l * np.exp(-1j * phi), 1]) * RS)
        total += np.prod(ls) * abs(np.vdot(vec, amps)) ** 2
    return total


def test_projectors_zero_phase():
    plus, minus = analyzer_projectors(AnalyzerSetting(0.0))
    np.testing.assert_allclose(plus, 0.5 * np.array([[1, 1], [1, 1]]), atol=1e-15)
    np.testing.assert_allclose(minus, 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-15)


def test_projectors_pi_swaps_labels():
    p0, m0 = analyzer_projectors(AnalyzerSetting(0.0))
    p1, m1 = analyzer_projectors(AnalyzerSetting(math.pi))
    np.testing.assert_allclose(p1, m0, atol=1e-15)
    np.testing.assert_allclose(m1, p0, atol=1e-15)


def test_projectors_circular():
    s = AnalyzerSetting(math.pi / 2)
    np.testing.assert_allclose(s.eigenvector(1), np.array([-1j, 1]) * RS, atol=1e-15)
    np.testing.assert_allclose(s.eigenvector(-1), np.array([1j, 1]) * RS, atol=1e-15)


def test_projector_completeness():
    rng = np.random.default_rng(7)
    for phi in rng.uniform(-10, 10, size=1000):
        plus, minus = analyzer_projectors(AnalyzerSetting(phi))
        assert np.max(np.abs(plus + minus - np.eye(2))) < 1e-12


def test_correlation_examples(psi4):
    assert abs(correlation(psi4) - 1) < 1e-12
    assert abs(correlation(psi4, {"c": math.pi}) + 1) < 1e-12
    assert abs(correlation_oracle(psi4, {"c": math.pi / 2})) < 1e-12
    assert abs(correlation(psi4, {"c": math.pi / 2})) < 1e-12


def test_correlation_rejects_unknown_mode(psi4):
    with pytest.raises(ValueError):
        correlation(psi4, {"x": 0.1})


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_paths_and_sign_flip(seed):
    rng = np.random.default_rng(seed)
    state = PureState("cdef", random_ket(rng, 4))
    phases = dict(zip("cdef", rng.uniform(0, 2 * np.pi, 4)))
    e = correlation(state, phases)
    assert abs(e) <= 1 + 1e-12
    assert abs(e - correlation_expectation(state, phases)) < 1e-9
    assert abs(e - correlation_oracle(state, phases)) < 1e-9
    flip = rng.choice(list("cdef"))
    flipped = {**phases, flip: phases[flip] + np.pi}
    assert abs(correlation(state, flipped) + e) < 1e-9


def test_noisy_correlation_paths_agree(psi4):
    noisy = mix_with_white_noise(psi4, 0.7)
    ph = {"c": 0.3, "f": 1.1}
    assert abs(correlation(noisy, ph) - correlation_expectation(noisy, ph)) < 1e-12
    assert abs(correlation(noisy) - 0.7) < 1e-12


def test_scan_four_points(psi4):
    curve = correlation_scan(psi4, "c", [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    np.testing.assert_allclose(curve.values, [1, 0, -1, 0], atol=1e-12)
    assert curve.kind == "correlation"


def test_scan_needs_four_points(psi4):
    with pytest.raises(ValueError):
        correlation_scan(psi4, "c", [0, math.pi / 2, math.pi])


@pytest.mark.parametrize("mode", list("cdef"))
def test_ghz_scan_is_cosine(mode):
    ghz = ghz_state(("c", "d", "e", "f"))
    grid = np.linspace(0, 2 * np.pi, 13, endpoint=False)
    curve = correlation_scan(ghz, mode, grid)
    oracle = [correlation_oracle(ghz, {mode: t}) for t in grid]
    np.testing.assert_allclose(curve.values, oracle, atol=1e-12)
    np.testing.assert_allclose(curve.values, np.cos(grid), atol=1e-12)


def test_product_state_has_no_correlation():
    s = PureState.basis_state("cdef", "HHHH")
    grid = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    curve = correlation_scan(s, "c", grid)
    np.testing.assert_allclose(curve.values, 0, atol=1e-12)
    np.testing.assert_allclose([correlation_oracle(s, {"c": t}) for t in grid], 0, atol=1e-12)


def test_fringe_endpoints(psi4):
    curve = fringe_scan_linear(psi4, [0.0, math.pi / 2])
    pm = born_distribution(psi4, PM_BASIS)
    assert abs(curve.values[0] - pm.probabilities[0]) < 1e-12
    assert abs(curve.values[0] - 1 / 3) < 1e-12
    assert abs(curve.values[1]) < 1e-12


def test_fringe_shape(psi4):
    grid = np.linspace(0, np.pi, 24, endpoint=False)
    curve = fringe_scan_linear(psi4, grid)
    np.testing.assert_allclose(curve.values, np.cos(grid) ** 2 / 3, atol=1e-12)
    fit = fit_sinusoid(curve, harmonic=2)
    assert abs(fit.visibility - 1) < 1e-9


def test_fit_exact_recovery():
    grid = np.linspace(0, np.pi, 12, endpoint=False)
    fit = fit_sinusoid(FringeCurve(grid, np.cos(grid) ** 2 / 3), harmonic=2)
    assert abs(fit.visibility - 1) < 1e-9
    assert abs(fit.offset - 1 / 6) < 1e-12
    assert abs(fit.amplitude - 1 / 6) < 1e-12
    assert fit.residual_rms < 1e-12


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.05, 1.0),
    st.floats(0.0, 1.0),
    st.floats(-np.pi, np.pi),
    st.integers(1, 3),
)
def test_fit_recovers_parameters(offset, rel_amp, phase, k):
    amp = rel_amp * offset
    grid = np.linspace(0, 2 * np.pi, 17, endpoint=False)
    y = offset + amp * np.cos(k * grid + phase)
    est = SinusoidFit(harmonic=k).fit(grid, y)
    assert abs(est.offset_ - offset) < 1e-9
    assert abs(est.amplitude_ - amp) < 1e-9
    if amp > 1e-6:
        assert abs(np.angle(np.exp(1j * (est.phase_ - phase)))) < 1e-6
    np.testing.assert_allclose(est.predict(grid), y, atol=1e-9)


def test_fit_constant_curve():
    grid = np.linspace(0, np.pi, 8, endpoint=False)
    fit = fit_sinusoid(FringeCurve(grid, np.full(8, 0.2)), harmonic=2)
    assert fit.amplitude < 1e-15
    assert fit.visibility == pytest.approx(0.0, abs=1e-12)


def test_fit_degenerate_grid():
    # k=2 on a pi/2-spaced grid aliases cos(2 theta) onto +-1, sin onto 0
    grid = np.array([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    with pytest.raises(DegenerateFitError):
        SinusoidFit(harmonic=2).fit(grid, [1, 0, 1, 0])
    with pytest.raises(DegenerateFitError):
        SinusoidFit(harmonic=2).fit([0, 1, 2], [1, 0, 1])


def test_fringe_curve_validation():
    with pytest.raises(ValueError):
        FringeCurve([0, 0, 1], [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        FringeCurve([0, 1], [0.1, 1.5])
    FringeCurve([0, 1], [-0.5, 1.5], kind="correlation")


@pytest.mark.parametrize("v", np.linspace(0, 1, 6))
def test_noisy_fringe_visibility(psi4, v):
    grid = np.linspace(0, np.pi, 24, endpoint=False)
    curve = fringe_scan_linear(mix_with_white_noise(psi4, v), grid)
    fit = fit_sinusoid(curve, harmonic=2)
    # oracle: (max - min)/(max + min) of v cos^2/3 + (1 - v)/16
    hi, lo = v / 3 + (1 - v) / 16, (1 - v) / 16
    oracle = (hi - lo) / (hi + lo)
    assert abs(fit.visibility - oracle) < 1e-9
    pure_fit = fit_sinusoid(fringe_scan_linear(psi4, grid), harmonic=2)
    assert abs(mixed_visibility(pure_fit, v) - oracle) < 1e-9


def test_visibility_monotone_in_noise(psi4):
    grid = np.linspace(0, np.pi, 24, endpoint=False)
    vis = [
        fit_sinusoid(fringe_scan_linear(mix_with_white_noise(psi4, v), grid), 2).visibility
        for v in np.linspace(0, 1, 21)
    ]
    assert all(b >= a - 1e-12 for a, b in zip(vis, vis[1:]))


def test_estimator_api():
    est = SinusoidFit(harmonic=2, kind="probability")
    assert est.get_params() == {"harmonic": 2, "kind": "probability"}
    c = clone(est).set_params(harmonic=1)
    assert c.harmonic == 1 and est.harmonic == 2
    grid = np.linspace(0, np.pi, 10, endpoint=False)
    y = 0.5 + 0.25 * np.cos(grid)
    assert c.fit(grid.reshape(-1, 1), y).score(grid.reshape(-1, 1), y) == pytest.approx(1.0)


def test_estimator_not_fitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SinusoidFit().predict([0.0])


def test_sample_zero_events(psi4):
    s = sample_counts(born_distribution(psi4, PM_BASIS), 0, seed=1)
    assert s.counts.sum() == 0 and s.total == 0


def test_sample_degenerate():
    dist = OutcomeDistribution(("c", "d"), [0, 0, 1, 0])
    s = sample_counts(dist, 1234, seed=5)
    assert s.counts.tolist() == [0, 0, 1234, 0]
    np.testing.assert_allclose(s.std_error, np.sqrt([0, 0, 1234, 0]))


def test_sample_statistics(psi4):
    n = 10**5
    s = sample_counts(born_distribution(psi4, PM_BASIS), n, seed=2024)
    p_hat = s.frequencies[0]
    se = math.sqrt((1 / 3) * (2 / 3) / n)
    assert abs(p_hat - 1 / 3) < 5 * se


def test_sample_reproducible(psi4):
    d = born_distribution(psi4, PM_BASIS)
    a, b = sample_counts(d, 5000, seed=9), sample_counts(d, 5000, seed=9)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, sample_counts(d, 5000, seed=10).counts)


def test_sample_chi_square(psi4):
    d = born_distribution(psi4, PM_BASIS)
    support = d.probabilities > 1e-12
    for seed in range(5):
        s = sample_counts(d, 10**6, seed=seed)
        assert s.counts[~support].sum() == 0
        expected = d.probabilities[support] * 10**6
        _, pval = stats.chisquare(s.counts[support], expected)
        assert pval > 0.001
