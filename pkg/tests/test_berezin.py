import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phfock.berezin import (
    berezin_lp_norm,
    berezin_of_matrix,
    berezin_of_measure,
    decay_profile,
    knee_radius,
    matrix_power,
    partial_kernel_diagonal,
    sample_cloud,
    trace_via_berezin,
)
from phfock.core import FockParams, enumerate_basis
from phfock.measures import (
    AtomSet,
    BallIndicator,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
)
from phfock.spectral import trace_target
from phfock.toeplitz import ToeplitzMatrix, assemble, identity_spec

GAUSS = GaussianDensity(1.0, 1.0)


def _psd(params, D, seed):
    rng = np.random.default_rng(seed)
    trunc = enumerate_basis(params, D)
    A = rng.normal(size=(trunc.size, trunc.size)) + 1j * rng.normal(size=(trunc.size, trunc.size))
    return ToeplitzMatrix(params, trunc, A @ A.conj().T / trunc.size)


def test_measure_examples(p1):
    assert berezin_of_measure(AtomSet((((0.0,), 1.7),)), 0, p1) == pytest.approx(1.7)
    assert berezin_of_measure(GAUSS, 0, p1) == pytest.approx(math.pi / 2, rel=1e-9)


@pytest.mark.parametrize("n", [1, 2])
def test_lebesgue_normalization(n):
    params = FockParams(1.0, n)
    pts = sample_cloud(params, 20, 3.0, seed=11)
    vals = berezin_of_measure(identity_spec(params), pts, params)
    assert np.max(np.abs(vals - 1.0)) < 1e-6


def test_measure_values_nonnegative(p1):
    pts = sample_cloud(p1, 30, 4.0, seed=2)
    for spec in (GaussianDensity(1.0, 0.5, (1j,)), BallIndicator(1.0, 1.0, (1.0,)),
                 RadialShells(((1.0, 1.0),))):
        assert np.all(berezin_of_measure(spec, pts, p1) >= -1e-10)


def test_matrix_examples(p1):
    I = assemble(identity_spec(p1), enumerate_basis(p1, 6), p1)
    pts = sample_cloud(p1, 50, 6.0, seed=1)
    assert np.allclose(berezin_of_matrix(I, pts), 1.0, atol=1e-12)
    A = assemble(AtomSet((((0.0,), 0.9),)), enumerate_basis(p1, 5), p1)
    assert berezin_of_matrix(A, 0) == pytest.approx(0.9)
    G = assemble(GAUSS, enumerate_basis(p1, 8), p1)
    assert abs(berezin_of_matrix(G, 1.0) - berezin_of_measure(GAUSS, 1.0, p1)) < 1e-3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2]))
def test_matrix_berezin_bounded_by_norm(seed, n):
    params = FockParams(1.0, n)
    T = _psd(params, 3, seed)
    vals = berezin_of_matrix(T, sample_cloud(params, 100, 8.0, seed))
    assert np.max(np.abs(vals)) <= np.linalg.norm(T.entries, 2) + 1e-8
    assert np.min(vals) >= -1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_berezin_of_power_lower_bound(seed, k):
    # for positive T and unit x, <T^k x, x> >= <T x, x>^k (Jensen on the spectral measure)
    params = FockParams(1.0, 1)
    T = _psd(params, 4, seed)
    pts = sample_cloud(params, 20, 3.0, seed)
    lhs = berezin_of_matrix(matrix_power(T, k), pts)
    rhs = berezin_of_matrix(T, pts) ** k
    assert np.all(lhs >= rhs - 1e-10 * np.maximum(1.0, lhs))


def test_trace_via_berezin_matrix(p1, p2):
    I4 = assemble(identity_spec(p1), enumerate_basis(p1, 4), p1)
    assert trace_via_berezin(I4).value == pytest.approx(9.0, abs=1e-6)
    A = assemble(AtomSet((((0.0,), 1.4),)), enumerate_basis(p1, 4), p1)
    assert trace_via_berezin(A).value == pytest.approx(1.4, abs=1e-6)
    T = _psd(p2, 3, 5)
    assert trace_via_berezin(T).value == pytest.approx(np.trace(T.entries).real, rel=1e-8)


def test_trace_via_berezin_measure(p1):
    assert trace_via_berezin(AtomSet((((0.0,), 1.4),)), p1).value == pytest.approx(1.4, abs=1e-6)
    res = trace_via_berezin(GAUSS, p1)
    assert res.trace_class and res.value == pytest.approx(1.5 * math.pi, rel=1e-6)
    res = trace_via_berezin(ScaledLebesgue(1.0), p1)
    assert not res.trace_class and math.isinf(res.value)


@pytest.mark.parametrize("spec", [GaussianDensity(1.0, 0.8, (0.5 - 0.5j,)), RadialPowerGaussian(1.0, 1, 1.5),
                                  AtomSet((((1j,), 1.0), ((1.5,), 0.5))), RadialShells(((1.0, 0.5),)),
                                  BallIndicator(1.0, 1.0)],
                         ids=["gaussian", "radial-power", "atoms", "shells", "ball"])
def test_trace_formula_consistency(spec, p1):
    value = trace_via_berezin(spec, p1).value
    assert value == pytest.approx(trace_target(spec, p1), rel=1e-6)
    t12 = np.trace(assemble(spec, enumerate_basis(p1, 12), p1).entries).real
    t30 = np.trace(assemble(spec, enumerate_basis(p1, 30), p1).entries).real
    assert abs(value - t12) <= 1e-3 * value + (t30 - t12) * 1.01 + 1e-9


def test_lp_norm_examples(p1):
    trunc = enumerate_basis(p1, 4)
    zero = ToeplitzMatrix(p1, trunc, np.zeros((trunc.size, trunc.size), dtype=complex))
    assert berezin_lp_norm(zero, 1) == 0.0
    A = assemble(AtomSet((((0.0,), 1.3),)), trunc, p1)
    assert berezin_lp_norm(A, 1) == pytest.approx(1.3, abs=1e-6)
    I = assemble(identity_spec(p1), trunc, p1)
    assert berezin_lp_norm(I, math.inf) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        berezin_lp_norm(I, 0.5)


def test_lp_norm_trace_equality(p1):
    T = _psd(p1, 5, 9)
    assert berezin_lp_norm(T, 1) == pytest.approx(np.trace(T.entries).real, rel=1e-6)
    # higher p: weighted norms are finite and below the p = 1 value times ||T||^{(p-1)/p}
    n2 = berezin_lp_norm(T, 2)
    assert 0 < n2 <= math.sqrt(np.trace(T.entries).real * np.linalg.norm(T.entries, 2)) * (1 + 1e-6)


def test_plain_lp_norm_finite(p1):
    G = assemble(GAUSS, enumerate_basis(p1, 8), p1)
    for p in (1, 2):
        v = berezin_lp_norm(G, p, weighted=False)
        assert math.isfinite(v) and v > 0


def test_knee(p1):
    for D in (4, 8, 12):
        r = knee_radius(D, p1)
        ratio = partial_kernel_diagonal(r * r, D, p1)[0] / (2 * math.exp(r * r) - 1)
        assert ratio == pytest.approx(0.9, rel=1e-8)
    assert knee_radius(4, p1) < knee_radius(8, p1) < knee_radius(12, p1)
    assert partial_kernel_diagonal(0.0, 5, p1)[0] == 1.0


def test_profile_atom_closed_form(p1):
    c = 1.2
    radii = [0.0, 0.5, 1.0, 1.5, 2.0]
    prof = decay_profile(AtomSet((((0.0,), c),)), radii, p1)
    expected = [c / (2 * math.exp(r * r) - 1) for r in radii]
    assert np.allclose(prof.values, expected, rtol=1e-10)
    assert all(b < a for a, b in zip(prof.values, prof.values[1:])) and prof.decays


def test_profile_identity_and_gaussian(p1):
    prof = decay_profile(assemble(identity_spec(p1), enumerate_basis(p1, 8), p1), [0, 1, 2, 3, 4])
    assert np.allclose(prof.values, 1.0) and not prof.decays
    assert prof.knee is not None and prof.truncation_limited[-1]
    prof = decay_profile(GAUSS, [1, 2, 3, 4], p1)
    assert prof.decays
    weights = [(2 * math.exp(r * r) - 1) * math.exp(-r * r) for r in [1, 2, 3, 4]]
    assert np.allclose(prof.weights, weights)


def test_profile_deterministic(p2):
    a = decay_profile(GaussianDensity(1.0, 1.0, (0.5, 0.0)), [0.5, 1.5], p2, samples=6, seed=3)
    b = decay_profile(GaussianDensity(1.0, 1.0, (0.5, 0.0)), [0.5, 1.5], p2, samples=6, seed=3)
    assert a.values == b.values


@pytest.mark.parametrize("spec", [GaussianDensity(1.3, 0.6, (-0.7 - 1.2j,)), ScaledLebesgue(0.5),
                                  RadialPowerGaussian(1.2, 1, 0.9), RadialPowerGaussian(0.7, 3, 1.4)],
                         ids=["gaussian", "lebesgue", "radial-power-1", "radial-power-3"])
def test_closed_form_bump_matches_quadrature(spec):
    from phfock.berezin import _closed_form_bump_integrals
    from phfock.kernels import kernel_bump
    from phfock.measures import integrate_bump

    params = FockParams(0.7, 1)
    Z = sample_cloud(params, 4, 2.0, seed=4)
    exact = _closed_form_bump_integrals(spec, Z, params)
    numeric = [integrate_bump(lambda u, z=z: kernel_bump(z[None, :], u, params.alpha), spec, params, z,
                              1e-11).real for z in Z]
    assert np.allclose(exact, numeric, rtol=1e-11)
