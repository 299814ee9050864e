"""Berezin transforms of measures and truncated matrices, and the trace formula.

For a matrix the transform is the Rayleigh quotient v* T v / |v|^2 with
``v = conj(b(z))`` the truncated kernel vector, so it never exceeds ||T||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from . import quadrature as quad
from .core import as_points, basis_matrix, compositions, unit_rows
from .errors import QuadratureError
from .kernels import kernel_bump, log_diagonal
from .measures import (
    DEFAULT_TOL,
    AtomSet,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
    _center_vec,
    _sphere_schedule,
    effective_radius,
    integrate_bump,
    is_density,
)
from .toeplitz import ToeplitzMatrix

KNEE_FRACTION = 0.9


def _laguerre(j, x):
    """L_j(x) by the three-term recurrence (x may be complex)."""
    prev, cur = np.ones_like(x), 1.0 - x
    if j == 0:
        return prev
    for m in range(1, j):
        prev, cur = cur, ((2 * m + 1 - x) * cur - m * prev) / (m + 1)
    return cur


def _closed_form_bump_integrals(spec, Z, params):
    """Exact bump integrals for Lebesgue, Gaussian and radial power-Gaussian densities.

    With s = <z, u>/alpha, |K_ph|^2 = 2 e^{2 Re s} + 2 Re e^{2s} - 4 Re e^s + 1,
    and each term integrates coordinate-wise by
    int |u|^{2j} e^{-gamma |u|^2 + A u + B conj(u)} dA = pi j! gamma^{-j-1} e^{AB/gamma} L_j(-AB/gamma).
    """
    alpha = params.alpha
    n = params.n
    k = 0
    if isinstance(spec, ScaledLebesgue):
        beta, w0 = 0.0, np.zeros(n, dtype=complex)
    elif isinstance(spec, GaussianDensity):
        beta, w0 = spec.beta, _center_vec(spec.center, n)
    else:
        beta, w0, k = spec.s, np.zeros(n, dtype=complex), spec.k
    gamma = 1.0 / alpha + beta
    A0 = np.broadcast_to(beta * np.conj(w0), Z.shape)
    B0 = np.broadcast_to(beta * w0, Z.shape)
    zt = Z / alpha
    base = -np.sum(np.abs(Z) ** 2, axis=1) / alpha - beta * float(np.sum(np.abs(w0) ** 2)) \
        + n * math.log(math.pi / gamma) + math.log(spec.c)
    # |u|^{2k} = sum over compositions j of k of multinomial(k; j) prod |u_i|^{2 j_i}
    parts = [(math.factorial(k) / math.prod(math.factorial(v) for v in j), j)
             for j in compositions(k, n)]

    def term(A, B):
        x = A * B / gamma
        poly = 0.0
        for coef, j in parts:
            factor = coef
            for i, ji in enumerate(j):
                if ji:
                    factor = factor * math.factorial(ji) / gamma ** ji * _laguerre(ji, -x[:, i])
            poly = poly + factor
        return (np.exp(base + np.sum(x, axis=1)) * poly).real

    out = 2.0 * term(A0 + np.conj(zt), B0 + zt)
    out += 2.0 * term(A0, B0 + 2.0 * zt)
    out -= 4.0 * term(A0, B0 + zt)
    out += term(A0, B0)
    return np.maximum(out, 0.0)


def _bump_integrals(spec, Z, params, tol, atol=0.0):
    """int |K_ph(z, u)|^2 e^{-(|z|^2 + |u|^2)/alpha} dmu(u) for each row z of Z."""
    alpha = params.alpha
    n = params.n
    if isinstance(spec, (GaussianDensity, ScaledLebesgue, RadialPowerGaussian)):
        return _closed_form_bump_integrals(spec, Z, params)
    if isinstance(spec, AtomSet):
        W = spec.points(n)
        return kernel_bump(Z[:, None, :], W[None, :, :], alpha) @ spec.weights()
    if isinstance(spec, RadialShells):
        out = np.zeros(len(Z))
        for r, c in spec.shells:
            scale = c * math.exp(r * r / alpha)
            if r == 0.0:
                out += scale * kernel_bump(Z, np.zeros(n), alpha)
                continue

            def evaluate(radial, angular, r=r):
                rule = quad.sphere_rule(n, r, radial, angular)
                vals = kernel_bump(Z[:, None, :], rule.nodes[None, :, :], alpha) @ rule.weights
                return vals, float(np.max(np.abs(vals)))

            vals, _, _ = quad.refine(evaluate, _sphere_schedule(n), tol, "shell Berezin", atol)
            out += scale * vals
        return out
    return np.array([integrate_bump(lambda u, z=z: kernel_bump(z[None, :], u, alpha),
                                    spec, params, z, tol, atol).real for z in Z])


def berezin_of_measure(spec, z, params, tol=DEFAULT_TOL):
    """int |K_ph(z,u)|^2 / (e^{|u|^2/alpha} (2 e^{|z|^2/alpha} - 1)) dmu(u).

    ``z`` may be a single point or an (N, n) batch; returns a float or array.
    """
    Z = as_points(z, params.n)
    x = np.sum(np.abs(Z) ** 2, axis=1) / params.alpha
    values = _bump_integrals(spec, Z, params, tol) / (2.0 - np.exp(-x))
    return float(values[0]) if np.ndim(z) <= 1 and len(Z) == 1 else values


def _matrix(T):
    return T.entries if isinstance(T, ToeplitzMatrix) else np.asarray(T, dtype=complex)


def berezin_of_matrix(T, z, params=None):
    """v* T v / |v|^2 with v the truncated kernel vector at z (batched like above)."""
    params = params or T.params
    Z = as_points(z, params.n)
    V = np.conj(unit_rows(T.trunc, Z, params))
    E = _matrix(T)
    values = np.real(np.sum(np.conj(V) * (V @ E.T), axis=1))
    return float(values[0]) if np.ndim(z) <= 1 and len(Z) == 1 else values


def matrix_power(T, k):
    """Toeplitz-matrix container holding the k-th matrix power of T."""
    E = np.linalg.matrix_power(_matrix(T), k)
    return ToeplitzMatrix(T.params, T.trunc, E, 0.0, None, {"power": k})


def partial_kernel_diagonal(t, degree, params):
    """Truncated sum of |b_m(z)|^2 over both blocks at |z|^2 = t."""
    x = np.asarray(t, dtype=float) / params.alpha
    q = np.arange(degree + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = q[None, :] * np.log(np.atleast_1d(x))[:, None] - gammaln(q + 1)[None, :]
    logs[:, 0] = 0.0
    return 2.0 * np.sum(np.exp(logs), axis=1) - 1.0


def knee_radius(degree, params, fraction=KNEE_FRACTION):
    """Radius where the truncated kernel diagonal falls to ``fraction`` of 2e^{|z|^2/alpha} - 1."""
    def gap(t):
        log_ratio = math.log(partial_kernel_diagonal(t, degree, params)[0]) \
            - float(log_diagonal(t, params.alpha))
        return log_ratio - math.log(fraction)

    hi = params.alpha * (degree + 2.0)
    while gap(hi) > 0:
        hi *= 2.0
    return math.sqrt(brentq(gap, 0.0, hi, xtol=1e-12))


def _matrix_trace_integrand(T, params):
    E = _matrix(T)

    def integrand(nodes):
        V = np.conj(basis_matrix(T.trunc, nodes, params, weighted=True))
        return np.real(np.sum(np.conj(V) * (V @ E.T), axis=1))

    return integrand


def _polydisk_integral(f, params, reach, tol, center=None):
    n = params.n

    def evaluate(radial, angular):
        rule = quad.polydisk_rule(n, reach, radial, angular, center)
        total = scale = 0.0
        for nodes, w in rule.chunks():
            vals = f(nodes)
            total += float(np.sum(w * vals))
            scale += float(np.sum(w * np.abs(vals)))
        return total, scale

    value, _, _ = quad.refine(evaluate, quad.levels(n), tol, "Berezin integral")
    return float(value)


@dataclass
class TraceViaBerezin:
    value: float
    trace_class: bool
    route: str

    def to_dict(self):
        return dict(self.__dict__)


def trace_via_berezin(obj, params=None, tol=DEFAULT_TOL, growth_steps=4):
    """(alpha pi)^{-n} int Berezin(z) K(z, z) e^{-|z|^2/alpha} dA(z).

    For a matrix the kernel diagonal is its truncated partial sum, which makes
    the integral reproduce the matrix trace exactly.  For a measure the
    Berezin transform is integrated against the closed-form weight over discs
    of growing radius; a value that keeps changing means "not trace class".
    """
    if isinstance(obj, ToeplitzMatrix):
        params = params or obj.params
        reach = quad.gaussian_reach(params.alpha, obj.degree + 2)
        value = _polydisk_integral(_matrix_trace_integrand(obj, params), params, reach, tol)
        return TraceViaBerezin(value / params.volume, True, "matrix")

    spec = obj
    n = params.n
    alpha = params.alpha

    # Far from the support the inner integrals are negligible; an absolute floor
    # keeps their refinement from chasing relative accuracy on values like 1e-120.
    atol = tol * 1e-3 * params.volume

    def outer(nodes):
        # Berezin(z) * (2 e^{|z|^2/alpha} - 1) e^{-|z|^2/alpha} is exactly the bump integral
        return _bump_integrals(spec, nodes, params, tol, atol)

    reach = max(effective_radius(spec, params, eps=1e-18), 0.0) + math.sqrt(40.0 * alpha)
    radial = isinstance(spec, RadialShells) or (is_density(spec) and spec.is_radial)
    prev = None
    for _ in range(growth_steps):
        try:
            if radial:
                value = _radial_outer(outer, params, reach, tol)
            else:
                value = _polydisk_integral(outer, params, reach, tol) / params.volume
        except QuadratureError:
            return TraceViaBerezin(math.inf, False, "measure")
        if prev is not None and abs(value - prev) <= 1e3 * tol * abs(value):
            return TraceViaBerezin(value, True, "measure")
        prev = value
        reach *= 2.0
    return TraceViaBerezin(math.inf, False, "measure")


def _radial_outer(f, params, reach, tol):
    """(alpha pi)^{-n} int f dA for f depending only on |z|, by 1-D quadrature in t = |z|^2."""
    n = params.n

    def evaluate(order, _):
        x, w = quad._gauss_legendre01(order)
        t = reach * reach * x
        pts = np.zeros((order, n), dtype=complex)
        pts[:, 0] = np.sqrt(t)
        vals = f(pts) * t ** (n - 1)
        value = math.pi ** n / math.factorial(n - 1) * reach * reach * float(np.sum(w * vals))
        return value, abs(value)

    schedule = [(o, 0) for o in (32, 64, 128, 256)]
    value, _, _ = quad.refine(evaluate, schedule, tol, "radial Berezin integral")
    return float(value) / params.volume


def berezin_lp_norm(T, p, params=None, tol=DEFAULT_TOL, weighted=True, samples=None):
    """L^p norm of the matrix Berezin transform.

    ``weighted=True`` uses the measure (alpha pi)^{-n} W_D(z) e^{-|z|^2/alpha} dA
    with W_D the truncated kernel diagonal, so p = 1 reproduces the trace of a
    positive matrix.  ``weighted=False`` integrates against plain dA over the
    disc where the truncation is trusted (out to the knee radius).
    ``p = inf`` returns the largest |value| over ``samples`` (default: a
    seeded cloud).
    """
    params = params or T.params
    E = _matrix(T)
    if not np.any(E):
        return 0.0
    if p == math.inf:
        pts = samples if samples is not None else sample_cloud(params, 200, 3.0, seed=0)
        return float(np.max(np.abs(berezin_of_matrix(T, pts, params))))
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if weighted:
        def f(nodes):
            V = np.conj(basis_matrix(T.trunc, nodes, params, weighted=True))
            norm2 = np.sum(np.abs(V) ** 2, axis=1)
            quad_form = np.real(np.sum(np.conj(V) * (V @ E.T), axis=1))
            with np.errstate(invalid="ignore", divide="ignore"):
                ber = np.where(norm2 > 0, quad_form / np.where(norm2 > 0, norm2, 1.0), 0.0)
            return np.abs(ber) ** p * norm2

        reach = quad.gaussian_reach(params.alpha, T.degree + 2)
        value = _polydisk_integral(f, params, reach, tol) / params.volume
    else:
        knee = knee_radius(T.degree, params)

        def f(nodes):
            inside = np.sum(np.abs(nodes) ** 2, axis=1) <= knee ** 2
            return np.where(inside, np.abs(berezin_of_matrix(T, nodes, params)) ** p, 0.0)

        value = _ball_integral(f, params, knee, tol)
    return float(value) ** (1.0 / p)


def _ball_integral(f, params, radius, tol):
    def evaluate(radial, angular):
        rule = quad.ball_rule(params.n, radius, radial, angular)
        vals = f(rule.nodes)
        total = float(np.sum(rule.weights * vals))
        return total, float(np.sum(rule.weights * np.abs(vals)))

    value, _, _ = quad.refine(evaluate, quad.levels(params.n), tol, "Berezin L^p integral")
    return float(value)


def sample_cloud(params, count, radius, seed=0):
    """``count`` seeded points uniformly distributed in the ball of the given radius."""
    rng = np.random.default_rng(seed)
    n = params.n
    g = rng.standard_normal((count, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, count) ** (1.0 / (2 * n))
    g *= r[:, None]
    return g[:, 0::2] + 1j * g[:, 1::2]


def sphere_samples(params, radius, count, seed=0):
    n = params.n
    if n == 1:
        theta = 2.0 * np.pi * np.arange(count) / count
        return (radius * np.exp(1j * theta))[:, None]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, 2 * n))
    g *= radius / np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, 0::2] + 1j * g[:, 1::2]


@dataclass
class BerezinProfile:
    radii: list
    values: list
    weights: list
    knee: float | None
    truncation_limited: list
    decays: bool
    seed: int
    samples: int = field(default=0)

    def to_dict(self):
        return dict(self.__dict__)


def decay_profile(obj, radii, params=None, samples=16, seed=0, knee_fraction=KNEE_FRACTION,
                  tol=DEFAULT_TOL):
    """Sup of |Berezin| over a sphere sample at each radius.

    ``decays`` is true when the profile is non-increasing over the trusted
    radii and ends strictly below where it started.  For matrices the radii
    beyond the knee are flagged as truncation-limited and left out of that
    decision.
    """
    is_matrix = isinstance(obj, ToeplitzMatrix)
    params = params or obj.params
    knee = knee_radius(obj.degree, params, knee_fraction) if is_matrix else None
    values = []
    for r in radii:
        pts = sphere_samples(params, r, 1 if r == 0 else samples, seed)
        vals = berezin_of_matrix(obj, pts, params) if is_matrix \
            else berezin_of_measure(obj, pts, params, tol)
        values.append(float(np.max(np.abs(np.atleast_1d(vals)))))
    limited = [bool(is_matrix and r > knee) for r in radii]
    trusted = [v for v, lim in zip(values, limited) if not lim]
    decays = len(trusted) >= 2 and trusted[-1] < trusted[0] * (1 - 1e-9) and all(
        b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(trusted, trusted[1:]))
    weights = [float(np.exp(log_diagonal(r * r, params.alpha) - r * r / params.alpha))
               for r in radii]
    return BerezinProfile([float(r) for r in radii], values, weights, knee, limited, bool(decays),
                          seed, samples)
