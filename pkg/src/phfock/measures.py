"""Positive measures on C^n: catalog, weighted integration and ball masses.

A ``MeasureSpec`` is the measure mu itself.  Every routine that needs the
Gaussian factor e^{-|w|^2/alpha} applies it explicitly.  The one exception is
:class:`RadialShells`, which is *defined* through its weighted action

    int f e^{-|w|^2/alpha} dmu = sum_i c_i * mean of f over {|w| = r_i},

so shell ``i`` carries total mass ``c_i e^{r_i^2/alpha}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sci_integrate
from scipy import stats
from scipy.special import betainc, gammainc, gammaln

from . import quadrature as quad
from .core import as_point, as_points
from .errors import InadmissibleMeasureError, InputDomainError, QuadratureError
from .kernels import kernel_bump

DEFAULT_TOL = 1e-9
BALL_MASS_TOL = 1e-8
# Relative slack applied when deciding whether an atom lies on a closed ball.
BOUNDARY_SLACK = 1e-12


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value}")


def _as_center(center):
    if center is None:
        return None
    return tuple(complex(c) for c in np.atleast_1d(np.asarray(center, dtype=complex)))


def _center_vec(center, n):
    if center is None:
        return np.zeros(n, dtype=complex)
    if len(center) != n:
        raise ValueError(f"center has {len(center)} coordinates, expected {n}")
    return np.asarray(center, dtype=complex)


@dataclass(frozen=True)
class ScaledLebesgue:
    c: float

    def __post_init__(self):
        _positive("c", self.c)

    is_radial = True

    def density(self, u):
        return np.full(len(u), self.c)


@dataclass(frozen=True)
class GaussianDensity:
    c: float
    beta: float
    center: tuple | None = None

    def __post_init__(self):
        _positive("c", self.c)
        _positive("beta", self.beta)
        object.__setattr__(self, "center", _as_center(self.center))

    @property
    def is_radial(self):
        return self.center is None or not any(self.center)

    def density(self, u):
        w0 = _center_vec(self.center, u.shape[1])
        return self.c * np.exp(-self.beta * np.sum(np.abs(u - w0) ** 2, axis=1))


@dataclass(frozen=True)
class RadialPowerGaussian:
    c: float
    k: int
    s: float

    def __post_init__(self):
        _positive("c", self.c)
        _positive("s", self.s)
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a non-negative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    is_radial = True

    def density(self, u):
        t = np.sum(np.abs(u) ** 2, axis=1)
        return self.c * t ** self.k * np.exp(-self.s * t)


@dataclass(frozen=True)
class BallIndicator:
    c: float
    radius: float
    center: tuple | None = None

    def __post_init__(self):
        _positive("c", self.c)
        _positive("radius", self.radius)
        object.__setattr__(self, "center", _as_center(self.center))

    @property
    def is_radial(self):
        return self.center is None or not any(self.center)

    def density(self, u):
        b = _center_vec(self.center, u.shape[1])
        inside = np.sum(np.abs(u - b) ** 2, axis=1) <= self.radius ** 2 * (1 + BOUNDARY_SLACK)
        return np.where(inside, self.c, 0.0)


@dataclass(frozen=True)
class AtomSet:
    """Finitely many point masses ``((w_i, c_i), ...)``."""

    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        atoms = []
        for w, c in self.atoms:
            _positive("atom weight", c)
            atoms.append((_as_center(w), float(c)))
        if not atoms:
            raise ValueError("an atom set needs at least one atom")
        object.__setattr__(self, "atoms", tuple(atoms))

    is_radial = False

    def points(self, n):
        return np.array([_center_vec(w, n) for w, _ in self.atoms]).reshape(-1, n)

    def weights(self):
        return np.array([c for _, c in self.atoms])


@dataclass(frozen=True)
class RadialShells:
    """Weighted sphere averages ``((r_i, c_i), ...)``; see the module docstring."""

    shells: tuple = field(default_factory=tuple)

    def __post_init__(self):
        shells = []
        for r, c in self.shells:
            if not (math.isfinite(r) and r >= 0):
                raise ValueError(f"shell radius must be >= 0, got {r}")
            _positive("shell weight", c)
            shells.append((float(r), float(c)))
        if not shells:
            raise ValueError("a shell measure needs at least one shell")
        object.__setattr__(self, "shells", tuple(shells))

    is_radial = True


DENSITIES = (ScaledLebesgue, GaussianDensity, RadialPowerGaussian, BallIndicator)
MeasureSpec = ScaledLebesgue | GaussianDensity | RadialPowerGaussian | BallIndicator \
    | AtomSet | RadialShells


def is_density(spec):
    return isinstance(spec, DENSITIES)


# ---------------------------------------------------------------------------
# integration


def _check(values):
    values = np.asarray(values)
    if np.isnan(values).any():
        raise InputDomainError("integrand returned NaN on the quadrature support")
    return values


def _sphere_schedule(n):
    if n == 1:
        return [(1, a) for a in (32, 64, 128, 256, 512, 1024)]
    return [(8 + 8 * i, 8 + 8 * i) for i in range(1, 6)]


def _sphere_mean(h, n, radius, tol):
    if radius == 0.0:
        return complex(_check(h(np.zeros((1, n), dtype=complex)))[0]), 0.0

    def evaluate(radial, angular):
        rule = quad.sphere_rule(n, radius, radial, angular)
        vals = _check(h(rule.nodes))
        return np.sum(rule.weights * vals), np.sum(rule.weights * np.abs(vals))

    value, err, _ = quad.refine(evaluate, _sphere_schedule(n), tol, "sphere average")
    return complex(value), err


def _density_rule_integral(h, spec, params, tol, center, reach, atol=0.0):
    n = params.n

    if isinstance(spec, BallIndicator):
        b = _center_vec(spec.center, n)

        def build(radial, angular):
            return quad.ball_rule(n, spec.radius, radial, angular, b)
    else:
        def build(radial, angular):
            return quad.polydisk_rule(n, reach, radial, angular, center)

    def evaluate(radial, angular):
        rule = build(radial, angular)
        total = 0j
        scale = 0.0
        for nodes, w in rule.chunks():
            wd = w * (spec.c if isinstance(spec, BallIndicator) else spec.density(nodes))
            vals = _check(h(nodes))
            total += np.sum(wd * vals)
            scale += np.sum(wd * np.abs(vals))
        return total, scale

    value, err, _ = quad.refine(evaluate, quad.levels(n), tol, type(spec).__name__ + " integral",
                                atol)
    return complex(value), err


def _envelope(spec, params, weighted):
    """(center, effective alpha, extra degree) of the density (times e^{-|w|^2/alpha})."""
    n = params.n
    a = params.alpha
    if isinstance(spec, ScaledLebesgue):
        return (np.zeros(n, complex), a, 0) if weighted else (None, math.inf, 0)
    if isinstance(spec, GaussianDensity):
        w0 = _center_vec(spec.center, n)
        if weighted:
            return spec.beta * w0 / (spec.beta + 1.0 / a), 1.0 / (spec.beta + 1.0 / a), 0
        return w0, 1.0 / spec.beta, 0
    if isinstance(spec, RadialPowerGaussian):
        s = spec.s + 1.0 / a if weighted else spec.s
        return np.zeros(n, complex), 1.0 / s, spec.k
    return np.zeros(n, complex), a, 0


def integrate_measure(h, spec, params, tol=DEFAULT_TOL, center=None, reach=None, degree=16):
    """int h dmu, with no Gaussian factor applied.

    ``h`` maps an (N, n) array of points to N values.  For densities the
    integral runs over a polydisk of radius ``reach`` around ``center`` (the
    ball itself for :class:`BallIndicator`); defaults follow the density's own
    decay and assume ``h`` grows at most like a polynomial of degree
    ``2 * degree``.
    """
    n = params.n
    if isinstance(spec, AtomSet):
        return complex(np.sum(spec.weights() * _check(h(spec.points(n)))))
    if isinstance(spec, RadialShells):
        total = 0j
        for r, c in spec.shells:
            mean, _ = _sphere_mean(h, n, r, tol)
            total += c * math.exp(r * r / params.alpha) * mean
        return total
    if not isinstance(spec, BallIndicator) and reach is None:
        c0, a_eff, extra = _envelope(spec, params, weighted=False)
        if not math.isfinite(a_eff):
            raise ValueError("an integration reach is required for an unbounded density")
        center = c0 if center is None else center
        reach = quad.gaussian_reach(a_eff, degree + extra)
    return _density_rule_integral(h, spec, params, tol, center, reach)[0]


def integrate_weighted(g, spec, params, tol=DEFAULT_TOL, center=None, reach=None, degree=16):
    """int g(w) e^{-|w|^2/alpha} dmu(w)."""
    n = params.n
    alpha = params.alpha
    if isinstance(spec, RadialShells):
        total = 0j
        for r, c in spec.shells:
            mean, _ = _sphere_mean(g, n, r, tol)
            total += c * mean
        return total

    def h(u):
        return np.asarray(g(u)) * np.exp(-np.sum(np.abs(u) ** 2, axis=1) / alpha)

    if is_density(spec) and not isinstance(spec, BallIndicator) and reach is None:
        c0, a_eff, extra = _envelope(spec, params, weighted=True)
        center = c0 if center is None else center
        reach = float(np.linalg.norm(center)) + quad.gaussian_reach(a_eff, degree + extra)
    return integrate_measure(h, spec, params, tol, center=center, reach=reach, degree=degree)


def _bump_frame(spec, params, z):
    """Rule center and reach for integrands with envelope e^{-|w - z|^2/alpha} dmu(w)."""
    a = params.alpha
    n = params.n
    if isinstance(spec, GaussianDensity):
        w0 = _center_vec(spec.center, n)
        center = (z / a + spec.beta * w0) / (1.0 / a + spec.beta)
        a_eff, extra = 1.0 / (1.0 / a + spec.beta), 0
    elif isinstance(spec, RadialPowerGaussian):
        center = z / (1.0 + a * spec.s)
        a_eff, extra = 1.0 / (1.0 / a + spec.s), spec.k
    else:
        center, a_eff, extra = z, a, 0
    reach = float(np.linalg.norm(center)) + quad.gaussian_reach(a_eff, 4 + extra)
    return center, reach


def integrate_bump(h, spec, params, z, tol=DEFAULT_TOL, atol=0.0):
    """int h dmu where |h(w)| is dominated by e^{-|w - z|^2/alpha} up to polynomial factors.

    ``atol`` is an absolute floor for the refinement test, for callers that
    only need far-away, negligible values to a fixed absolute accuracy.
    """
    z = as_point(z, params.n)
    center, reach = _bump_frame(spec, params, z)
    if is_density(spec):
        if isinstance(spec, BallIndicator):
            reach = None
        return _density_rule_integral(h, spec, params, tol, center, reach, atol)[0]
    return integrate_measure(h, spec, params, tol)


# ---------------------------------------------------------------------------
# masses


def ball_volume(n, r):
    return math.pi ** n * r ** (2 * n) / math.factorial(n)


def sphere_area(n):
    """Surface area of the unit sphere S^{2n-1} in C^n = R^{2n}."""
    return 2.0 * math.pi ** n / math.gamma(n)


def cap_fraction(d, s, dist, r):
    """Fraction of the sphere |x| = s in R^d lying in the closed ball B(a, r), |a| = dist."""
    if s == 0.0:
        return 1.0 if dist <= r * (1 + BOUNDARY_SLACK) else 0.0
    if dist == 0.0:
        return 1.0 if s <= r * (1 + BOUNDARY_SLACK) else 0.0
    if dist + s <= r:
        return 1.0
    if s >= dist + r or dist >= s + r:
        return 0.0
    cos_t = (s * s + dist * dist - r * r) / (2.0 * s * dist)
    theta = math.acos(min(1.0, max(-1.0, cos_t)))
    if d == 2:
        return theta / math.pi
    half = 0.5 * betainc((d - 1) / 2.0, 0.5, math.sin(theta) ** 2)
    return half if theta <= math.pi / 2 else 1.0 - half


def _cap_volume(d, radius, h):
    """Volume of {x in B(0, radius) : x_1 >= h} in R^d."""
    full = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius ** d
    if h >= radius:
        return 0.0
    if h <= -radius:
        return full
    part = 0.5 * full * betainc((d + 1) / 2.0, 0.5, 1.0 - (h / radius) ** 2)
    return part if h >= 0 else full - part


def lens_volume(d, r1, r2, dist):
    """Volume of B(0, r1) intersected with B(x, r2), |x| = dist, in R^d."""
    if dist >= r1 + r2:
        return 0.0
    if dist <= abs(r1 - r2):
        rmin = min(r1, r2)
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * rmin ** d
    x1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist)
    return _cap_volume(d, r1, x1) + _cap_volume(d, r2, dist - x1)


def _radial_off_center_mass(spec, dist, r, n):
    d = 2 * n

    def shell_density(s):
        return spec.c * s ** (2 * spec.k) * math.exp(-spec.s * s * s) * s ** (d - 1)

    lo = max(0.0, dist - r)
    hi = dist + r
    inner = 0.0
    if r > dist:
        inner_hi = r - dist
        inner, _ = sci_integrate.quad(shell_density, 0.0, inner_hi, epsabs=0, epsrel=1e-12,
                                      limit=200)
        lo = inner_hi
    outer, _ = sci_integrate.quad(lambda s: shell_density(s) * cap_fraction(d, s, dist, r),
                                  lo, hi, epsabs=0, epsrel=1e-12, limit=200)
    return sphere_area(n) * (inner + outer)


def ball_mass(spec, a, r, params):
    """mu(B(a, r)) for the closed ball; exact or one-dimensional quadrature."""
    if not r > 0:
        raise ValueError("ball radius must be positive")
    n = params.n
    a = as_point(a, n)
    if isinstance(spec, ScaledLebesgue):
        return spec.c * ball_volume(n, r)
    if isinstance(spec, GaussianDensity):
        w0 = _center_vec(spec.center, n)
        lam = 2.0 * spec.beta * float(np.sum(np.abs(a - w0) ** 2))
        x = 2.0 * spec.beta * r * r
        frac = stats.chi2.cdf(x, 2 * n) if lam == 0.0 else stats.ncx2.cdf(x, 2 * n, lam)
        return spec.c * (math.pi / spec.beta) ** n * float(frac)
    if isinstance(spec, RadialPowerGaussian):
        dist = float(np.linalg.norm(a))
        if dist == 0.0:
            q = n + spec.k
            return spec.c * math.pi ** n / math.gamma(n) * math.exp(
                gammaln(q) - q * math.log(spec.s)) * float(gammainc(q, spec.s * r * r))
        return _radial_off_center_mass(spec, dist, r, n)
    if isinstance(spec, BallIndicator):
        b = _center_vec(spec.center, n)
        return spec.c * lens_volume(2 * n, spec.radius, r, float(np.linalg.norm(a - b)))
    if isinstance(spec, AtomSet):
        d2 = np.sum(np.abs(spec.points(n) - a) ** 2, axis=1)
        return float(np.sum(spec.weights()[d2 <= r * r * (1 + BOUNDARY_SLACK)]))
    if isinstance(spec, RadialShells):
        dist = float(np.linalg.norm(a))
        return float(sum(c * math.exp(s * s / params.alpha) * cap_fraction(2 * n, s, dist, r)
                         for s, c in spec.shells))
    raise TypeError(f"unsupported measure {spec!r}")


def ball_masses(spec, points, r, params):
    """Vectorised :func:`ball_mass` over an (N, n) batch of centres."""
    n = params.n
    pts = as_points(points, n)
    if isinstance(spec, ScaledLebesgue):
        return np.full(len(pts), spec.c * ball_volume(n, r))
    if isinstance(spec, GaussianDensity):
        w0 = _center_vec(spec.center, n)
        lam = 2.0 * spec.beta * np.sum(np.abs(pts - w0) ** 2, axis=1)
        x = 2.0 * spec.beta * r * r
        frac = np.where(lam == 0.0, stats.chi2.cdf(x, 2 * n),
                        stats.ncx2.cdf(x, 2 * n, np.maximum(lam, 1e-300)))
        return spec.c * (math.pi / spec.beta) ** n * frac
    if isinstance(spec, AtomSet):
        d2 = np.sum(np.abs(pts[:, None, :] - spec.points(n)[None, :, :]) ** 2, axis=2)
        return (d2 <= r * r * (1 + BOUNDARY_SLACK)) @ spec.weights()
    return np.array([ball_mass(spec, a, r, params) for a in pts])


def ball_mass_quadrature(spec, a, r, params, tol=BALL_MASS_TOL):
    """mu(B(a, r)) for a smooth density by direct quadrature over the ball."""
    if not is_density(spec) or isinstance(spec, BallIndicator):
        raise TypeError("quadrature ball masses apply to smooth densities only")
    n = params.n
    a = as_point(a, n)

    def evaluate(radial, angular):
        rule = quad.ball_rule(n, r, radial, angular, a)
        vals = spec.density(rule.nodes)
        val = float(np.sum(rule.weights * vals))
        return val, max(abs(val), 1e-300)

    value, _, _ = quad.refine(evaluate, quad.levels(n), tol, "ball mass")
    return float(value)


def total_mass(spec, params):
    """mu(C^n) in closed form (``inf`` for Lebesgue multiples)."""
    n = params.n
    if isinstance(spec, ScaledLebesgue):
        return math.inf
    if isinstance(spec, GaussianDensity):
        return spec.c * (math.pi / spec.beta) ** n
    if isinstance(spec, RadialPowerGaussian):
        q = n + spec.k
        return spec.c * math.pi ** n / math.gamma(n) * math.exp(gammaln(q) - q * math.log(spec.s))
    if isinstance(spec, BallIndicator):
        return spec.c * ball_volume(n, spec.radius)
    if isinstance(spec, AtomSet):
        return float(np.sum(spec.weights()))
    if isinstance(spec, RadialShells):
        return float(sum(c * math.exp(r * r / params.alpha) for r, c in spec.shells))
    raise TypeError(f"unsupported measure {spec!r}")


def total_gaussian_mass(spec, params, tol=DEFAULT_TOL):
    """int e^{-|w|^2/alpha} dmu(w)."""
    try:
        value = integrate_weighted(lambda u: np.ones(len(u)), spec, params, tol)
    except QuadratureError as exc:
        raise InadmissibleMeasureError(f"weighted mass did not converge: {exc}") from exc
    if not math.isfinite(value.real):
        raise InadmissibleMeasureError("weighted mass is infinite")
    return float(value.real)


def effective_radius(spec, params, eps=1e-8):
    """Radius outside which the measure has no structure beyond relative size ``eps``.

    Lebesgue multiples are homogeneous and get 0.
    """
    n = params.n
    if isinstance(spec, ScaledLebesgue):
        return 0.0
    if isinstance(spec, GaussianDensity):
        return float(np.linalg.norm(_center_vec(spec.center, n))) + math.sqrt(
            math.log(1.0 / eps) / spec.beta)
    if isinstance(spec, RadialPowerGaussian):
        t_peak = spec.k / spec.s
        log_peak = spec.k * math.log(t_peak) - spec.s * t_peak if spec.k else 0.0
        t = max(t_peak, 1.0 / spec.s)
        while spec.k * math.log(t) - spec.s * t > log_peak + math.log(eps):
            t *= 1.25
        return math.sqrt(t)
    if isinstance(spec, BallIndicator):
        return float(np.linalg.norm(_center_vec(spec.center, n))) + spec.radius
    if isinstance(spec, AtomSet):
        return float(np.max(np.linalg.norm(spec.points(n), axis=1)))
    if isinstance(spec, RadialShells):
        return max(r for r, _ in spec.shells)
    raise TypeError(f"unsupported measure {spec!r}")


@dataclass
class AdmissibilityReport:
    passed: bool
    probes: list
    values: list
    log_values: list
    messages: list


def admissibility_check(spec, params, probes, tol=DEFAULT_TOL):
    """Evaluate int |K_ph(z, w)|^2 e^{-|w|^2/alpha} dmu(w) at each probe z.

    Values are accumulated as e^{|z|^2/alpha} * int kernel_bump, so their
    logarithms stay finite even when the values themselves overflow.
    """
    n = params.n
    values, logs, messages = [], [], []
    passed = True
    for z in as_points(probes, n):
        try:
            inner = integrate_bump(lambda u, z=z: kernel_bump(z[None, :], u, params.alpha),
                                   spec, params, z, tol).real
        except QuadratureError as exc:
            passed = False
            values.append(math.inf)
            logs.append(math.inf)
            messages.append(str(exc))
            continue
        shift = float(np.sum(np.abs(z) ** 2)) / params.alpha
        log_value = math.log(inner) + shift if inner > 0 else -math.inf
        ok = math.isfinite(inner) and log_value < math.inf
        passed = passed and ok
        with np.errstate(over="ignore"):
            values.append(float(inner * np.exp(shift)))
        logs.append(log_value)
        messages.append("ok" if ok else "divergent")
    return AdmissibilityReport(passed, [as_point(z, n) for z in as_points(probes, n)],
                               values, logs, messages)
