"""Lattice ball-mass diagnostics: Carleson and vanishing-Carleson verdicts.

Masses mu(B(z_k, r)) are sampled on the lattice r Z^{2n} inside the cube
[-L, L]^{2n}.  Verdicts only speak about that window; when the measure has
structure too close to the window edge they come back ``"inconclusive"``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import FockParams, as_point
from .errors import ResourceError
from .measures import ball_mass, ball_masses, effective_radius, integrate_bump

DEFAULT_CAP = 200_000
VANISH_THRESHOLD = 1e-2
TREND_EPS = 1e-2
LOG_FLOOR = 1e-300
NECESSITY_SLACK = 1e-8


@dataclass(frozen=True)
class LatticeWindow:
    r: float
    L: float
    params: FockParams = field(default_factory=FockParams)
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("lattice spacing r must be positive")
        if not self.L >= self.r:
            raise ValueError("window half-width L must be at least r")

    @property
    def steps(self):
        return int(math.floor(self.L / self.r + 1e-12))

    @property
    def count(self):
        return (2 * self.steps + 1) ** (2 * self.params.n)


def lattice_points(window):
    """Lattice points of the window as an (N, n) array.

    Sorted by distance from the origin, then lexicographically by the real
    coordinates (re_1, im_1, ..., re_n, im_n).
    """
    if window.count > window.cap:
        raise ResourceError(
            f"window has {window.count} lattice points, above the cap {window.cap}; "
            "use a larger spacing r or a smaller half-width L")
    K = window.steps
    d = 2 * window.params.n
    ks = np.array(list(itertools.product(range(-K, K + 1), repeat=d)), dtype=int).reshape(-1, d)
    order = np.lexsort(tuple(ks[:, i] for i in reversed(range(d))) + (np.sum(ks * ks, axis=1),))
    ks = ks[order]
    return window.r * (ks[:, 0::2] + 1j * ks[:, 1::2])


@dataclass
class CarlesonReport:
    r: float
    L: float
    n: int
    points: np.ndarray
    masses: np.ndarray
    sup_mass: float
    annulus_radii: list
    annulus_profile: list
    lp_sums: dict
    slope: float
    bounded: str
    vanishing: str
    effective_radius: float

    def to_dict(self):
        return {
            "window": {"r": self.r, "L": self.L, "n": self.n, "points": len(self.masses)},
            "sup_mass": self.sup_mass,
            "annulus_radii": self.annulus_radii,
            "annulus_profile": self.annulus_profile,
            "lp_sums": {str(p): v for p, v in self.lp_sums.items()},
            "trend_slope": self.slope,
            "verdicts": {"bounded": self.bounded, "vanishing": self.vanishing},
            "effective_radius": self.effective_radius,
            "masses": [float(m) for m in self.masses],
        }


def _annuli(points, masses, r, L):
    width = 2.0 * r
    count = max(1, int(math.floor(L / width + 1e-12)))
    radii = np.linalg.norm(points, axis=1)
    inner, sups = [], []
    for j in range(count):
        sel = (radii >= j * width) & (radii < (j + 1) * width)
        if sel.any():
            inner.append(j * width)
            sups.append(float(np.max(masses[sel])))
    return inner, sups


def _compute_masses(spec, points, r, params, threads):
    if threads <= 1 or len(points) < 64:
        return ball_masses(spec, points, r, params)
    chunks = np.array_split(points, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: ball_masses(spec, c, r, params), chunks))
    return np.concatenate(parts)


def carleson_scan(spec, window, p_list=(1.0, 2.0), vanish_threshold=VANISH_THRESHOLD,
                  trend_eps=TREND_EPS, threads=1):
    """Ball masses on the lattice window and the resulting verdicts.

    ``bounded`` is "yes" when the Theil-Sen slope of log(annulus sup) against
    annulus radius is at most ``trend_eps`` and the outer annuli stay below the
    global sup.  ``vanishing`` is "yes" when the outermost annulus sup is at
    most ``vanish_threshold`` times the global sup.
    """
    for p in p_list:
        if not p >= 1:
            raise ValueError(f"p must be >= 1, got {p}")
    params = window.params
    points = lattice_points(window)
    masses = np.asarray(_compute_masses(spec, points, window.r, params, threads), dtype=float)
    sup_mass = float(np.max(masses))
    inner, sups = _annuli(points, masses, window.r, window.L)

    logs = np.log(np.maximum(sups, LOG_FLOOR))
    slope = float(stats.theilslopes(logs, inner)[0]) if len(sups) >= 2 else 0.0
    outer_ok = max(sups[-3:]) <= sup_mass
    bounded = "yes" if outer_ok and slope <= trend_eps else "no"
    vanishing = "yes" if sups[-1] <= vanish_threshold * sup_mass or sup_mass == 0.0 else "no"

    reach = effective_radius(spec, params)
    if reach > window.L - 2.0 * window.r:
        bounded = vanishing = "inconclusive"

    lp_sums = {float(p): float(np.sum(masses ** p)) for p in p_list}
    return CarlesonReport(window.r, window.L, params.n, points, masses, sup_mass, inner, sups,
                          lp_sums, slope, bounded, vanishing, float(reach))


@dataclass
class NecessityResult:
    passed: bool
    mass: float
    bound: float
    integral: float


def necessity_constant_check(spec, a, r, params, slack=NECESSITY_SLACK, tol=1e-10):
    """Check mu(B(a, r)) <= e^{r^2/alpha} * int |f_a|^2 e^{-|z|^2/alpha} dmu.

    ``f_a(z) = e^{<z, a>/alpha - |a|^2/(2 alpha)}`` is the normalized holomorphic
    kernel at ``a``, so the integrand is e^{-|z - a|^2/alpha}.
    """
    a = as_point(a, params.n)
    integral = integrate_bump(
        lambda u: np.exp(-np.sum(np.abs(u - a) ** 2, axis=1) / params.alpha),
        spec, params, a, tol).real
    mass = ball_mass(spec, a, r, params)
    bound = math.exp(r * r / params.alpha) * integral
    return NecessityResult(mass <= bound * (1.0 + slack), float(mass), float(bound),
                           float(integral))


def overlap_count(window, samples):
    """Largest number of balls B(z_k, 2r) containing any one of ``samples``."""
    points = lattice_points(window)
    pts = np.asarray(samples, dtype=complex).reshape(-1, window.params.n)
    worst = 0
    for start in range(0, len(pts), 512):
        block = pts[start:start + 512]
        d2 = np.sum(np.abs(block[:, None, :] - points[None, :, :]) ** 2, axis=2)
        worst = max(worst, int(np.max(np.sum(d2 < (2.0 * window.r) ** 2, axis=1))))
    return worst


def overlap_bound(n):
    return 5 ** (2 * n)


def carleson_norm_bound(sup_mass, r, params):
    """Upper bound for ||T_mu|| from the sup of lattice ball masses.

    Combines the weighted sub-mean-value estimate for holomorphic parts,
    |g(w)|^2 e^{-|w|^2/alpha} <= n! e^{r^2/alpha} / (pi^n r^{2n}) int_{B(w,r)} |g|^2 e^{-|z|^2/alpha} dA,
    with the overlap count 5^{2n} of the balls B(z_k, 2r), and a factor 2 from
    |g + conj(h)|^2 <= 2(|g|^2 + |h|^2).  Requires the lattice balls B(z_k, r)
    to cover C^n, which holds for n <= 2.
    """
    n = params.n
    if n > 2:
        raise ValueError("the lattice balls B(z_k, r) cover C^n only for n <= 2")
    a = params.alpha
    return 2.0 * overlap_bound(n) * math.factorial(n) * a ** n * math.exp(r * r / a) \
        / r ** (2 * n) * sup_mass
