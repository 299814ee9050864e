"""Product quadrature rules on polydisks, balls and spheres of C^n.

Every rule works one complex coordinate at a time in polar form
``z = c + sqrt(t) e^{i theta}`` so that ``dA = (1/2) dt dtheta``.  The angle
uses the periodic trapezoid rule (exact for trigonometric polynomials of
degree below the node count) and ``t`` uses Gauss-Legendre nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import QuadratureError

# Refinement schedules of (radial, angular) node counts per complex coordinate.
SCHEDULES = {
    1: ((32, 32), (64, 64), (128, 128), (256, 256), (512, 512)),
    2: ((24, 16), (32, 20), (48, 24), (64, 24)),
}
MAX_NODES = 2_500_000
CHUNK = 200_000


@lru_cache(maxsize=64)
def _gauss_legendre01(order):
    x, w = leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=64)
def _trapezoid(order):
    theta = 2.0 * np.pi * np.arange(order) / order
    return theta, np.full(order, 2.0 * np.pi / order)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in C^n with real weights.

    For ``kind`` "polydisk" and "ball" the weights integrate against Lebesgue
    measure dA; for "sphere" they integrate against normalized surface measure.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    radial_nodes: int
    angular_nodes: int
    radius: float
    kind: str
    center: tuple = ()

    @property
    def size(self):
        return len(self.weights)

    def chunks(self, size=CHUNK):
        for start in range(0, self.size, size):
            yield self.nodes[start:start + size], self.weights[start:start + size]


def _tensor(parts):
    """Cartesian product of per-coordinate (nodes, weights) pairs."""
    nodes = parts[0][0][:, None]
    weights = parts[0][1]
    for z, w in parts[1:]:
        nodes = np.concatenate(
            [np.repeat(nodes, len(z), axis=0), np.tile(z, len(nodes))[:, None]], axis=1)
        weights = np.outer(weights, w).ravel()
    return nodes, weights


def _check_size(n, radial_nodes, angular_nodes):
    count = (radial_nodes * angular_nodes) ** n
    if count > MAX_NODES:
        raise QuadratureError(f"rule with {count} nodes exceeds cap {MAX_NODES}")


def _center(center, n):
    if center is None:
        return np.zeros(n, dtype=complex)
    c = np.asarray(center, dtype=complex).reshape(-1)
    if c.size != n:
        raise ValueError(f"center has {c.size} coordinates, expected {n}")
    return c


def disk_rule_1d(radius, radial_nodes, angular_nodes, center=0j):
    """Polar product rule on the disk |z - center| <= radius in C."""
    x, wx = _gauss_legendre01(radial_nodes)
    theta, wt = _trapezoid(angular_nodes)
    t = radius ** 2 * x
    z = center + np.outer(np.sqrt(t), np.exp(1j * theta)).ravel()
    w = 0.5 * np.outer(radius ** 2 * wx, wt).ravel()
    return z, w


def polydisk_rule(n, radius, radial_nodes, angular_nodes, center=None):
    _check_size(n, radial_nodes, angular_nodes)
    c = _center(center, n)
    parts = [disk_rule_1d(radius, radial_nodes, angular_nodes, c[i]) for i in range(n)]
    nodes, weights = _tensor(parts)
    return QuadratureRule(n, nodes, weights, radial_nodes, angular_nodes, float(radius),
                          "polydisk", tuple(c))


def _simplex(n, scale, order):
    """Nodes/weights on {t_i >= 0, sum t_i <= scale} by stick breaking.

    Returns ``(t, w)`` with t of shape (N, n) and weights integrating dt_1..dt_n.
    """
    x, wx = _gauss_legendre01(order)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wgrids = np.meshgrid(*([wx] * n), indexing="ij")
    xs = [g.ravel() for g in grids]
    w = np.ones_like(xs[0])
    for wg in wgrids:
        w = w * wg.ravel()
    t = np.empty((xs[0].size, n))
    remaining = np.full(xs[0].size, float(scale))
    for i in range(n):
        t[:, i] = remaining * xs[i]
        w = w * remaining
        remaining = remaining - t[:, i]
    return t, w


def ball_rule(n, radius, radial_nodes, angular_nodes, center=None):
    """Rule on the closed ball |z - center| <= radius in C^n."""
    _check_size(n, radial_nodes, angular_nodes)
    c = _center(center, n)
    t, wt = _simplex(n, radius ** 2, radial_nodes)
    theta, wth = _trapezoid(angular_nodes)
    ang, wang = _tensor([(np.exp(1j * theta), wth)] * n)
    nodes = c[None, None, :] + np.sqrt(t)[:, None, :] * ang[None, :, :]
    weights = (0.5 ** n) * np.outer(wt, wang).ravel()
    return QuadratureRule(n, nodes.reshape(-1, n), weights, radial_nodes, angular_nodes,
                          float(radius), "ball", tuple(c))


def sphere_rule(n, radius, radial_nodes, angular_nodes):
    """Rule for normalized surface measure on the sphere |z| = radius.

    Uses the fact that (|zeta_1|^2, ..., |zeta_n|^2) is uniformly distributed
    on the standard simplex when zeta is uniform on the unit sphere of C^n.
    """
    theta, wth = _trapezoid(angular_nodes)
    ang, wang = _tensor([(np.exp(1j * theta), wth / (2.0 * np.pi))] * n)
    if n == 1:
        x = np.ones((1, 1))
        wx = np.ones(1)
    else:
        free, wfree = _simplex(n - 1, 1.0, radial_nodes)
        x = np.concatenate([free, 1.0 - free.sum(axis=1, keepdims=True)], axis=1)
        x = np.clip(x, 0.0, None)
        wx = wfree * math.factorial(n - 1)
    nodes = radius * np.sqrt(x)[:, None, :] * ang[None, :, :]
    weights = np.outer(wx, wang).ravel()
    return QuadratureRule(n, nodes.reshape(-1, n), weights, radial_nodes, angular_nodes,
                          float(radius), "sphere")


def gaussian_reach(alpha, degree=32):
    """Radius beyond which t^degree e^{-t/alpha} is negligible (t = |z|^2)."""
    return math.sqrt(alpha * (2.0 * degree + 40.0))


def levels(n):
    """Refinement schedule of (radial, angular) node counts within the size cap."""
    if n in SCHEDULES:
        return list(SCHEDULES[n])
    out = []
    r, a = 8, 8
    while (r * a) ** n <= MAX_NODES:
        out.append((r, a))
        r, a = r + 4, a + 2
    return out


def refine(evaluate, schedule, tol, what="integral", atol=0.0):
    """Run ``evaluate(radial, angular) -> (value, scale)`` until two levels agree.

    Convergence means ``max|value_k - value_{k-1}| <= max(tol * scale_k, atol)``.  Returns
    ``(value, error_estimate, (radial, angular))``.
    """
    prev = value = None
    for radial, angular in schedule:
        prev, (value, scale) = value, evaluate(radial, angular)
        value = np.asarray(value)
        if prev is not None:
            err = float(np.max(np.abs(value - prev))) if value.size else 0.0
            if err <= max(tol * max(float(scale), 1e-300), atol):
                return value, err, (radial, angular)
    raise QuadratureError(f"{what} did not converge to tol={tol:g}", estimates=(prev, value))


def gaussian_moment(m, alpha):
    """Closed form of int |z^m|^2 e^{-|z|^2/alpha} dA over C^n, for a multi-index m."""
    m = np.atleast_1d(m)
    n = m.size
    return math.exp(float(np.sum(m)) * math.log(alpha) + float(np.sum(gammaln(m + 1)))) \
        * (alpha * math.pi) ** n


def validate_rule(rule, alpha, max_degree):
    """Largest relative error of the rule on |z|^{2m} e^{-|z|^2/alpha}, |m| <= max_degree.

    Only the product moments |z_1|^{2 m_1} ... |z_n|^{2 m_n} are checked.
    """
    from .core import multi_indices

    z = rule.nodes
    gauss = np.exp(-np.sum(np.abs(z) ** 2, axis=1) / alpha) * rule.weights
    worst = 0.0
    for m in multi_indices(rule.n, max_degree):
        vals = np.prod(np.abs(z) ** (2 * np.asarray(m)), axis=1)
        approx = float(np.sum(vals * gauss))
        exact = gaussian_moment(np.asarray(m), alpha)
        worst = max(worst, abs(approx - exact) / exact)
    return worst
