"""Parameters, multi-indices and the orthonormal pluriharmonic monomial basis.

The truncated space of degree ``D`` is spanned by

    b_m(z) = z^m / sqrt(alpha^{|m|} m!)          (holomorphic, |m| <= D)
    conj(b_m(z))                                  (anti-holomorphic, 1 <= |m| <= D)

which is orthonormal for <f, g> = (alpha pi)^{-n} int f conj(g) e^{-|z|^2/alpha} dA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import comb, gammaln

from . import quadrature as quad
from .errors import InputDomainError

LOG_FLOOR = -700.0
HOLO = "holo"
ANTI = "anti"


@dataclass(frozen=True)
class FockParams:
    alpha: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def volume(self):
        """(alpha pi)^n, the total mass of e^{-|z|^2/alpha} dA."""
        return (self.alpha * math.pi) ** self.n


def as_points(z, n):
    """Coerce a point or batch of points to a complex array of shape (N, n)."""
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size == n else arr.reshape(-1, 1)
    if arr.shape[-1] != n:
        raise ValueError(f"points have dimension {arr.shape[-1]}, expected {n}")
    return arr


def as_point(z, n):
    pts = as_points(z, n)
    if pts.shape[0] != 1:
        raise ValueError("expected a single point")
    return pts[0]


def compositions(total, parts):
    """Multi-indices of length ``parts`` summing to ``total``, in decreasing lex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multi_indices(n, degree):
    """All multi-indices with |m| <= degree, graded then decreasing-lexicographic."""
    out = []
    for d in range(degree + 1):
        out.extend(compositions(d, n))
    return out


@dataclass(frozen=True)
class BasisIndex:
    kind: str
    m: tuple

    def __post_init__(self):
        if self.kind not in (HOLO, ANTI):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        m = tuple(int(v) for v in self.m)
        if any(v < 0 for v in m):
            raise ValueError(f"negative multi-index {m}")
        if self.kind == ANTI and sum(m) == 0:
            raise ValueError("the constant belongs to the holomorphic block only")
        object.__setattr__(self, "m", m)

    @classmethod
    def holo(cls, *m):
        return cls(HOLO, m)

    @classmethod
    def anti(cls, *m):
        return cls(ANTI, m)

    @property
    def degree(self):
        return sum(self.m)

    @property
    def is_anti(self):
        return self.kind == ANTI

    def log_norm(self, alpha):
        """log sqrt(alpha^{|m|} m!)."""
        return 0.5 * (self.degree * math.log(alpha) + sum(math.lgamma(v + 1) for v in self.m))

    def label(self):
        prefix = "H" if self.kind == HOLO else "A"
        return prefix + "(" + ",".join(map(str, self.m)) + ")"


def basis_count(n, degree):
    return 2 * int(comb(n + degree, n, exact=True)) - 1


@dataclass(frozen=True)
class BasisTruncation:
    n: int
    degree: int
    indices: tuple

    @property
    def size(self):
        return len(self.indices)

    @cached_property
    def exponents(self):
        return np.array([idx.m for idx in self.indices], dtype=int).reshape(self.size, self.n)

    @cached_property
    def anti_mask(self):
        return np.array([idx.is_anti for idx in self.indices], dtype=bool)

    @property
    def holo_mask(self):
        return ~self.anti_mask

    @cached_property
    def degrees(self):
        return self.exponents.sum(axis=1)

    @cached_property
    def _positions(self):
        return {idx: i for i, idx in enumerate(self.indices)}

    def position(self, idx):
        return self._positions[idx]

    def log_norms(self, alpha):
        e = self.exponents
        return 0.5 * (e.sum(axis=1) * math.log(alpha) + gammaln(e + 1).sum(axis=1))

    def labels(self):
        return [idx.label() for idx in self.indices]


def enumerate_basis(params, degree):
    """Truncated basis of total degree <= ``degree``: holomorphic block, then anti block."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    ms = multi_indices(params.n, degree)
    indices = [BasisIndex(HOLO, m) for m in ms]
    indices += [BasisIndex(ANTI, m) for m in ms if sum(m) > 0]
    return BasisTruncation(params.n, int(degree), tuple(indices))


def eval_basis(idx, z, params):
    """Plain evaluation b_idx(z); may overflow for large |z| or |m|."""
    z = as_point(z, params.n)
    value = complex(np.prod(z ** np.asarray(idx.m))) / math.exp(idx.log_norm(params.alpha))
    return value.conjugate() if idx.is_anti else value


def eval_basis_weighted(idx, z, params, floor=LOG_FLOOR):
    """b_idx(z) e^{-|z|^2/(2 alpha)} evaluated in the log-magnitude domain."""
    z = as_point(z, params.n)
    trunc = BasisTruncation(params.n, idx.degree, (idx,))
    return complex(basis_matrix(trunc, z, params, weighted=True, floor=floor)[0, 0])


def basis_log_matrix(trunc, points, params, weighted=True):
    """Log-magnitudes and phases of every basis element at every point.

    Returns ``(logmag, phase)``, each of shape (N, trunc.size); zero coordinates
    raised to a positive power give ``-inf``.
    """
    z = as_points(points, params.n)
    e = trunc.exponents
    with np.errstate(divide="ignore", invalid="ignore"):
        logabs = np.log(np.abs(z))
        logmag = np.zeros((z.shape[0], trunc.size))
        for i in range(params.n):
            term = e[None, :, i] * logabs[:, i, None]
            logmag += np.where(e[None, :, i] == 0, 0.0, term)
    phase = np.angle(z) @ e.T
    phase = np.where(trunc.anti_mask[None, :], -phase, phase)
    logmag -= trunc.log_norms(params.alpha)[None, :]
    if weighted:
        logmag -= (np.sum(np.abs(z) ** 2, axis=1) / (2.0 * params.alpha))[:, None]
    return logmag, phase


def basis_matrix(trunc, points, params, weighted=True, floor=LOG_FLOOR):
    """Values of every basis element at every point, shape (N, trunc.size).

    With ``weighted`` each row carries the factor e^{-|z|^2/(2 alpha)}.  Entries
    whose log-magnitude falls below ``floor`` are returned as exact zeros.
    """
    logmag, phase = basis_log_matrix(trunc, points, params, weighted)
    out = np.exp(logmag) * np.exp(1j * phase)
    out[logmag < floor] = 0.0
    return out


def unit_rows(trunc, points, params):
    """Basis values at each point scaled so that every row has unit Euclidean norm."""
    logmag, phase = basis_log_matrix(trunc, points, params, weighted=False)
    top = np.max(logmag, axis=1, keepdims=True)
    out = np.exp(logmag - top) * np.exp(1j * phase)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def project(f, trunc, params, tol=1e-9):
    """Coefficients <f, b_m> of a pointwise function by Gaussian-weighted quadrature.

    ``f`` maps an (N, n) array of points to N values.  Raises
    :class:`~phfock.errors.QuadratureError` (carrying both last estimates) when
    refinement stalls.
    """
    reach = quad.gaussian_reach(params.alpha, max(2 * trunc.degree, 8))

    def evaluate(radial, angular):
        rule = quad.polydisk_rule(params.n, reach, radial, angular)
        coeffs = np.zeros(trunc.size, dtype=complex)
        for nodes, w in rule.chunks():
            fv = np.asarray(f(nodes), dtype=complex).reshape(-1)
            if np.isnan(fv).any():
                raise InputDomainError("function returned NaN on the quadrature support")
            gauss_half = np.exp(-np.sum(np.abs(nodes) ** 2, axis=1) / (2.0 * params.alpha))
            b = basis_matrix(trunc, nodes, params, weighted=True)
            coeffs += (w * fv * gauss_half) @ b.conj()
        coeffs /= params.volume
        return coeffs, max(1.0, float(np.max(np.abs(coeffs))))

    coeffs, _, _ = quad.refine(evaluate, quad.levels(params.n), tol, "projection")
    return coeffs
