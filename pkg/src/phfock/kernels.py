"""Reproducing kernels of the holomorphic and pluriharmonic Fock spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_point, as_points, basis_matrix


@dataclass(frozen=True)
class KernelValue:
    value: complex
    at_diagonal: float | None = None


def _inner_parts(z, w):
    """Real and imaginary parts of <z, w> = sum z_i conj(w_i), summed along the last axis.

    Written in real arithmetic so that swapping z and w negates the imaginary
    part exactly (complex multiplication may be fused and lose that).
    """
    a, b = z.real, z.imag
    c, d = w.real, w.imag
    return np.sum(a * c + b * d, axis=-1), np.sum(b * c - a * d, axis=-1)


def _inner(z, w):
    re, im = _inner_parts(z, w)
    return complex(float(re), float(im))


def diagonal(z, params):
    """K_ph(z, z) = 2 e^{|z|^2/alpha} - 1 in closed form."""
    z = as_point(z, params.n)
    return 2.0 * math.expm1(float(np.sum(np.abs(z) ** 2)) / params.alpha) + 1.0


def log_diagonal(t, alpha):
    """log(2 e^{t/alpha} - 1) for t = |z|^2, safe for large t."""
    t = np.asarray(t, dtype=float)
    x = t / alpha
    return x + np.log(2.0 - np.exp(-x))


def k_alpha(z, w, params):
    z = as_point(z, params.n)
    w = as_point(w, params.n)
    return complex(np.exp(_inner(z, w) / params.alpha))


def k_ph(z, w, params):
    z = as_point(z, params.n)
    w = as_point(w, params.n)
    if np.array_equal(z, w):
        d = diagonal(z, params)
        return KernelValue(complex(d), d)
    # K_ph is real: 2 e^x cos y - 1; cos|y| keeps the symmetry in (z, w) exact
    s = _inner(z, w) / params.alpha
    return KernelValue(complex(2.0 * math.exp(s.real) * math.cos(abs(s.imag)) - 1.0))


def k_ph_normalized(z, w, params):
    """K_ph(z, w) / sqrt(K_ph(w, w)), with the square root taken in log form."""
    z = as_point(z, params.n)
    w = as_point(w, params.n)
    half_log = 0.5 * float(log_diagonal(np.sum(np.abs(w) ** 2), params.alpha))
    if np.array_equal(z, w):
        return complex(math.exp(half_log))
    s = _inner(z, w) / params.alpha
    # 2 Re(e^s) - 1 scaled by e^{-half_log}
    return complex(2.0 * math.cos(s.imag) * math.exp(s.real - half_log) - math.exp(-half_log))


def normalized_pairing(z, w, params):
    """<k_ph(., z), k_ph(., w)> = K_ph(w, z) / sqrt(K_ph(z, z) K_ph(w, w))."""
    z = as_point(z, params.n)
    w = as_point(w, params.n)
    tz = float(np.sum(np.abs(z) ** 2))
    tw = float(np.sum(np.abs(w) ** 2))
    log_den = 0.5 * float(log_diagonal(tz, params.alpha) + log_diagonal(tw, params.alpha))
    s = _inner(w, z) / params.alpha
    return complex(2.0 * math.cos(s.imag) * math.exp(s.real - log_den) - math.exp(-log_den))


def kernel_coeff_vector(w, trunc, params, weighted=False):
    """Coefficients conj(b_m(w)) of K_ph(., w) in the truncated basis.

    ``weighted=True`` multiplies by e^{-|w|^2/(2 alpha)}, which keeps the vector
    finite for large |w| without changing any ratio built from it.
    """
    w = as_point(w, params.n)
    return np.conj(basis_matrix(trunc, w, params, weighted=weighted)[0])


def kernel_bump(z, u, alpha):
    """|K_ph(z, u)|^2 e^{-(|z|^2 + |u|^2)/alpha} for batches of points.

    ``z`` and ``u`` broadcast against each other as (..., n) arrays.  Uses
    K_ph = 2 e^x cos y - 1 with x + iy = <z, u>/alpha, so the result equals
    (2 cos y - e^{-x})^2 e^{-|z-u|^2/alpha} and never overflows.
    """
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=complex)
    s = np.sum(z * np.conj(u), axis=-1) / alpha
    x, y = s.real, s.imag
    dist = np.sum(np.abs(z - u) ** 2, axis=-1) / alpha
    with np.errstate(over="ignore", under="ignore"):
        pos = (2.0 * np.cos(y) - np.exp(-np.maximum(x, 0.0))) ** 2 * np.exp(-dist)
        full = (np.abs(z) ** 2).sum(axis=-1) / alpha + (np.abs(u) ** 2).sum(axis=-1) / alpha
        neg = (2.0 * np.cos(y) * np.exp(np.minimum(x, 0.0)) - 1.0) ** 2 * np.exp(-full)
    return np.where(x >= 0.0, pos, neg)


def k_ph_many(z, w, params):
    """Vectorised K_ph over broadcast batches (no diagonal shortcut)."""
    z = as_points(z, params.n)
    w = as_points(w, params.n)
    re, im = _inner_parts(z, w)
    return 2.0 * np.exp(re / params.alpha) * np.cos(np.abs(im) / params.alpha) - 1.0
