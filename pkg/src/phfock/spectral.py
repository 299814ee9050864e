"""Spectra, Schatten norms and the trace-class / Schatten-class diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .core import enumerate_basis
from .errors import QuadratureError, SpectralError
from .measures import (
    DEFAULT_TOL,
    AtomSet,
    BallIndicator,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
    ball_volume,
    effective_radius,
    integrate_measure,
    integrate_weighted,
    total_mass,
)
from .toeplitz import ToeplitzMatrix, assemble, blocks, from_bounded_symbol

RESIDUAL_TOL = 1e-8


def _entries(T):
    return T.entries if isinstance(T, ToeplitzMatrix) else np.asarray(T, dtype=complex)


def schatten_norm(singular_values, p):
    s = np.asarray(singular_values, dtype=float)
    if p == math.inf:
        return float(np.max(s)) if s.size else 0.0
    if not p >= 1:
        raise ValueError(f"Schatten norms need p >= 1, got {p}")
    if not s.size:
        return 0.0
    top = float(np.max(s))
    if top == 0.0:
        return 0.0
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


@dataclass
class SpectralSummary:
    eigenvalues: np.ndarray
    singular_values: np.ndarray
    operator_norm: float
    trace: float
    schatten_norms: dict
    degree: int | None = None
    residual: float = 0.0

    def to_dict(self):
        return {
            "degree": self.degree,
            "operator_norm": self.operator_norm,
            "trace": self.trace,
            "schatten_norms": {str(p): v for p, v in self.schatten_norms.items()},
            "residual": self.residual,
            "eigenvalues": [float(v) for v in self.eigenvalues],
        }


def spectral_summary(T, p_list=(1.0, 2.0)):
    """Hermitian eigen-decomposition with residual check and Schatten norms."""
    for p in p_list:
        if p != math.inf and not p >= 1:
            raise ValueError(f"Schatten norms need p >= 1, got {p}")
    E = _entries(T)
    if E.size == 0:
        return SpectralSummary(np.zeros(0), np.zeros(0), 0.0, 0.0, {p: 0.0 for p in p_list})
    try:
        lam, vec = np.linalg.eigh(E)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc
    norm = float(np.max(np.abs(lam)))
    residual = float(np.max(np.linalg.norm(E @ vec - vec * lam[None, :], axis=0)))
    if residual > RESIDUAL_TOL * max(norm, 1e-300):
        raise SpectralError(f"eigen-residual {residual:.3g} exceeds {RESIDUAL_TOL:g} * norm")
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    sv = np.sort(np.abs(lam))[::-1]
    degree = T.degree if isinstance(T, ToeplitzMatrix) else None
    return SpectralSummary(lam, sv, norm, float(np.sum(lam)),
                           {p: schatten_norm(sv, p) for p in p_list}, degree, residual)


# ---------------------------------------------------------------------------
# trace class


def trace_target(spec, params, tol=DEFAULT_TOL, growth_steps=4):
    """int (2 e^{|u|^2/alpha} - 1) e^{-|u|^2/alpha} dmu(u), or ``inf`` if it diverges.

    Densities are integrated over polydisks of growing radius; the value is
    accepted once doubling the radius no longer changes it.
    """
    a = params.alpha
    if isinstance(spec, (AtomSet, RadialShells)):
        with np.errstate(over="ignore"):
            value = integrate_weighted(
                lambda u: 2.0 * np.exp(np.sum(np.abs(u) ** 2, axis=1) / a) - 1.0, spec, params, tol)
        return float(value.real)

    def h(u):
        return 2.0 - np.exp(-np.sum(np.abs(u) ** 2, axis=1) / a)

    if isinstance(spec, BallIndicator):
        return float(integrate_measure(h, spec, params, tol).real)
    reach = max(effective_radius(spec, params, eps=1e-18), math.sqrt(40.0 * a))
    prev = None
    for _ in range(growth_steps):
        try:
            value = float(integrate_measure(h, spec, params, tol, center=np.zeros(params.n),
                                            reach=reach).real)
        except QuadratureError:
            return math.inf
        if prev is not None and abs(value - prev) <= 1e3 * tol * abs(value):
            return value
        prev = value
        reach *= 2.0
    return math.inf


@dataclass
class TraceClassReport:
    target: float
    trace_class: bool
    degrees: list
    traces: list
    monotone: bool
    total_mass: float
    sandwich_ok: bool | None
    limit_ok: bool | None

    def to_dict(self):
        return {
            "target": self.target,
            "verdict": "trace class" if self.trace_class else "not trace class",
            "degrees": self.degrees,
            "traces": self.traces,
            "monotone": self.monotone,
            "total_mass": self.total_mass,
            "sandwich_ok": self.sandwich_ok,
            "limit_ok": self.limit_ok,
        }


def trace_class_check(spec, params, degrees=(4, 8, 12), tol=DEFAULT_TOL):
    """Compare truncated traces with the exact trace target and the mass sandwich."""
    target = trace_target(spec, params, tol)
    traces = []
    for D in degrees:
        T = assemble(spec, enumerate_basis(params, D), params, tol)
        traces.append(float(np.trace(T.entries).real))
    monotone = all(b >= a - 1e-12 * max(abs(b), 1.0) for a, b in zip(traces, traces[1:]))
    mass = total_mass(spec, params)
    finite = math.isfinite(target)
    sandwich = None
    if math.isfinite(mass):
        sandwich = mass * (1 - 1e-9) <= target <= 2.0 * mass * (1 + 1e-9)
    limit = None
    if finite and traces:
        limit = target / 2.0 <= traces[-1] <= target * (1 + 1e-8)
    return TraceClassReport(target, finite, list(degrees), traces, monotone, mass, sandwich, limit)


# ---------------------------------------------------------------------------
# Schatten classes


@dataclass
class SchattenNecessityReport:
    p: float
    degrees: list
    schatten: list
    converged: bool
    lattice_lp_sum: float | None
    diagonal_sums: list
    holo_diagonal_sums: list
    diagonal_ok: bool

    def to_dict(self):
        return dict(self.__dict__)


def diagonal_inequality(E, p):
    """(sum |E_kk|^p, S_p(E)^p); the first never exceeds the second."""
    sv = np.linalg.svd(E, compute_uv=False)
    return float(np.sum(np.abs(np.diag(E)) ** p)), float(np.sum(sv ** p))


def schatten_necessity_probe(spec, params, p, window=None, degrees=(4, 6, 8), tol=DEFAULT_TOL,
                             cauchy_tol=1e-3):
    if not p >= 1:
        raise ValueError("p must be >= 1")
    norms, diag_sums, holo_sums = [], [], []
    ok = True
    for D in degrees:
        T = assemble(spec, enumerate_basis(params, D), params, tol)
        d_all, sp = diagonal_inequality(T.entries, p)
        d_holo = float(np.sum(np.abs(np.diag(blocks(T).MM)) ** p))
        ok = ok and d_all <= sp * (1 + 1e-12) and d_holo <= sp * (1 + 1e-12)
        norms.append(sp ** (1.0 / p))
        diag_sums.append(d_all)
        holo_sums.append(d_holo)
    converged = len(norms) >= 2 and abs(norms[-1] - norms[-2]) <= cauchy_tol * max(norms[-1], 1e-300)
    lp = None
    if window is not None:
        from .carleson import carleson_scan

        lp = carleson_scan(spec, window, [p]).lp_sums[float(p)]
    return SchattenNecessityReport(float(p), list(degrees), norms, converged, lp, diag_sums,
                                   holo_sums, ok)


def symbol_lp_integral(g, p, params):
    """int |g|^p dA for a catalog density read as a function (``None`` means g = 0)."""
    n = params.n
    if g is None:
        return 0.0
    if isinstance(g, ScaledLebesgue):
        return math.inf
    if isinstance(g, BallIndicator):
        return g.c ** p * ball_volume(n, g.radius)
    if isinstance(g, GaussianDensity):
        return g.c ** p * (math.pi / (p * g.beta)) ** n
    if isinstance(g, RadialPowerGaussian):
        q = n + g.k * p
        return g.c ** p * math.pi ** n * math.exp(gammaln(q) - gammaln(n) - q * math.log(p * g.s))
    raise ValueError("symbols must come from the density catalog")


@dataclass
class SymbolBoundReport:
    p: float
    bound: float
    degrees: list
    sums: list
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def lp_symbol_sufficiency_check(g, p, params, degrees=(4, 8), tol=DEFAULT_TOL):
    """Check sum |lambda_n|^p <= 2 (alpha pi)^{-n} int |g|^p dA for the truncated T_g."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    bound = 2.0 * symbol_lp_integral(g, p, params) / params.volume
    sums = []
    for D in degrees:
        if g is None:
            sums.append(0.0)
            continue
        T = from_bounded_symbol(g, enumerate_basis(params, D), params, tol)
        sums.append(float(np.sum(np.abs(np.linalg.eigvalsh(T.entries)) ** p)))
    passed = all(s <= bound for s in sums)
    return SymbolBoundReport(float(p), bound, list(degrees), sums, passed)


@dataclass
class CompactnessReport:
    degree: int
    singular_values: list
    head: int
    tail_ratio: float
    tail_monotone: bool
    decaying: bool
    ratios: list
    vanishing: str | None
    agreement: bool | None

    def to_dict(self):
        return dict(self.__dict__)


def compactness_probe(spec, params, degrees=(4, 8, 12), window=None, head=1, decay_ratio=1e-2,
                      tol=DEFAULT_TOL):
    """Singular-value tail diagnostics at the largest truncation.

    The tail is "decaying" when its last singular value is at most
    ``decay_ratio`` times the largest one.  Agreement with the Carleson
    vanishing verdict is reported, never asserted.
    """
    D = max(degrees)
    T = assemble(spec, enumerate_basis(params, D), params, tol)
    sv = np.linalg.svd(T.entries, compute_uv=False)
    top = float(sv[0]) if sv.size else 0.0
    tail = sv[head:]
    floor = 1e-14 * max(top, 1e-300)
    ratios = [float(b / a) if a > floor else 0.0 for a, b in zip(tail, tail[1:])]
    tail_ratio = float(tail[-1] / top) if tail.size and top > 0 else 0.0
    monotone = bool(np.all(np.diff(tail) <= 1e-12 * max(top, 1e-300)))
    decaying = tail_ratio <= decay_ratio
    vanishing = agreement = None
    if window is not None:
        from .carleson import carleson_scan

        vanishing = carleson_scan(spec, window).vanishing
        if vanishing != "inconclusive":
            agreement = (vanishing == "yes") == decaying
    return CompactnessReport(D, [float(s) for s in sv], head, tail_ratio, monotone, decaying,
                             ratios, vanishing, agreement)
