"""Truncated Toeplitz matrices of positive measures.

Entries are ``M[j, k] = int b_k(w) conj(b_j(w)) e^{-|w|^2/alpha} dmu(w)`` in the
ordered pluriharmonic basis.  A measure symbol carries no (alpha pi)^{-n}
factor; a function symbol g becomes the measure (alpha pi)^{-n} g dA, so the
constant function 1 gives the identity.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import quadrature as quad
from .core import BasisTruncation, FockParams, basis_matrix, enumerate_basis
from .errors import AssemblyError, InadmissibleMeasureError, QuadratureError
from .measures import (
    DEFAULT_TOL,
    AtomSet,
    BallIndicator,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
    _center_vec,
    _envelope,
    admissibility_check,
    is_density,
)

DEFECT_ABORT = 1e-6
HERMITIAN_TOL = 1e-9
RADIAL_ORDERS = (64, 128, 256, 512, 1024)


@dataclass
class ToeplitzMatrix:
    params: FockParams
    trunc: BasisTruncation
    entries: np.ndarray
    hermitian_defect: float = 0.0
    spec: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.trunc.size

    @property
    def degree(self):
        return self.trunc.degree

    def to_dict(self):
        from .schema import measure_to_dict

        e = self.entries
        return {
            "alpha": self.params.alpha,
            "n": self.params.n,
            "degree": self.trunc.degree,
            "labels": self.trunc.labels(),
            "entries": [[[float(v.real), float(v.imag)] for v in row] for row in e],
            "hermitian_defect": self.hermitian_defect,
            "spec": None if self.spec is None else measure_to_dict(self.spec),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc, check_positive=True):
        """Rebuild a matrix from :meth:`to_dict` output, validating its invariants."""
        from .schema import measure_from_dict

        params = FockParams(doc["alpha"], doc["n"])
        trunc = enumerate_basis(params, int(doc["degree"]))
        raw = np.asarray(doc["entries"], dtype=float)
        if raw.shape != (trunc.size, trunc.size, 2):
            raise ValueError(f"entries have shape {raw.shape}, expected "
                             f"({trunc.size}, {trunc.size}, 2)")
        if "labels" in doc and list(doc["labels"]) != trunc.labels():
            raise ValueError("basis labels do not match the canonical ordering")
        entries = raw[..., 0] + 1j * raw[..., 1]
        if not np.isfinite(entries).all():
            raise ValueError("entries must be finite")
        scale = max(float(np.max(np.abs(entries))), 1e-300)
        defect = float(np.max(np.abs(entries - entries.conj().T)))
        if defect > HERMITIAN_TOL * scale:
            raise ValueError(f"matrix is not Hermitian (defect {defect:.3g})")
        if check_positive and trunc.size:
            lam = np.linalg.eigvalsh(entries)
            if lam[0] < -HERMITIAN_TOL * max(abs(lam[-1]), 1e-300):
                raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
        spec = doc.get("spec")
        spec = None if spec is None else measure_from_dict(spec, params.n)
        return cls(params, trunc, entries, float(doc.get("hermitian_defect", defect)), spec,
                   dict(doc.get("metadata", {})))


def _finish(params, trunc, raw, spec, metadata):
    scale = max(float(np.max(np.abs(raw))), 1e-300) if raw.size else 1.0
    defect = float(np.max(np.abs(raw - raw.conj().T))) if raw.size else 0.0
    if defect > DEFECT_ABORT * scale:
        raise AssemblyError(f"Hermitian defect {defect:.3g} exceeds {DEFECT_ABORT:g} of max entry")
    entries = 0.5 * (raw + raw.conj().T)
    return ToeplitzMatrix(params, trunc, entries, defect, spec, metadata)


# ---------------------------------------------------------------------------
# exact and one-dimensional paths


def _atom_entries(spec, trunc, params):
    B = basis_matrix(trunc, spec.points(params.n), params, weighted=True)
    return B.conj().T @ (spec.weights()[:, None] * B)


def _shell_diagonal(spec, trunc, params):
    n, a = params.n, params.alpha
    q = trunc.degrees
    diag = np.zeros(trunc.size)
    for r, c in spec.shells:
        if r == 0.0:
            diag += np.where(q == 0, c, 0.0)
            continue
        log_r2 = 2.0 * math.log(r)
        diag += c * np.exp(q * log_r2 + gammaln(n) - q * math.log(a) - gammaln(n + q))
    return diag


def _radial_profile(spec, params):
    """(log rho(t), upper limit of t, extra degree, decay rate) for rho(|w|^2)."""
    n = params.n
    if isinstance(spec, ScaledLebesgue):
        return (lambda t: np.full_like(t, math.log(spec.c))), None, 0, 1.0 / params.alpha
    if isinstance(spec, GaussianDensity):
        return (lambda t: math.log(spec.c) - spec.beta * t), None, 0, spec.beta + 1.0 / params.alpha
    if isinstance(spec, RadialPowerGaussian):
        k = spec.k

        def log_rho(t):
            with np.errstate(divide="ignore"):
                return math.log(spec.c) + k * np.log(t) - spec.s * t
        return log_rho, None, k, spec.s + 1.0 / params.alpha
    if isinstance(spec, BallIndicator):
        return (lambda t: np.full_like(t, math.log(spec.c))), spec.radius ** 2, 0, None
    raise AssemblyError(f"no radial profile for {type(spec).__name__} with n={n}")


def _radial_density_diagonal(spec, trunc, params, tol):
    n, a = params.n, params.alpha
    log_rho, upper, extra, rate = _radial_profile(spec, params)
    degrees = np.arange(trunc.degree + 1)
    if upper is None:
        upper = quad.gaussian_reach(1.0 / rate, trunc.degree + n + extra) ** 2

    def evaluate(order, _):
        x, w = quad._gauss_legendre01(order)
        t = upper * x
        base = np.log(upper * w) + log_rho(t) - t / a
        with np.errstate(divide="ignore"):
            logt = np.log(t)
        logs = base[None, :] + (degrees[:, None] + n - 1) * logt[None, :]
        top = np.max(logs, axis=1, keepdims=True)
        integral = np.log(np.sum(np.exp(logs - top), axis=1)) + top[:, 0]
        vals = np.exp(integral + n * math.log(math.pi) - degrees * math.log(a)
                      - gammaln(n + degrees))
        return vals, float(np.max(vals))

    schedule = [(o, 0) for o in RADIAL_ORDERS]
    vals, err, used = quad.refine(evaluate, schedule, tol, "radial moment")
    return vals[trunc.degrees], {"radial_order": used[0], "error_estimate": err}


def assemble_radial(spec, trunc, params, tol=DEFAULT_TOL):
    """Diagonal matrix of a radial measure from one-dimensional radial moments."""
    if isinstance(spec, RadialShells):
        diag = _shell_diagonal(spec, trunc, params)
        meta = {"method": "radial-exact"}
    elif is_density(spec) and spec.is_radial:
        diag, meta = _radial_density_diagonal(spec, trunc, params, tol)
        meta["method"] = "radial"
    else:
        raise ValueError(f"{type(spec).__name__} is not a radial measure")
    meta["tol"] = tol
    return _finish(params, trunc, np.diag(diag).astype(complex), spec, meta)


# ---------------------------------------------------------------------------
# off-centre Gaussian: factorised one-dimensional moments


def _gaussian_moment_table(center, gamma, shift_log, size, alpha):
    """T[a, b] = int z^a conj(z)^b e^{-gamma |z - p|^2 + shift} dA / sqrt(alpha^{a+b} a! b!)."""
    p = center
    table = np.zeros((size, size), dtype=complex)
    lf = gammaln(np.arange(size) + 1)
    for a in range(size):
        for b in range(size):
            total = 0j
            for l in range(min(a, b) + 1):
                log_c = lf[a] - lf[l] - lf[a - l] + lf[b] - lf[l] - lf[b - l] + lf[l] \
                    - l * math.log(gamma)
                total += math.exp(log_c) * p ** (a - l) * np.conj(p) ** (b - l)
            norm = 0.5 * ((a + b) * math.log(alpha) + lf[a] + lf[b])
            table[a, b] = total * math.pi / gamma * math.exp(shift_log - norm)
    return table


def _gaussian_entries(spec, trunc, params):
    n, alpha = params.n, params.alpha
    w0 = _center_vec(spec.center, n)
    gamma = spec.beta + 1.0 / alpha
    size = 2 * trunc.degree + 1
    tables = []
    for i in range(n):
        p = spec.beta * w0[i] / gamma
        shift = -spec.beta * abs(w0[i]) ** 2 + gamma * abs(p) ** 2
        tables.append(_gaussian_moment_table(p, gamma, shift, size, alpha))

    e = trunc.exponents
    anti = trunc.anti_mask
    mj = e[:, None, :]
    mk = e[None, :, :]
    aj = anti[:, None, None]
    ak = anti[None, :, None]
    a_idx = np.where(ak, 0, mk) + np.where(aj, mj, 0)
    b_idx = np.where(aj, 0, mj) + np.where(ak, mk, 0)
    log_fac = 0.5 * (gammaln(a_idx + 1) + gammaln(b_idx + 1) - gammaln(mj + 1) - gammaln(mk + 1))
    out = np.full((trunc.size, trunc.size), spec.c, dtype=complex)
    for i in range(n):
        out *= tables[i][a_idx[..., i], b_idx[..., i]] * np.exp(log_fac[..., i])
    return out


# ---------------------------------------------------------------------------
# generic two-dimensional quadrature


def _quadrature_entries(spec, trunc, params, tol):
    n = params.n
    if isinstance(spec, RadialShells):
        def evaluate(radial, angular):
            out = np.zeros((trunc.size, trunc.size), dtype=complex)
            for r, c in spec.shells:
                if r == 0.0:
                    B = basis_matrix(trunc, np.zeros((1, n)), params, weighted=False)
                    out += c * B.conj().T @ B
                    continue
                rule = quad.sphere_rule(n, r, radial, angular)
                B = basis_matrix(trunc, rule.nodes, params, weighted=False)
                out += c * B.conj().T @ (rule.weights[:, None] * B)
            return out, float(np.max(np.abs(out)))

        degree = 2 * trunc.degree + 2
        schedule = [(8 + 4 * i, max(degree, 8) + 8 * i) for i in range(4)] if n > 1 \
            else [(1, max(degree, 8) * 2 ** i) for i in range(4)]
        value, err, used = quad.refine(evaluate, schedule, tol, "shell assembly")
        return value, {"rule": "sphere", "nodes": list(used), "error_estimate": err}

    if isinstance(spec, BallIndicator):
        b = _center_vec(spec.center, n)

        def build(radial, angular):
            return quad.ball_rule(n, spec.radius, radial, angular, b)
        kind = "ball"
    else:
        center, a_eff, extra = _envelope(spec, params, weighted=True)
        reach = float(np.linalg.norm(center)) + quad.gaussian_reach(a_eff, trunc.degree + extra + 2)

        def build(radial, angular):
            return quad.polydisk_rule(n, reach, radial, angular, center)
        kind = "polydisk"

    def evaluate(radial, angular):
        rule = build(radial, angular)
        out = np.zeros((trunc.size, trunc.size), dtype=complex)
        for nodes, w in rule.chunks():
            dens = spec.c if isinstance(spec, BallIndicator) else spec.density(nodes)
            B = basis_matrix(trunc, nodes, params, weighted=True)
            out += B.conj().T @ ((w * dens)[:, None] * B)
        return out, float(np.max(np.abs(out)))

    value, err, used = quad.refine(evaluate, quad.levels(n), tol, "Toeplitz assembly")
    return value, {"rule": kind, "nodes": list(used), "error_estimate": err}


def _precheck(spec, params, tol):
    try:
        report = admissibility_check(spec, params, [np.zeros(params.n)], tol)
    except QuadratureError as exc:
        raise InadmissibleMeasureError(str(exc)) from exc
    if not report.passed:
        raise InadmissibleMeasureError("admissibility integral diverges at the origin")


def assemble(spec, trunc, params, tol=DEFAULT_TOL, method="auto", precheck=True):
    """Truncated Toeplitz matrix of ``spec``.

    ``method="auto"`` takes the cheapest exact route: finite sums for atoms and
    shells, one-dimensional radial moments for radial densities, factorised
    moments for off-centre Gaussians, and ball quadrature otherwise.
    ``method="quadrature"`` forces full two-dimensional quadrature of every
    entry, which is useful as an independent cross-check.
    """
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown assembly method {method!r}")
    if precheck and is_density(spec):
        _precheck(spec, params, tol)
    meta = {"tol": tol}
    if isinstance(spec, AtomSet):
        raw = _atom_entries(spec, trunc, params)
        meta["method"] = "atoms"
    elif method == "auto" and (isinstance(spec, RadialShells)
                               or (is_density(spec) and spec.is_radial)):
        return assemble_radial(spec, trunc, params, tol)
    elif method == "auto" and isinstance(spec, GaussianDensity):
        raw = _gaussian_entries(spec, trunc, params)
        meta["method"] = "gaussian-moments"
    else:
        try:
            raw, info = _quadrature_entries(spec, trunc, params, tol)
        except QuadratureError as exc:
            raise QuadratureError(f"assembly of {type(spec).__name__} failed: {exc}",
                                  exc.estimates) from exc
        meta.update(info, method="quadrature")
    return _finish(params, trunc, raw, spec, meta)


def from_bounded_symbol(g, trunc, params, tol=DEFAULT_TOL, method="auto"):
    """Toeplitz matrix of a bounded density symbol g, i.e. of (alpha pi)^{-n} g dA."""
    if not is_density(g):
        raise ValueError("function symbols must come from the density catalog")
    scaled = dataclasses.replace(g, c=g.c / params.volume)
    return assemble(scaled, trunc, params, tol, method)


def sup_norm(g):
    """Sup norm of a catalog density viewed as a bounded function."""
    if isinstance(g, (ScaledLebesgue, GaussianDensity, BallIndicator)):
        return g.c
    if isinstance(g, RadialPowerGaussian):
        if g.k == 0:
            return g.c
        t = g.k / g.s
        return g.c * t ** g.k * math.exp(-g.s * t)
    raise ValueError("only densities have a sup norm")


@dataclass
class BlockDecomposition:
    holo_mask: np.ndarray
    anti_mask: np.ndarray
    MM: np.ndarray
    MN: np.ndarray
    NM: np.ndarray
    NN: np.ndarray

    def reconstruct(self):
        return np.block([[self.MM, self.MN], [self.NM, self.NN]])


def blocks(T):
    h = T.trunc.holo_mask
    a = T.trunc.anti_mask
    E = T.entries
    return BlockDecomposition(h, a, E[np.ix_(h, h)], E[np.ix_(h, a)], E[np.ix_(a, h)],
                              E[np.ix_(a, a)])


def apply(T, coeffs):
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (T.size,):
        raise ValueError(f"coefficient vector has shape {c.shape}, expected ({T.size},)")
    return T.entries @ c


def identity_spec(params):
    """The Lebesgue multiple whose Toeplitz matrix is the identity."""
    return ScaledLebesgue(1.0 / params.volume)
