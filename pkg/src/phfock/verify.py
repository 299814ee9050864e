"""Catalog of numerical checks of the operator-theoretic statements.

Every check returns a :class:`CheckOutcome` with the measured values and the
tolerances used.  ``check_tol``, when given, replaces each check's comparison
tolerance (useful to provoke controlled failures).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import berezin as bz
from . import quadrature as quad
from .carleson import (
    LatticeWindow,
    carleson_norm_bound,
    carleson_scan,
    necessity_constant_check,
)
from .core import FockParams, basis_matrix, enumerate_basis
from .kernels import diagonal, k_ph_many
from .measures import (
    AtomSet,
    BallIndicator,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
    total_mass,
)
from .spectral import (
    compactness_probe,
    diagonal_inequality,
    lp_symbol_sufficiency_check,
    spectral_summary,
    trace_target,
)
from .toeplitz import assemble, blocks, identity_spec

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class CheckOutcome:
    id: str
    verdict: str
    statement: str
    values: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        return {"id": self.id, "verdict": self.verdict, "statement": self.statement,
                "values": self.values, "tolerances": self.tolerances}


@dataclass
class Context:
    params: FockParams
    seed: int = 0
    check_tol: float | None = None
    threads: int = 1

    def tol(self, default):
        return default if self.check_tol is None else self.check_tol

    def rng(self, salt):
        return np.random.default_rng([self.seed, salt])


def _verdict(ok):
    return PASS if ok else FAIL


def _gram(params, degree):
    trunc = enumerate_basis(params, degree)
    reach = quad.gaussian_reach(params.alpha, degree + 2)

    def evaluate(radial, angular):
        rule = quad.polydisk_rule(params.n, reach, radial, angular)
        G = np.zeros((trunc.size, trunc.size), dtype=complex)
        for nodes, w in rule.chunks():
            B = basis_matrix(trunc, nodes, params, weighted=True)
            G += B.conj().T @ (w[:, None] * B)
        G /= params.volume
        return G, 1.0

    G, _, _ = quad.refine(evaluate, quad.levels(params.n), 1e-12, "Gram matrix")
    return G


def check_orthonormality(ctx):
    tol = ctx.tol(1e-8)
    G = _gram(ctx.params, 6)
    err = float(np.max(np.abs(G - np.eye(len(G)))))
    off = float(np.max(np.abs(G - np.diag(np.diag(G)))))
    return CheckOutcome("orthonormality", _verdict(err <= tol),
                        "The pluriharmonic monomial basis is orthonormal (Gram matrix at D=6).",
                        {"max_deviation": err, "max_off_diagonal": off}, {"entry": tol})


def check_identity(ctx):
    tol_e, tol_n = ctx.tol(1e-10), ctx.tol(1e-9)
    p = ctx.params
    errs, norms = {}, {}
    for D in (2, 6, 10):
        T = assemble(identity_spec(p), enumerate_basis(p, D), p)
        errs[str(D)] = float(np.max(np.abs(T.entries - np.eye(T.size))))
        norms[str(D)] = spectral_summary(T).operator_norm
    ok = all(e <= tol_e for e in errs.values()) and all(abs(v - 1) <= tol_n for v in norms.values())
    return CheckOutcome("identity-operator", _verdict(ok),
                        "The constant symbol 1 gives the identity operator.",
                        {"max_entry_error": errs, "operator_norm": norms},
                        {"entry": tol_e, "norm": tol_n})


def check_kernel(ctx):
    p = ctx.params
    tol_k, tol_b = ctx.tol(1e-12), ctx.tol(1e-6)
    z = bz.sample_cloud(p, 50, 3.0, seed=ctx.rng(3).integers(1 << 31))
    series = k_ph_many(z, z, p)
    closed = np.array([diagonal(zi, p) for zi in z])
    kernel_err = float(np.max(np.abs(series - closed) / closed))
    c = 1.75
    A = assemble(AtomSet((((0.0,) * p.n, c),)), enumerate_basis(p, 6), p)
    tr = float(np.trace(A.entries).real)
    via = bz.trace_via_berezin(A).value
    ok = kernel_err <= tol_k and tr == c and abs(via - c) <= tol_b
    return CheckOutcome("kernel-closed-form", _verdict(ok),
                        "K_ph(z,z) = 2e^{|z|^2/alpha} - 1; a single atom at 0 has trace c, "
                        "reproduced by the Berezin trace integral.",
                        {"kernel_rel_error": kernel_err, "atom_trace": tr, "berezin_trace": via,
                         "c": c}, {"kernel": tol_k, "berezin_trace": tol_b})


def check_trace_formula(ctx):
    p = ctx.params
    tol = ctx.tol(1e-3)
    spec = GaussianDensity(1.0, 1.0)
    target = trace_target(spec, p)
    traces = {}
    for D in (4, 8, 12):
        traces[str(D)] = float(np.trace(assemble(spec, enumerate_basis(p, D), p).entries).real)
    vals = list(traces.values())
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    rel = abs(vals[-1] - target) / target
    return CheckOutcome("trace-formula", _verdict(monotone and rel <= tol),
                        "Truncated traces increase to int (2 - e^{-|u|^2/alpha}) dmu.",
                        {"traces": traces, "target": target, "relative_gap": rel,
                         "monotone": monotone}, {"relative": tol})


def _finite_specs(n):
    zero = (0.0,) * n
    off = (0.5 - 0.25j,) + (0.0,) * (n - 1)
    return {
        "gaussian": GaussianDensity(1.0, 1.0),
        "gaussian-offset": GaussianDensity(2.0, 1.5, off),
        "radial-power": RadialPowerGaussian(1.0, 2, 0.75),
        "ball": BallIndicator(1.0, 1.0, off),
        "atoms": AtomSet(((zero, 1.0), (off, 0.5))),
        "shells": RadialShells(((0.0, 0.5), (1.0, 1.0))),
    }


def check_sandwich(ctx):
    p = ctx.params
    tol = ctx.tol(1e-9)
    rows, ok = {}, True
    for name, spec in _finite_specs(p.n).items():
        mass = total_mass(spec, p)
        target = trace_target(spec, p)
        good = mass * (1 - tol) <= target <= 2 * mass * (1 + tol)
        ok = ok and good
        rows[name] = {"mass": mass, "target": target, "holds": good}
    return CheckOutcome("s1-sandwich", _verdict(ok),
                        "mu(C^n) <= trace target <= 2 mu(C^n) for finite measures.",
                        rows, {"relative_slack": tol})


def check_radial(ctx):
    p = ctx.params
    tol = ctx.tol(1e-10)
    trunc = enumerate_basis(p, 8)
    rows, ok = {}, True
    for name, spec in (("radial-power", RadialPowerGaussian(1.0, 1, 1.0)),
                       ("shells", RadialShells(((0.5, 1.0), (1.5, 0.25))))):
        full = assemble(spec, trunc, p, method="quadrature").entries
        off = float(np.max(np.abs(full - np.diag(np.diag(full)))))
        fast = blocks(assemble(spec, trunc, p))
        zero_block = not np.any(fast.MN) and not np.any(fast.NM)
        ok = ok and off <= tol and zero_block
        rows[name] = {"max_off_diagonal": off, "fast_path_MN_zero": zero_block}
    return CheckOutcome("radial-diagonality", _verdict(ok),
                        "Radial measures give diagonal matrices with vanishing M-N blocks.",
                        rows, {"off_diagonal": tol})


def check_necessity(ctx):
    p = ctx.params
    slack = ctx.tol(1e-8)
    rng = ctx.rng(7)
    specs = {
        "lebesgue": ScaledLebesgue(1.0),
        "gaussian": GaussianDensity(1.0, 1.0),
        "ball": BallIndicator(1.0, 1.5),
        "atoms": AtomSet((((0.0,) * p.n, 1.0), ((1.0,) + (0.0,) * (p.n - 1), 2.0))),
    }
    rows, ok = {}, True
    for name, spec in specs.items():
        worst = -math.inf
        for _ in range(20):
            a = bz.sample_cloud(p, 1, 3.0, seed=rng.integers(1 << 31))[0]
            r = float(rng.uniform(0.1, 2.0))
            res = necessity_constant_check(spec, a, r, p, slack=slack)
            ok = ok and res.passed
            worst = max(worst, res.mass / res.bound if res.bound > 0 else math.inf)
        rows[name] = {"max_ratio": worst}
    return CheckOutcome("carleson-necessity", _verdict(ok),
                        "mu(B(a,r)) <= e^{r^2/alpha} int e^{-|z-a|^2/alpha} dmu(z).",
                        rows, {"relative_slack": slack})


def check_sufficiency(ctx):
    p = ctx.params
    tol = ctx.tol(1e-9)
    window = LatticeWindow(1.0, 8.0 if p.n == 1 else 3.0, p)
    specs = {
        "lebesgue": ScaledLebesgue(1.0),
        "gaussian": GaussianDensity(1.0, 1.0),
        "ball": BallIndicator(1.0, 1.0),
        "atoms": AtomSet((((0.0,) * p.n, 1.0), ((1.0,) + (0.0,) * (p.n - 1), 2.0))),
    }
    rows, ok = {}, True
    for name, spec in specs.items():
        scan = carleson_scan(spec, window, threads=ctx.threads)
        row = {"bounded": scan.bounded, "sup_mass": scan.sup_mass}
        if scan.bounded == "yes":
            norms = [spectral_summary(assemble(spec, enumerate_basis(p, D), p)).operator_norm
                     for D in (4, 6, 8, 10)]
            bound = carleson_norm_bound(scan.sup_mass, window.r, p)
            monotone = all(b >= a * (1 - tol) for a, b in zip(norms, norms[1:]))
            good = monotone and max(norms) <= bound
            if isinstance(spec, ScaledLebesgue):
                scale = spec.c * p.volume
                good = good and all(abs(v - scale) <= tol * scale for v in norms)
                row["density_scale"] = scale
            row.update(norms=norms, bound=bound, monotone=monotone)
            ok = ok and good
        rows[name] = row
    return CheckOutcome("carleson-sufficiency", _verdict(ok),
                        "Bounded lattice ball masses bound the truncated operator norms.",
                        rows, {"relative": tol})


def check_vanishing(ctx):
    p = ctx.params
    window = LatticeWindow(1.0, 8.0 if p.n == 1 else 3.0, p)
    rng = ctx.rng(11)
    atoms = tuple((tuple(bz.sample_cloud(p, 1, 2.0, seed=rng.integers(1 << 31))[0]),
                   float(rng.uniform(0.5, 2.0))) for _ in range(3))
    cases = {
        "gaussian": (GaussianDensity(1.0, 1.0), True),
        "ball": (BallIndicator(1.0, 1.0), True),
        "atoms": (AtomSet(atoms), True),
        "identity": (identity_spec(p), False),
    }
    rows, ok = {}, True
    for name, (spec, expect) in cases.items():
        probe = compactness_probe(spec, p, degrees=(8,), window=window)
        flat = max(probe.singular_values) - min(probe.singular_values) \
            <= 1e-9 * max(probe.singular_values)
        good = probe.vanishing == ("yes" if expect else "no") and probe.decaying == expect
        if not expect:
            good = good and flat
        ok = ok and good
        rows[name] = {"vanishing": probe.vanishing, "decaying": probe.decaying,
                      "tail_ratio": probe.tail_ratio, "flat": bool(flat)}
    return CheckOutcome("vanishing-compact", _verdict(ok),
                        "Vanishing ball masses go with decaying singular values; the identity "
                        "has neither.", rows, {})


def check_berezin_bounds(ctx):
    p = ctx.params
    tol_s, tol_i, tol_t = ctx.tol(1e-8), ctx.tol(1e-12), ctx.tol(1e-6)
    z = bz.sample_cloud(p, 100, 4.0, seed=ctx.rng(13).integers(1 << 31))
    T = assemble(GaussianDensity(1.0, 1.0, (0.5,) + (0.0,) * (p.n - 1)), enumerate_basis(p, 8), p)
    norm = spectral_summary(T).operator_norm
    sup = float(np.max(np.abs(bz.berezin_of_matrix(T, z))))
    I = assemble(identity_spec(p), enumerate_basis(p, 8), p)
    ident = float(np.max(np.abs(bz.berezin_of_matrix(I, z) - 1.0)))
    l1 = bz.berezin_lp_norm(T, 1)
    tr = float(np.trace(T.entries).real)
    ok = sup <= norm + tol_s and ident <= tol_i and abs(l1 - tr) <= tol_t * tr
    return CheckOutcome("berezin-bounds", _verdict(ok),
                        "|Berezin(T)| <= ||T||; the identity has Berezin transform 1; the "
                        "weighted L^1 norm of a positive Berezin transform is the trace.",
                        {"sup": sup, "operator_norm": norm, "identity_deviation": ident,
                         "weighted_l1": l1, "trace": tr},
                        {"sup": tol_s, "identity": tol_i, "trace_relative": tol_t})


def random_measures(params, rng, count=5):
    """Seeded random positive measures: alternating atom sets and shifted Gaussians."""
    out = []
    for i in range(count):
        if i % 2 == 0:
            k = int(rng.integers(1, 4))
            atoms = tuple((tuple(bz.sample_cloud(params, 1, 2.0, seed=rng.integers(1 << 31))[0]),
                           float(rng.uniform(0.2, 2.0))) for _ in range(k))
            out.append(AtomSet(atoms))
        else:
            center = tuple(bz.sample_cloud(params, 1, 1.5, seed=rng.integers(1 << 31))[0])
            out.append(GaussianDensity(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)),
                                       center))
    return out


def check_berezin_power(ctx):
    p = ctx.params
    tol = ctx.tol(1e-10)
    rng = ctx.rng(17)
    worst, count, bad = -math.inf, 0, 0
    for spec in random_measures(p, rng):
        T = assemble(spec, enumerate_basis(p, 6), p)
        z = bz.sample_cloud(p, 20, 2.5, seed=rng.integers(1 << 31))
        gap = bz.berezin_of_matrix(bz.matrix_power(T, 2), z) - bz.berezin_of_matrix(T, z) ** 2
        worst = max(worst, float(np.max(gap)))
        bad += int(np.sum(gap > tol))
        count += len(z)
    return CheckOutcome("berezin-power", _verdict(bad == 0),
                        "Berezin(T^2)(z) <= Berezin(T)(z)^2 for positive T.",
                        {"max_excess": worst, "violations": bad, "samples": count},
                        {"additive": tol})


def check_lp_symbol(ctx):
    p = ctx.params
    rows, ok = {}, True
    for name, g in (("ball", BallIndicator(1.0, 1.0)), ("gaussian", GaussianDensity(1.0, 1.0))):
        for q in (1.0, 2.0):
            rep = lp_symbol_sufficiency_check(g, q, p, degrees=(4, 8))
            ok = ok and rep.passed
            rows[f"{name}-p{q:g}"] = {"bound": rep.bound, "sums": rep.sums}
    return CheckOutcome("lp-symbol-schatten", _verdict(ok),
                        "sum |lambda_n|^p <= 2 (alpha pi)^{-n} int |phi|^p dA.", rows, {})


def check_schatten_diagonal(ctx):
    p = ctx.params
    slack = ctx.tol(1e-12)
    specs = dict(list(_finite_specs(p.n).items())[:4])
    rows, ok = {}, True
    for name, spec in specs.items():
        for D in (4, 6, 8):
            E = assemble(spec, enumerate_basis(p, D), p).entries
            for q in (1, 2, 3):
                d, s = diagonal_inequality(E, q)
                good = d ** (1 / q) <= s ** (1 / q) * (1 + slack)
                ok = ok and good
                rows[f"{name}-D{D}-p{q}"] = {"diagonal": d ** (1 / q), "schatten": s ** (1 / q)}
    return CheckOutcome("schatten-diagonal", _verdict(ok),
                        "(sum_k |<T e_k, e_k>|^p)^{1/p} <= ||T||_{S_p}.", rows,
                        {"relative_slack": slack})


def harmonic_mean_constant(n):
    """Sub-mean-value constant for |f|^p, p >= 1, f harmonic: 1 / vol(unit ball of C^n)."""
    return math.factorial(n) / math.pi ** n


def ball_average_norm(f, a, r, p, params, tol=1e-7):
    """int_{B(a,r)} |f(z) e^{-|z|^2/(2 alpha)}|^p dA by refined ball quadrature."""
    def evaluate(radial, angular):
        rule = quad.ball_rule(params.n, r, radial, angular, a)
        vals = np.abs(f(rule.nodes) * np.exp(-np.sum(np.abs(rule.nodes) ** 2, axis=1)
                                             / (2 * params.alpha))) ** p
        total = float(np.sum(rule.weights * vals))
        return total, total

    schedule = quad.levels(params.n) if params.n > 1 else \
        [(16, 16), (32, 32), (64, 64), (128, 128), (256, 256), (512, 512)]
    value, _, _ = quad.refine(evaluate, schedule, tol, "ball average")
    return float(value)


def point_evaluation_constants(n, p, R, a_norm, alpha):
    return {
        "harmonic": harmonic_mean_constant(n) * math.exp(p * (R * R + 2 * R * a_norm) / (2 * alpha)),
        "entire_safe": 2 * n * math.exp(R * (R + 2 * a_norm) * p / (2 * alpha)),
        "entire_literal": 2 * n * math.exp(R * p / (2 * alpha)),
    }


def check_point_evaluation(ctx):
    p = ctx.params
    rng = ctx.rng(19)
    slack = ctx.tol(1e-6)
    R = 2.0
    trunc = enumerate_basis(p, 3)
    holo = trunc.holo_mask
    ok = True
    literal_ok = True
    worst = {"harmonic": 0.0, "entire_safe": 0.0, "entire_literal": 0.0}
    for _ in range(50):
        a = bz.sample_cloud(p, 1, 2.0, seed=rng.integers(1 << 31))[0]
        r = float(rng.uniform(0.2, R))
        q = float(rng.choice([1.0, 2.0]))
        coeffs = rng.standard_normal(trunc.size) + 1j * rng.standard_normal(trunc.size)

        def f(z, c=coeffs):
            return basis_matrix(trunc, z, p, weighted=False) @ c

        def g(z, c=np.where(holo, coeffs, 0)):
            return basis_matrix(trunc, z, p, weighted=False) @ c

        consts = point_evaluation_constants(p.n, q, R, float(np.linalg.norm(a)), p.alpha)
        weight = math.exp(-float(np.sum(np.abs(a) ** 2)) / (2 * p.alpha))
        for key, func, const in (("harmonic", f, consts["harmonic"]),
                                 ("entire_safe", g, consts["entire_safe"]),
                                 ("entire_literal", g, consts["entire_literal"])):
            lhs = abs(func(a[None, :])[0] * weight) ** q
            # |f|^1 has kinks at zeros of f, so odd powers get a looser quadrature target
            qtol = 1e-7 if q % 2 == 0 else 1e-5
            rhs = const / r ** (2 * p.n) * ball_average_norm(func, a, r, q, p, qtol)
            ratio = lhs / rhs
            worst[key] = max(worst[key], ratio)
            if key == "entire_literal":
                literal_ok = literal_ok and ratio <= 1 + slack
            else:
                ok = ok and ratio <= 1 + slack
    return CheckOutcome("point-evaluation", _verdict(ok),
                        "Weighted point evaluations are bounded by ball averages (harmonic "
                        "functions with C_p e^{p(R^2+2R|a|)/(2 alpha)}, entire functions with "
                        "2n e^{R(R+2|a|)p/(2 alpha)}).",
                        {"max_ratio": worst, "literal_constant_holds": literal_ok,
                         "C_p": harmonic_mean_constant(p.n)},
                        {"relative_slack": slack})


CHECKS = {
    "orthonormality": check_orthonormality,
    "identity-operator": check_identity,
    "kernel-closed-form": check_kernel,
    "trace-formula": check_trace_formula,
    "s1-sandwich": check_sandwich,
    "radial-diagonality": check_radial,
    "carleson-necessity": check_necessity,
    "carleson-sufficiency": check_sufficiency,
    "vanishing-compact": check_vanishing,
    "berezin-bounds": check_berezin_bounds,
    "berezin-power": check_berezin_power,
    "lp-symbol-schatten": check_lp_symbol,
    "schatten-diagonal": check_schatten_diagonal,
    "point-evaluation": check_point_evaluation,
}


def run_checks(ctx, only=None):
    """Run the selected checks in catalog order.

    Returns ``(outcomes, timings)``; an exception inside a check becomes a
    ``fail`` outcome carrying the error message.
    """
    ids = list(CHECKS) if not only else [c for c in CHECKS if c in set(only)]
    unknown = set(only or ()) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown check id(s): {', '.join(sorted(unknown))}")
    outcomes, timings = [], {}
    for cid in ids:
        start = time.perf_counter()
        try:
            outcome = CHECKS[cid](ctx)
        except Exception as exc:  # noqa: BLE001 - reported as a failed check
            outcome = CheckOutcome(cid, FAIL, "check raised an error",
                                   {"error": f"{type(exc).__name__}: {exc}"})
        timings[cid] = time.perf_counter() - start
        outcomes.append(outcome)
    return outcomes, timings
