"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected in the terminal summary.
"""

import math

import numpy as np

from phfock import berezin as bz
from phfock import quadrature as quad
from phfock.carleson import (
    LatticeWindow,
    carleson_norm_bound,
    carleson_scan,
    necessity_constant_check,
)
from phfock.cli import main
from phfock.core import FockParams, basis_matrix, enumerate_basis
from phfock.kernels import diagonal, k_ph
from phfock.measures import (
    AtomSet,
    BallIndicator,
    GaussianDensity,
    RadialPowerGaussian,
    RadialShells,
    ScaledLebesgue,
    total_mass,
)
from phfock.spectral import (
    compactness_probe,
    diagonal_inequality,
    lp_symbol_sufficiency_check,
    spectral_summary,
    trace_target,
)
from phfock.toeplitz import assemble, blocks, identity_spec
from phfock.verify import (
    ball_average_norm,
    harmonic_mean_constant,
    point_evaluation_constants,
    random_measures,
)

P1 = FockParams(1.0, 1)
P2 = FockParams(1.0, 2)


def _trace(spec, params, D):
    return float(np.trace(assemble(spec, enumerate_basis(params, D), params).entries).real)


def _offset(n):
    return (0.5 - 0.25j,) + (0.0,) * (n - 1)


def test_c01_orthonormality(criterion):
    trunc = enumerate_basis(P1, 6)
    reach = quad.gaussian_reach(1.0, 8)
    rule = quad.polydisk_rule(1, reach, 96, 32)
    B = basis_matrix(trunc, rule.nodes, P1, weighted=True)
    G = B.conj().T @ (rule.weights[:, None] * B) / P1.volume
    off = float(np.max(np.abs(G - np.diag(np.diag(G)))))
    diag = float(np.max(np.abs(np.diag(G) - 1.0)))
    ok = off <= 1e-8
    criterion(1, ok, f"Gram at n=1 D=6: max off-diagonal {off:.2e} (tol 1e-8), "
                     f"diagonal deviation {diag:.2e}")
    assert ok


def test_c02_identity(criterion):
    worst_e, worst_n = 0.0, 0.0
    for params in (P1, P2):
        for D in (2, 6, 10):
            T = assemble(identity_spec(params), enumerate_basis(params, D), params)
            worst_e = max(worst_e, float(np.max(np.abs(T.entries - np.eye(T.size)))))
            worst_n = max(worst_n, abs(spectral_summary(T).operator_norm - 1.0))
    ok = worst_e <= 1e-10 and worst_n <= 1e-9
    criterion(2, ok, f"T_1 = I at D=2,6,10 (n=1,2): entry error {worst_e:.2e} (tol 1e-10), "
                     f"norm error {worst_n:.2e} (tol 1e-9)")
    assert ok


def test_c03_kernel_and_atom_trace(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for params in (P1, P2):
        for z in bz.sample_cloud(params, 50, 3.0, seed=int(rng.integers(1 << 31))):
            t = float(np.sum(np.abs(z) ** 2))
            closed = 2.0 * math.exp(t / params.alpha) - 1.0
            worst = max(worst, abs(k_ph(z, z, params).value.real - closed) / closed,
                        abs(diagonal(z, params) - closed) / closed)
    c = 1.75
    A = assemble(AtomSet((((0.0,), c),)), enumerate_basis(P1, 6), P1)
    tr = float(np.trace(A.entries).real)
    via = bz.trace_via_berezin(A).value
    via_spec = bz.trace_via_berezin(AtomSet((((0.0,), c),)), P1).value
    ok = worst <= 1e-12 and tr == c and abs(via - c) <= 1e-6 and abs(via_spec - c) <= 1e-6
    criterion(3, ok, f"K_ph(z,z) rel error {worst:.2e} (tol 1e-12); atom trace {tr!r} == {c}; "
                     f"Berezin trace {via:.10f} / {via_spec:.10f} (tol 1e-6)")
    assert ok


def test_c04_trace_formula(criterion):
    spec = GaussianDensity(1.0, 1.0)
    target = trace_target(spec, P1)
    traces = [_trace(spec, P1, D) for D in (4, 8, 12)]
    monotone = all(b > a for a, b in zip(traces, traces[1:]))
    rel = abs(traces[-1] - target) / target
    limit_gap = abs(target - 1.5 * math.pi) / (1.5 * math.pi)
    ok = monotone and rel <= 1e-3 and limit_gap <= 1e-8
    criterion(4, ok, f"Gaussian traces {[round(t, 8) for t in traces]} monotone={monotone}; "
                     f"target {target:.10f} vs 3pi/2 gap {limit_gap:.1e}; D=12 rel gap {rel:.2e} "
                     f"(tol 1e-3)")
    assert ok


def _finite_specs(n):
    zero = (0.0,) * n
    off = _offset(n)
    return {
        "gaussian": GaussianDensity(1.0, 1.0),
        "gaussian-offset": GaussianDensity(2.0, 1.5, off),
        "radial-power": RadialPowerGaussian(1.0, 2, 0.75),
        "ball": BallIndicator(1.0, 1.0, off),
        "atoms": AtomSet(((zero, 1.0), (off, 0.5))),
        "shells": RadialShells(((0.0, 0.5), (1.0, 1.0))),
    }


def _closed_mass(spec, n):
    # alpha = 1 throughout
    if isinstance(spec, GaussianDensity):
        return spec.c * (math.pi / spec.beta) ** n
    if isinstance(spec, RadialPowerGaussian):
        q = n + spec.k
        return spec.c * math.pi ** n * math.gamma(q) / (math.gamma(n) * spec.s ** q)
    if isinstance(spec, BallIndicator):
        return spec.c * math.pi ** n * spec.radius ** (2 * n) / math.factorial(n)
    if isinstance(spec, AtomSet):
        return sum(c for _, c in spec.atoms)
    if isinstance(spec, RadialShells):
        return sum(c * math.exp(r * r) for r, c in spec.shells)
    raise TypeError(spec)


def test_c05_sandwich(criterion):
    bad = []
    for name, spec in _finite_specs(1).items():
        mass = _closed_mass(spec, 1)
        assert abs(total_mass(spec, P1) - mass) <= 1e-10 * mass
        target = trace_target(spec, P1)
        if not mass * (1 - 1e-9) <= target <= 2 * mass * (1 + 1e-9):
            bad.append(name)
    ok = not bad
    criterion(5, ok, f"mu(C^n) <= trace target <= 2 mu(C^n) for 6 finite specs; "
                     f"violations: {bad or 'none'}")
    assert ok


def test_c06_radial_diagonality(criterion):
    trunc = enumerate_basis(P1, 8)
    worst, zero_blocks = 0.0, True
    for spec in (RadialPowerGaussian(1.0, 1, 1.0), RadialShells(((0.5, 1.0), (1.5, 0.25)))):
        full = assemble(spec, trunc, P1, method="quadrature").entries
        worst = max(worst, float(np.max(np.abs(full - np.diag(np.diag(full))))))
        fast = blocks(assemble(spec, trunc, P1))
        zero_blocks = zero_blocks and not np.any(fast.MN) and not np.any(fast.NM)
    ok = worst <= 1e-10 and zero_blocks
    criterion(6, ok, f"radial D=8 quadrature off-diagonal {worst:.2e} (tol 1e-10); "
                     f"fast-path MN block exactly zero: {zero_blocks}")
    assert ok


def test_c07_necessity(criterion):
    rng = np.random.default_rng(7)
    specs = {
        "lebesgue": ScaledLebesgue(1.0),
        "gaussian": GaussianDensity(1.0, 1.0),
        "ball": BallIndicator(1.0, 1.5),
        "atoms": AtomSet((((0.0,), 1.0), ((1.0,), 2.0))),
    }
    worst, failures = 0.0, 0
    for spec in specs.values():
        for _ in range(20):
            a = bz.sample_cloud(P1, 1, 3.0, seed=int(rng.integers(1 << 31)))[0]
            r = float(rng.uniform(0.1, 2.0))
            res = necessity_constant_check(spec, a, r, P1, slack=1e-8)
            failures += not res.passed
            if res.bound > 0:
                worst = max(worst, res.mass / res.bound)
    ok = failures == 0
    criterion(7, ok, f"mu(B(a,r)) <= e^(r^2/alpha) int |f_a|^2 dmu on 80 samples: "
                     f"{failures} violations, max ratio {worst:.4f}")
    assert ok


def test_c08_sufficiency(criterion):
    window = LatticeWindow(1.0, 8.0, P1)
    specs = {
        "lebesgue": ScaledLebesgue(1.0),
        "gaussian": GaussianDensity(1.0, 1.0),
        "ball": BallIndicator(1.0, 1.0),
        "atoms": AtomSet((((0.0,), 1.0), ((1.0,), 2.0))),
    }
    ok, notes = True, []
    for name, spec in specs.items():
        scan = carleson_scan(spec, window)
        assert scan.bounded == "yes", name
        norms = [spectral_summary(assemble(spec, enumerate_basis(P1, D), P1)).operator_norm
                 for D in (4, 6, 8, 10)]
        bound = carleson_norm_bound(scan.sup_mass, window.r, P1)
        good = all(b >= a * (1 - 1e-9) for a, b in zip(norms, norms[1:])) and max(norms) <= bound
        if isinstance(spec, ScaledLebesgue):
            scale = spec.c * P1.volume
            good = good and all(abs(v - scale) <= 1e-9 * scale for v in norms)
        ok = ok and good
        notes.append(f"{name} {norms[-1]:.4g}<={bound:.4g}")
    criterion(8, ok, "norms at D=4..10 non-decreasing and bounded; " + ", ".join(notes))
    assert ok


def test_c09_vanishing_compact(criterion):
    window = LatticeWindow(1.0, 8.0, P1)
    rng = np.random.default_rng(11)
    atoms = tuple(((complex(z[0]),), float(rng.uniform(0.5, 2.0)))
                  for z in bz.sample_cloud(P1, 3, 2.0, seed=5))
    cases = {
        "gaussian": (GaussianDensity(1.0, 1.0), True),
        "ball": (BallIndicator(1.0, 1.0), True),
        "atoms": (AtomSet(atoms), True),
        "identity": (identity_spec(P1), False),
    }
    ok, notes = True, []
    for name, (spec, compact) in cases.items():
        probe = compactness_probe(spec, P1, degrees=(8,), window=window)
        sv = probe.singular_values
        flat = max(sv) - min(sv) <= 1e-9 * max(sv)
        good = probe.vanishing == ("yes" if compact else "no") and probe.decaying == compact \
            and probe.agreement is True
        if not compact:
            good = good and flat
        ok = ok and good
        notes.append(f"{name}: vanishing={probe.vanishing} tail={probe.tail_ratio:.1e}")
    criterion(9, ok, "; ".join(notes))
    assert ok


def test_c10_berezin_bounds(criterion):
    z = bz.sample_cloud(P1, 100, 4.0, seed=13)
    T = assemble(GaussianDensity(1.0, 1.0, (0.5,)), enumerate_basis(P1, 8), P1)
    norm = spectral_summary(T).operator_norm
    sup = float(np.max(np.abs(bz.berezin_of_matrix(T, z))))
    I = assemble(identity_spec(P1), enumerate_basis(P1, 8), P1)
    ident = float(np.max(np.abs(bz.berezin_of_matrix(I, z) - 1.0)))
    l1 = bz.berezin_lp_norm(T, 1)
    tr = float(np.trace(T.entries).real)
    ok = sup <= norm + 1e-8 and ident <= 1e-12 and abs(l1 - tr) <= 1e-6
    criterion(10, ok, f"sup Berezin {sup:.6f} <= norm {norm:.6f}; identity deviation "
                      f"{ident:.1e}; weighted L1 {l1:.10f} vs trace {tr:.10f}")
    assert ok


def test_c11_berezin_power(criterion):
    # Implemented as stated.  For positive T and unit k_z, Cauchy-Schwarz gives
    # <T^2 k, k> >= <T k, k>^2, so this is expected to fail on any positive T
    # that is not a multiple of the identity along k_z.
    rng = np.random.default_rng(17)
    worst, bad, count = -math.inf, 0, 0
    for spec in random_measures(P1, rng):
        T = assemble(spec, enumerate_basis(P1, 6), P1)
        z = bz.sample_cloud(P1, 20, 2.5, seed=int(rng.integers(1 << 31)))
        gap = bz.berezin_of_matrix(bz.matrix_power(T, 2), z) - bz.berezin_of_matrix(T, z) ** 2
        worst = max(worst, float(np.max(gap)))
        bad += int(np.sum(gap > 1e-10))
        count += len(z)
    ok = bad == 0
    criterion(11, ok, f"Ber(T^2) <= Ber(T)^2 + 1e-10: {bad}/{count} violations, "
                      f"max excess {worst:.3g}")
    assert ok


def test_c12_lp_symbol(criterion):
    ok, notes = True, []
    for name, g in (("ball", BallIndicator(1.0, 1.0)), ("gaussian", GaussianDensity(1.0, 1.0))):
        for p in (1.0, 2.0):
            rep = lp_symbol_sufficiency_check(g, p, P1, degrees=(4, 8))
            ok = ok and rep.passed
            notes.append(f"{name} p={p:g}: {max(rep.sums):.4f}<={rep.bound:.4f}")
    criterion(12, ok, "; ".join(notes))
    assert ok


def test_c13_diagonal_inequality(criterion):
    worst = 0.0
    for params, degrees in ((P1, range(0, 9)), (P2, range(0, 5))):
        for spec in list(_finite_specs(params.n).values())[:4]:
            for D in degrees:
                E = assemble(spec, enumerate_basis(params, D), params).entries
                for p in (1, 2, 3):
                    d, s = diagonal_inequality(E, p)
                    worst = max(worst, d ** (1 / p) / s ** (1 / p))
    ok = worst <= 1 + 1e-12
    criterion(13, ok, f"diagonal l^p <= S_p for 4 specs, every D, p=1,2,3, n=1,2: "
                      f"max ratio {worst:.12f}")
    assert ok


def _ball_integral_plain(f, a, r, p):
    rule = quad.ball_rule(1, r, 256, 256, a)
    return float(np.sum(rule.weights * np.abs(f(rule.nodes)) ** p))


def test_c14_point_evaluation(criterion):
    rng = np.random.default_rng(19)
    # brute-force calibration of C_p over harmonic monomials
    monomials = [lambda z: np.ones(len(z))]
    for k in range(1, 4):
        monomials.append(lambda z, k=k: z[:, 0] ** k)
        monomials.append(lambda z, k=k: np.conj(z[:, 0]) ** k)
        monomials.append(lambda z, k=k: (z[:, 0] ** k).real)
    calibrated = 0.0
    for _ in range(20):
        a = np.array([complex(*rng.uniform(-1.5, 1.5, 2))])
        r = float(rng.uniform(0.3, 2.0))
        for p in (1.0, 2.0):
            for f in monomials:
                val = abs(f(a[None, :])[0]) ** p
                if val < 1e-3:
                    continue
                calibrated = max(calibrated, val * r ** 2 / _ball_integral_plain(f, a, r, p))
    c_p = harmonic_mean_constant(1)
    calibration_ok = abs(calibrated - c_p) <= 1e-6 * c_p

    R = 2.0
    trunc = enumerate_basis(P1, 3)
    worst = {"harmonic": 0.0, "entire_safe": 0.0, "entire_literal": 0.0}
    for _ in range(50):
        a = bz.sample_cloud(P1, 1, 2.0, seed=int(rng.integers(1 << 31)))[0]
        r = float(rng.uniform(0.2, R))
        q = float(rng.choice([1.0, 2.0]))
        coeffs = rng.standard_normal(trunc.size) + 1j * rng.standard_normal(trunc.size)
        holo = np.where(trunc.holo_mask, coeffs, 0)

        def f(z, c=coeffs):
            return basis_matrix(trunc, z, P1, weighted=False) @ c

        def g(z, c=holo):
            return basis_matrix(trunc, z, P1, weighted=False) @ c

        consts = point_evaluation_constants(1, q, R, float(np.linalg.norm(a)), 1.0)
        weight = math.exp(-float(np.sum(np.abs(a) ** 2)) / 2.0)
        qtol = 1e-7 if q == 2.0 else 1e-5
        for key, func in (("harmonic", f), ("entire_safe", g), ("entire_literal", g)):
            lhs = abs(func(a[None, :])[0] * weight) ** q
            rhs = consts[key] / r ** 2 * ball_average_norm(func, a, r, q, P1, qtol)
            worst[key] = max(worst[key], lhs / rhs)
    ok = calibration_ok and worst["harmonic"] <= 1 + 1e-6 and worst["entire_safe"] <= 1 + 1e-6
    criterion(14, ok, f"C_p calibrated {calibrated:.8f} vs n!/pi^n {c_p:.8f}; max ratios "
                      f"harmonic {worst['harmonic']:.3g}, entire (safe) {worst['entire_safe']:.3g}, "
                      f"entire (literal, recorded) {worst['entire_literal']:.3g}")
    assert ok


def test_c15_determinism(criterion, tmp_path, capsys):
    codes, docs = [], []
    for run in ("a", "b"):
        out = tmp_path / run
        codes.append(main(["verify", "--out", str(out)]))
        docs.append((out / "verify.json").read_bytes())
    capsys.readouterr()
    ok = docs[0] == docs[1] and codes[0] == codes[1]
    criterion(15, ok, f"two verify runs byte-identical: {docs[0] == docs[1]} "
                      f"({len(docs[0])} bytes, exit codes {codes})")
    assert ok
