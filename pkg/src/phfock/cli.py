"""Command-line front end: ``phfock {kernel,carleson,toeplitz,berezin,verify}``.

Exit codes: 0 success, 2 invalid config, 3 resource cap exceeded,
4 inadmissible measure, 5 check or computation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from . import berezin as bz
from .carleson import LatticeWindow, carleson_scan
from .core import FockParams, enumerate_basis
from .errors import InadmissibleMeasureError, QuadratureError, ResourceError
from .kernels import k_alpha, k_ph, k_ph_normalized, normalized_pairing
from .schema import RunConfig, _pairs_to_point, measure_to_dict, point_to_list
from .spectral import spectral_summary
from .toeplitz import assemble, blocks
from .verify import PASS, Context, run_checks

EXIT_OK, EXIT_SCHEMA, EXIT_RESOURCE, EXIT_INADMISSIBLE, EXIT_CHECK = 0, 2, 3, 4, 5
GENERATOR = "numpy.random.PCG64"


class ConfigError(Exception):
    pass


def jsonable(obj):
    """Convert numpy scalars, complex numbers and non-finite floats for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return obj


def write_json(path, doc):
    path.write_text(json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n")


def write_csv(path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _format_validation(exc):
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "\n".join(lines)


def load_config(args):
    """Read the config file (if any) and apply flag overrides."""
    doc = {}
    if args.config:
        text = Path(args.config).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}")
        if not isinstance(doc, dict):
            raise ConfigError(f"{args.config}: the config must be a JSON object")
    if args.tol is not None:
        doc["check_tol" if args.command == "verify" else "tol"] = args.tol
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.threads is not None:
        doc["threads"] = args.threads
    if getattr(args, "only", None):
        doc["only"] = [c for item in args.only for c in item.split(",") if c]
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc


def _echo(cfg):
    return cfg.model_dump(mode="json", exclude_none=True)


def _header(cfg, command):
    return {"tool": "phfock", "version": __version__, "command": command, "config": _echo(cfg),
            "seed": cfg.seed, "generator": GENERATOR}


def _params(cfg):
    return FockParams(cfg.alpha, cfg.n)


def _spec(cfg):
    try:
        return cfg.spec()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_kernel(cfg, out):
    params = _params(cfg)
    records = []
    for pair in cfg.pairs:
        z = np.array(_pairs_to_point(pair.z))
        w = np.array(_pairs_to_point(pair.w))
        records.append({
            "z": point_to_list(z),
            "w": point_to_list(w),
            "k_alpha": k_alpha(z, w, params),
            "k_ph": k_ph(z, w, params).value,
            "k_ph_normalized": k_ph_normalized(z, w, params),
            "normalized_pairing": normalized_pairing(z, w, params),
        })
    doc = _header(cfg, "kernel") | {"records": records,
                                    "statement": "K_ph(z,w) = K_alpha(z,w) + K_alpha(w,z) - 1"}
    write_json(out / "kernel.json", doc)
    return EXIT_OK


def cmd_carleson(cfg, out):
    params = _params(cfg)
    spec = _spec(cfg)
    window = LatticeWindow(cfg.window.r, cfg.window.L, params, cfg.max_lattice_points)
    report = carleson_scan(spec, window, cfg.p_list, threads=cfg.threads)
    doc = _header(cfg, "carleson") | {"report": report.to_dict(),
                                      "statement": "ball masses mu(B(z_k, r)) on the lattice r Z^{2n}"}
    write_json(out / "carleson.json", doc)
    header = [f"{part}_{i + 1}" for i in range(params.n) for part in ("re", "im")] + ["mass"]
    rows = [point_to_list(z) + [repr(float(m))] for z, m in zip(report.points, report.masses)]
    write_csv(out / "carleson_masses.csv", header, rows)
    return EXIT_OK


def cmd_toeplitz(cfg, out):
    params = _params(cfg)
    spec = _spec(cfg)
    summaries = []
    for D in cfg.degrees:
        T = assemble(spec, enumerate_basis(params, D), params, cfg.tol)
        summary = spectral_summary(T, cfg.p_list)
        parts = blocks(T)
        off = T.entries - np.diag(np.diag(T.entries))
        record = summary.to_dict() | {
            "hermitian_defect": T.hermitian_defect,
            "max_off_diagonal": float(np.max(np.abs(off))) if off.size else 0.0,
            "rank": int(np.sum(summary.singular_values > 1e-10 * max(summary.operator_norm, 1e-300))),
            "block_norms": {name: float(np.linalg.norm(getattr(parts, name), 2))
                            if getattr(parts, name).size else 0.0
                            for name in ("MM", "MN", "NM", "NN")},
            "method": T.metadata.get("method"),
        }
        summaries.append(record)
        write_json(out / f"matrix_D{D}.json", T.to_dict())
        write_csv(out / f"spectrum_D{D}.csv", ["index", "eigenvalue"],
                  [[i, repr(float(v))] for i, v in enumerate(summary.eigenvalues)])
    doc = _header(cfg, "toeplitz") | {"measure": measure_to_dict(spec), "summaries": summaries}
    write_json(out / "summary.json", doc)
    return EXIT_OK


def cmd_berezin(cfg, out):
    params = _params(cfg)
    spec = _spec(cfg)
    profile = bz.decay_profile(spec, cfg.radii, params, cfg.samples, cfg.seed, tol=cfg.tol)
    doc = _header(cfg, "berezin") | {"profile": profile.to_dict()}
    if cfg.degrees:
        T = assemble(spec, enumerate_basis(params, max(cfg.degrees)), params, cfg.tol)
        doc["matrix_profile"] = bz.decay_profile(T, cfg.radii, params, cfg.samples,
                                                 cfg.seed).to_dict()
    if cfg.trace:
        doc["trace"] = bz.trace_via_berezin(spec, params, cfg.tol).to_dict()
    write_json(out / "berezin.json", doc)
    write_csv(out / "berezin_profile.csv", ["radius", "value"],
              [[repr(r), repr(v)] for r, v in zip(profile.radii, profile.values)])
    return EXIT_OK


def cmd_verify(cfg, out):
    ctx = Context(_params(cfg), seed=cfg.seed, check_tol=cfg.check_tol, threads=cfg.threads)
    try:
        outcomes, timings = run_checks(ctx, cfg.only)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    failed = [o.id for o in outcomes if o.verdict != PASS]
    doc = _header(cfg, "verify") | {
        "checks": [o.to_dict() for o in outcomes],
        "summary": {"passed": sum(o.verdict == PASS for o in outcomes),
                    "failed": failed, "total": len(outcomes)},
    }
    write_json(out / "verify.json", doc)
    write_json(out / "timings.json", {k: round(v, 6) for k, v in timings.items()})
    for o in outcomes:
        print(f"{o.verdict.upper():5s} {o.id}")
    if failed:
        print(f"failing checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


COMMANDS = {
    "kernel": cmd_kernel,
    "carleson": cmd_carleson,
    "toeplitz": cmd_toeplitz,
    "berezin": cmd_berezin,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phfock",
        description="Toeplitz operators on the pluriharmonic Fock space: kernels, Carleson "
                    "scans, truncated matrices, Berezin transforms and the verification suite.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "kernel": "evaluate kernels at the configured point pairs",
        "carleson": "lattice ball-mass scan and Carleson verdicts",
        "toeplitz": "assemble truncated matrices and their spectra",
        "berezin": "Berezin decay profile and optional trace",
        "verify": "run the verification checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="JSON config document")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
        p.add_argument("--threads", type=int, metavar="K", help="worker cap (results unaffected)")
        p.add_argument("--tol", type=float, metavar="X",
                       help="integration tolerance; for verify, the check comparison tolerance")
        p.add_argument("--seed", type=int, metavar="S", help="seed for sampled points")
        if name == "verify":
            p.add_argument("--only", action="append", metavar="CHECK_ID",
                           help="run only these checks (repeatable or comma-separated)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InadmissibleMeasureError as exc:
        print(f"inadmissible measure: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (QuadratureError, ArithmeticError, RuntimeError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
