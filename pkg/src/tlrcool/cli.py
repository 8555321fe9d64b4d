"""Command-line entry point.

Exit status: 0 success, 1 usage or configuration error, 2 the requested
point is unstable, 3 numerical non-convergence, 4 validation failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, spectra
from .config import ConfigError, RunConfig, load
from .cooling import REPORT_COLUMNS, cooling_limits, report_row
from .io import Document, dumps
from .lyapunov import NoStationaryStateError, compare_with_quadrature
from .params import InvalidParameterError
from .stability import Verdict, drift_matrix, eigen_verdict, routh_hurwitz_verdict
from .sweep import NoFeasiblePointError, SweepSpec, optimize, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_NONCONVERGED = 3
EXIT_VALIDATION = 4
WORKERS_ENV = "TLRCOOL_WORKERS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, table: bool = False):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a configuration value")
    p.add_argument("--format", choices=("text", "json", "csv"), help="output format (default: text on stdout, json for files)")
    p.add_argument("--out", help="write the document to this path")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance")
    p.add_argument("--delta", help="effective detuning (replaces drive.delta0)")
    p.add_argument("--delta0", help="bare detuning (replaces drive.delta)")
    if table:
        p.add_argument("--workers", type=int, help=f"worker processes (default: ${WORKERS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tlrcool", description="Back-action cooling of a mechanical resonator by a driven transmission-line resonator.")
    parser.add_argument("--version", action="version", version=f"tlrcool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("steady", help="working point: all detuning roots and their stability")
    _common(p)
    p = sub.add_parser("spectrum", help="spectra on a frequency grid (CSV)")
    _common(p)
    p.add_argument("--omega-min", type=float)
    p.add_argument("--omega-max", type=float)
    p.add_argument("--points", type=int)
    p = sub.add_parser("cool", help="cooling report for one point")
    _common(p)
    p.add_argument("--approx-only", action="store_true", help="skip the quadrature")
    p = sub.add_parser("sweep", help="grid sweep over one or two parameters")
    _common(p, table=True)
    p.add_argument("--axis", action="append", default=[], metavar="NAME:START:STOP:COUNT[:log]")
    p.add_argument("--approx-only", action="store_true")
    p = sub.add_parser("optimize", help="minimize a phonon number over one or two parameters")
    _common(p)
    p.add_argument("--free", action="append", metavar="NAME")
    p.add_argument("--bounds", action="append", default=[], metavar="NAME=LO:HI")
    p.add_argument("--objective", help="n_bf_exact, n_bf_approx or n_ca")
    p.add_argument("--constraint", action="append", default=[], metavar="FLAG")
    p = sub.add_parser("limits", help="cooling limits and the n_ca optimum")
    _common(p)
    p = sub.add_parser("validate", help="oracle comparison and identity checks")
    _common(p)
    return parser


def _overrides(args) -> list[str]:
    out = list(args.set)
    if args.delta is not None and args.delta0 is not None:
        raise UsageError("give --delta or --delta0, not both")
    if args.delta is not None:
        out.append(f"drive.delta={_toml_value(args.delta)}")
    if args.delta0 is not None:
        out.append(f"drive.delta0={_toml_value(args.delta0)}")
    if args.tol is not None:
        out.append(f"tolerances.rel_tol={args.tol!r}")
    return out


def _toml_value(text: str) -> str:
    try:
        float(text)
        return text
    except ValueError:
        return '"' + text.replace('"', "") + '"'


def _emit(cfg: RunConfig, args, doc: Document, text_lines: list[str]):
    fmt = args.format or cfg.output.get("format", "json")
    path = args.out or cfg.output.get("path")
    if path:
        if fmt == "text":
            fmt = "json"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dumps(doc, fmt))
        print(f"wrote {path}")
    elif args.format in ("json", "csv"):
        sys.stdout.write(dumps(doc, args.format))
    else:
        print("\n".join(text_lines))


def _meta(cfg: RunConfig, **extra) -> dict:
    meta = {"tool": "tlrcool", "version": __version__}
    echo = cfg.si_echo()
    if echo is not None:
        meta["si_echo"] = echo
    meta.update(extra)
    return meta


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def _report_doc(cfg, kind, reports, extra_cols=(), extra_vals=None, **meta):
    cols = list(extra_cols) + list(REPORT_COLUMNS)
    rows = []
    for i, r in enumerate(reports):
        flat = report_row(r)
        head = list(extra_vals[i]) if extra_vals else []
        rows.append(head + [flat[c] for c in REPORT_COLUMNS])
    return Document(kind=kind, columns=cols, rows=rows, config=cfg.resolved(), meta=_meta(cfg, **meta))


def cmd_steady(cfg: RunConfig, args) -> int:
    wp = cfg.model.working_point()
    cols = ["root", "delta", "verdict", "principal"]
    rows = [[i, r.delta, r.verdict.value, i == 0 or wp.mode == "delta"] for i, r in enumerate(wp.roots)]
    info = {
        "delta": wp.delta,
        "delta0": wp.delta0,
        "a_mean": [wp.a_mean.real, wp.a_mean.imag],
        "x_mean": wp.x_mean,
        "photon_number": wp.photon_number,
        "g_eff": wp.g_eff,
        "verdict": wp.verdict.value,
        "multistable": wp.multistable,
        "linearization_ok": wp.linearization_ok,
        "mode": wp.mode,
    }
    doc = Document("steady", cols, rows, cfg.resolved(), _meta(cfg, working_point=info))
    lines = [f"{k:17s} {_fmt(v)}" for k, v in info.items()]
    lines += [f"root {i}: Delta = {r.delta:.10g} ({r.verdict.value})" for i, r in enumerate(wp.roots)]
    _emit(cfg, args, doc, lines)
    return EXIT_OK if wp.verdict == Verdict.STABLE else EXIT_UNSTABLE


def cmd_spectrum(cfg: RunConfig, args) -> int:
    spec = cfg.spectrum
    lo = args.omega_min if args.omega_min is not None else float(spec.get("omega_min", -3.0))
    hi = args.omega_max if args.omega_max is not None else float(spec.get("omega_max", 3.0))
    n = args.points if args.points is not None else int(spec.get("points", 601))
    if not (n >= 2 and hi > lo):
        raise UsageError("spectrum grid needs points >= 2 and omega_max > omega_min")
    wp = cfg.model.working_point()
    if wp.verdict != Verdict.STABLE:
        print(f"working point is {wp.verdict.value}", file=sys.stderr)
        return EXIT_UNSTABLE
    sample = spectra.sample(np.linspace(lo, hi, n), wp, cfg.model.params, cfg.tolerances.white_thermal)
    rows = [list(r) for r in spectra.spectrum_rows(sample)]
    doc = Document("spectrum", list(spectra.SPECTRUM_COLUMNS), rows, cfg.resolved(), _meta(cfg))
    if not (args.out or cfg.output.get("path")) and args.format is None:
        args.format = "csv"
    _emit(cfg, args, doc, [])
    return EXIT_OK


def cmd_cool(cfg: RunConfig, args) -> int:
    report = cfg.model.evaluate(cfg.tolerances, exact=not args.approx_only)
    doc = _report_doc(cfg, "cool", [report], notes=list(report.notes))
    flat = report_row(report)
    lines = [f"{k:20s} {_fmt(v)}" for k, v in flat.items()] + [f"note: {n}" for n in report.notes]
    _emit(cfg, args, doc, lines)
    if report.verdict != Verdict.STABLE.value:
        return EXIT_UNSTABLE
    if not args.approx_only and not report.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def _parse_axis(text: str) -> dict:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise UsageError(f"axis {text!r} is not NAME:START:STOP:COUNT[:log]")
    out = {"name": parts[0], "start": parts[1], "stop": parts[2], "count": int(parts[3])}
    if len(parts) == 5:
        out["scale"] = parts[4]
    return out


def _workers(args, cfg) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from exc
    return max(1, int(cfg.output.get("workers", 1)))


def cmd_sweep(cfg: RunConfig, args) -> int:
    if not cfg.axes:
        raise UsageError("no sweep axes: use --axis or a [sweep] section")
    exact = cfg.sweep_exact and not args.approx_only
    table = run_sweep(SweepSpec(axes=cfg.axes, base=cfg.model, tolerances=cfg.tolerances, exact=exact), _workers(args, cfg))
    cols = [f"axis_{n}" for n in table.axes] + ["status", "error"] + list(REPORT_COLUMNS)
    rows = []
    for cell in table.cells:
        if cell.report is not None:
            flat = report_row(cell.report)
            vals = [flat[c] for c in REPORT_COLUMNS]
        else:
            vals = [None] * len(REPORT_COLUMNS)
        rows.append(list(cell.coords) + [cell.status, cell.error] + vals)
    doc = Document("sweep", cols, rows, cfg.resolved(), _meta(cfg, exact=exact))
    if args.format in (None, "text") and not (args.out or cfg.output.get("path")):
        args.format = "csv"
    _emit(cfg, args, doc, [])
    bad = sum(c.status == "error" for c in table.cells)
    return EXIT_NONCONVERGED if bad else EXIT_OK


def cmd_optimize(cfg: RunConfig, args) -> int:
    opt = dict(cfg.optimize)
    free = args.free or opt.get("free") or ["delta"]
    objective = args.objective or opt.get("objective", "n_bf_exact")
    bounds = dict(opt.get("bounds", {}))
    for item in args.bounds:
        name, _, rng = item.partition("=")
        lo, _, hi = rng.partition(":")
        try:
            bounds[name] = [float(lo), float(hi)]
        except ValueError as exc:
            raise UsageError(f"bounds {item!r} is not NAME=LO:HI") from exc
    for name in free:
        if name not in bounds and name == "delta":
            bounds[name] = [0.25, 3.0]
    constraints = tuple(args.constraint) or tuple(opt.get("constraints", ()))
    try:
        best = optimize(
            cfg.model,
            free,
            bounds,
            objective,
            constraints=constraints,
            grid=int(opt.get("grid", 41)),
            xtol=float(opt.get("xtol", 1e-4)),
            tolerances=cfg.tolerances,
        )
    except NoFeasiblePointError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_UNSTABLE
    info = {"point": best.point, "value": best.value, "objective": objective, "evaluations": best.evaluations}
    names = sorted(best.point)
    doc = _report_doc(cfg, "optimize", [best.report], [f"opt_{n}" for n in names], [[best.point[n] for n in names]], optimum=info)
    lines = [f"{k} = {v:.8g}" for k, v in best.point.items()] + [f"{objective} = {best.value:.6g}", f"evaluations = {best.evaluations}"]
    _emit(cfg, args, doc, lines)
    return EXIT_OK


def cmd_limits(cfg: RunConfig, args) -> int:
    wp = cfg.model.working_point()
    lim = cooling_limits(cfg.model.params, wp)
    cols = list(lim)
    doc = Document("limits", cols, [[lim[c] for c in cols]], cfg.resolved(), _meta(cfg))
    _emit(cfg, args, doc, [f"{k:18s} {_fmt(v)}" for k, v in lim.items()])
    return EXIT_OK


def validation_checks(cfg: RunConfig) -> list[tuple[str, bool, str]]:
    """Run the oracle comparison and structural identities at the
    configured point; returns (name, passed, detail) triples."""
    params = cfg.model.params
    wp = cfg.model.working_point()
    checks = []
    dm = drift_matrix(params, wp.a_mean, wp.delta)
    tr = dm.trace + params.gamma_b + 2 * params.kappa
    checks.append(("drift trace = -(gamma_b + 2 kappa)", abs(tr) <= 1e-12 * (1 + params.kappa), f"residual {tr:.2e}"))
    ev, rh = eigen_verdict(dm), routh_hurwitz_verdict(dm.char_poly)
    checks.append(("eigenvalue and Routh-Hurwitz verdicts agree", ev == rh or Verdict.MARGINAL in (ev, rh), f"{ev.value}/{rh.value}"))
    if wp.verdict != Verdict.STABLE:
        checks.append(("working point stable", False, wp.verdict.value))
        return checks
    w = np.linspace(-5, 5, 2001) * params.omega_b
    c1 = np.asarray(spectra.chi_eff(w, wp, params))
    c2 = np.asarray(spectra.chi_eff_mechanical(w, wp, params))
    d = float(np.max(np.abs(c1 - c2) / np.abs(c1)))
    checks.append(("chi_eff equals its effective-oscillator form", d < 1e-9, f"max rel {d:.2e}"))
    if wp.delta != 0:
        s1 = np.asarray(spectra.s_ca(w, wp, params)[0])
        s2 = np.asarray(spectra.s_ca_via_gamma(w, wp, params))
        d = float(np.max(np.abs(s1 - s2) / np.maximum(np.abs(s1), 1e-300)))
        checks.append(("S_ca equals its gamma_ca form", d < 1e-9, f"max rel {d:.2e}"))
    try:
        for c in compare_with_quadrature(params, wp, tol=cfg.tolerances):
            if not c.applicable:
                checks.append((f"oracle {c.branch}: not applicable", True, c.reason))
                continue
            detail = ", ".join(f"{k} {v:.2e}" for k, v in c.deviations.items())
            checks.append((f"oracle {c.branch} < {c.rel_tol:g}", c.passed, detail))
    except NoStationaryStateError as exc:
        checks.append(("oracle", False, str(exc)))
    return checks


def cmd_validate(cfg: RunConfig, args) -> int:
    checks = validation_checks(cfg)
    doc = Document(
        "validate",
        ["check", "passed", "detail"],
        [[n, ok, d] for n, ok, d in checks],
        cfg.resolved(),
        _meta(cfg),
    )
    _emit(cfg, args, doc, [f"{'PASS' if ok else 'FAIL'}  {n}  ({d})" for n, ok, d in checks])
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_VALIDATION


COMMANDS = {
    "steady": cmd_steady,
    "spectrum": cmd_spectrum,
    "cool": cmd_cool,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "limits": cmd_limits,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _overrides(args)
        extra = {}
        if getattr(args, "axis", None):
            extra = {"sweep": {"axes": [_parse_axis(a) for a in args.axis]}}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = load(args.config, overrides, extra=extra)
            code = COMMANDS[args.command](cfg, args)
        for w in {str(w.message) for w in caught}:
            print(f"warning: {w}", file=sys.stderr)
        return code
    except (UsageError, ConfigError, InvalidParameterError, OSError) as exc:
        print(f"tlrcool: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"tlrcool: numerical error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
