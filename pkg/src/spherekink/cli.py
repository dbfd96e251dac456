"""Command-line front end.

Subcommands: catalog | solve | sweep | index | singular-index | verify | plot.
Global flags (before the subcommand): --config FILE, --out DIR, --seedless,
--quiet.  A config file holds flat key=value lines mirroring the flags; the
command line overrides the file.

Exit codes: 0 success, 1 usage error, 2 no shooting bracket, 3 polish
failure, 4 verification failure (including a false instability hypothesis
in singular-index).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .catalog import builtin_catalog, catalog_rows, find_eigenmap
from .core import ProblemParams, resample
from .report import (
    SweepConfig,
    class_of_level,
    convergence_check,
    emit_plots,
    run_sweep,
    sweep_report_from_doc,
)
from .serialize import dumps, load_profile, save_profile
from .shooting import (
    NoBracketFound,
    PolishDiverged,
    SolveRequest,
    find_solution,
    newton_polish,
    verify_solution,
)
from .spectral import (
    morse_index,
    report_to_doc,
    truncated_singular_count,
    witness_subspace,
)

_SEEDLESS_NOTE = ("seedless: no random number generation is used anywhere; "
                  "outputs are a pure function of the configuration")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_global_flags(p, *, suppress: bool):
    # on subparsers the defaults are suppressed so they cannot clobber the
    # values the root parser already settled
    dflt = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="FILE",
                   default=argparse.SUPPRESS if suppress else None,
                   help="flat key=value file mirroring the flags; the command "
                        "line overrides it")
    p.add_argument("--out", dest="out_dir", metavar="DIR",
                   default=argparse.SUPPRESS if suppress else ".",
                   help="directory for generated files (default: current)")
    p.add_argument("--seedless", action="store_true",
                   default=argparse.SUPPRESS if suppress else False,
                   help="assert that nothing uses randomness (always true)")
    p.add_argument("--quiet", action="store_true",
                   default=argparse.SUPPRESS if suppress else False,
                   help="suppress informational output")


def _build_parser() -> _Parser:
    p = _Parser(prog="spherekink",
                description="Connecting profiles of the reduced harmonic-map "
                            "equation between spheres: construction, energies, "
                            "Morse index counts, and reports.")
    _add_global_flags(p, suppress=False)

    def gp():
        # fresh parent per subparser: argparse shares parent actions by
        # reference, so one mutable instance must never serve two parsers
        parent = _Parser(add_help=False)
        _add_global_flags(parent, suppress=True)
        return parent

    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    c = sub.add_parser("catalog", help="list built-in eigenmaps", parents=[gp()])
    c.add_argument("--csv", action="store_true", help="emit CSV instead of a table")
    c.set_defaults(func=_cmd_catalog)

    s = sub.add_parser("solve", parents=[gp()], conflict_handler="resolve",
                   help="solve one (class, zeros) level")
    _add_problem_flags(s)
    s.add_argument("--class", dest="symmetry_class", choices=("even", "odd"),
                   required=True, help="symmetry class of the profile")
    s.add_argument("--zeros", type=int, required=True, help="total interior zeros")
    s.add_argument("--cutoff", type=float, default=20.0, help="domain half-width X")
    s.add_argument("--grid", type=int, default=4001, help="grid points N (odd)")
    s.add_argument("--tol", type=float, default=1e-10, help="polish residual tolerance")
    s.add_argument("--out", dest="out_file", metavar="FILE.json", default=None,
                   help="solution file (default: solution_<class>_<zeros>.json)")
    s.set_defaults(func=_cmd_solve)

    w = sub.add_parser("sweep", parents=[gp()], help="solve levels 1..K and write a report")
    _add_problem_flags(w)
    w.add_argument("--max-zeros", type=int, required=True, help="highest level K")
    w.add_argument("--cutoff", type=float, default=20.0, help="domain half-width X")
    w.add_argument("--grid", type=int, default=4001, help="grid points N (odd)")
    w.add_argument("--tol", type=float, default=1e-10, help="polish residual tolerance")
    w.add_argument("--null-band", type=float, default=1e-6,
                   help="half-width of the spectral null band")
    w.add_argument("--plot", action="store_true", help="also emit SVG charts")
    w.set_defaults(func=_cmd_sweep)

    i = sub.add_parser("index", parents=[gp()], help="Morse index report for a stored solution")
    i.add_argument("--solution", metavar="FILE.json", required=True)
    i.add_argument("--cutoff", type=float, default=None,
                   help="recompute after resampling to this half-width")
    i.add_argument("--grid", type=int, default=None,
                   help="recompute after resampling to this many points")
    i.add_argument("--null-band", type=float, default=1e-6)
    i.set_defaults(func=_cmd_index)

    g = sub.add_parser("singular-index", parents=[gp()],
                       help="witness family and truncated counts at the equator map")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--omega", type=float, required=True)
    g.add_argument("--cutoff", type=float, default=20.0)
    g.add_argument("--dims", type=int, default=10, help="requested family size")
    g.set_defaults(func=_cmd_singular_index)

    v = sub.add_parser("verify", parents=[gp()], help="check a stored solution against the equation")
    v.add_argument("--solution", metavar="FILE.json", required=True)
    v.set_defaults(func=_cmd_verify)

    t = sub.add_parser("plot", parents=[gp()], help="emit SVG charts from stored results")
    t.add_argument("--report", metavar="sweep.json", default=None)
    t.add_argument("--solution", metavar="FILE.json", default=None)
    t.set_defaults(func=_cmd_plot)
    return p


def _add_problem_flags(sp):
    sp.add_argument("--m", type=int, default=None, help="domain sphere dimension")
    sp.add_argument("--omega", type=float, default=None, help="eigenmap eigenvalue")
    sp.add_argument("--eigenmap", metavar="NAME", default=None,
                    help="take (m, omega) from the built-in catalog")


def _problem_params(args, parser) -> ProblemParams:
    if args.eigenmap is not None:
        try:
            spec = find_eigenmap(args.eigenmap)
        except KeyError as exc:
            parser.error(str(exc.args[0]))
        omega = args.omega if args.omega is not None else spec.omega
        if omega is None:
            parser.error(f"eigenmap {spec.name} has no stated eigenvalue; "
                         f"pass --omega explicitly")
        m = args.m if args.m is not None else spec.m
        return ProblemParams(m, omega)
    if args.m is None or args.omega is None:
        parser.error("need --m and --omega, or --eigenmap NAME")
    return ProblemParams(args.m, args.omega)


# -- config file ---------------------------------------------------------------

def _read_config(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _coerce(action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction,)):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean for {action.option_strings[0]}, got {raw!r}")
    if action.type is not None:
        return action.type(raw)
    return raw


def _apply_config(parser, sub_parser, values: dict):
    """Install config values as parser defaults so flags still win."""
    def actions_of(p):
        return {opt.lstrip("-"): a for a in p._actions for opt in a.option_strings}

    table = actions_of(parser)
    if sub_parser is not None:
        table.update(actions_of(sub_parser))
    for key, raw in values.items():
        action = table.get(key)
        if action is None or action.dest in ("help", "config"):
            raise ValueError(f"unknown config key {key!r}")
        target = parser if action in parser._actions else sub_parser
        target.set_defaults(**{action.dest: _coerce(action, raw)})
        action.required = False


def _find_subparser(parser, argv):
    sub_action = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    for tok in argv:
        if tok in sub_action.choices:
            return sub_action.choices[tok]
    return None


# -- subcommands -----------------------------------------------------------------

def _cmd_catalog(args) -> int:
    rows = catalog_rows()
    header = ("name", "m", "n", "omega", "degree", "hypothesis")
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
        return 0
    widths = [max(len(header[i]), max(len(r[i]) for r in rows)) for i in range(len(header))]
    def fmt(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    print(fmt(header))
    print(fmt(tuple("-" * w for w in widths)))
    for r in rows:
        print(fmt(r))
    return 0


def _cmd_solve(args, parser) -> int:
    params = _problem_params(args, parser)
    req = SolveRequest(params, args.symmetry_class, args.zeros,
                       cutoff=args.cutoff, grid_size=args.grid,
                       newton_tol=args.tol)
    try:
        prof = find_solution(req)
    except NoBracketFound as exc:
        print(f"no bracket: {exc}", file=sys.stderr)
        return 2
    except PolishDiverged as exc:
        print(f"polish failed: {exc}", file=sys.stderr)
        return 3

    name = args.out_file or f"solution_{args.symmetry_class}_{args.zeros}.json"
    path = Path(name)
    if not path.is_absolute():
        path = Path(args.out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    save_profile(prof, path)

    diag = verify_solution(prof)
    if not args.quiet:
        print(f"solved {args.symmetry_class}/{args.zeros}: "
              f"energy={diag.energy_value:.12g} residual={diag.residual_max:.3e} "
              f"sup={prof.sup_norm:.12g}")
        print(f"wrote {path}")
    if not diag.passed:
        for f in diag.failures:
            print(f"verification: {f}", file=sys.stderr)
        return 4
    return 0


def _cmd_sweep(args, parser) -> int:
    params = _problem_params(args, parser)
    config = SweepConfig(m=params.m, omega=params.omega, nu=params.nu,
                         max_zeros=args.max_zeros, cutoff=args.cutoff,
                         grid_size=args.grid, newton_tol=args.tol,
                         null_band=args.null_band, out_dir=args.out_dir,
                         plots=args.plot)
    report = run_sweep(config)
    if not args.quiet:
        if not report.hypothesis:
            print("NOTE: (m-1)^2/4 < omega fails for these parameters; the "
                  "infinite solution family is not guaranteed (hypothesis=false)")
        print("class  zeros  energy            gap_to_singular   index  nullity")
        for r in report.records:
            cls, z = r.sequence_key
            print(f"{cls:<5}  {z:<5}  {r.energy:<16.12g}  "
                  f"{report.singular_energy - r.energy:<16.6e}  "
                  f"{r.spectral.index:<5}  {r.spectral.nullity_estimate}")
        for cls, z, msg in report.failures:
            print(f"failed {cls}/{z}: {msg}")
        chk = convergence_check(report)
        print(f"convergence: {chk.status}")
        print(f"wrote report to {args.out_dir}")
    if args.max_zeros >= 1 and not report.records:
        print("all levels failed", file=sys.stderr)
        return 2
    return 0


def _cmd_index(args) -> int:
    try:
        prof = load_profile(args.solution)
    except FileNotFoundError:
        print(f"no such file: {args.solution}", file=sys.stderr)
        return 1
    cutoff = args.cutoff if args.cutoff is not None else prof.cutoff
    n = args.grid if args.grid is not None else prof.n
    if cutoff != prof.cutoff or n != prof.n:
        prof = resample(prof, cutoff, n)
        # only the tolerances of the request matter to newton_polish
        zeros = prof.zero_count
        req = SolveRequest(prof.params, class_of_level(zeros), zeros,
                           cutoff=cutoff, grid_size=n)
        try:
            prof = newton_polish(prof, req)
        except PolishDiverged as exc:
            print(f"polish failed after resampling: {exc}", file=sys.stderr)
            return 3
    rep = morse_index(prof, null_band=args.null_band)
    print(dumps(report_to_doc(rep)))
    return 0


def _cmd_singular_index(args) -> int:
    params = ProblemParams(args.m, args.omega)
    try:
        fam = witness_subspace(params, args.dims)
    except ValueError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 4
    count = truncated_singular_count(params, args.cutoff)
    doc = {
        "m": args.m,
        "omega": args.omega,
        "hypothesis": params.hypothesis(),
        "dims": fam.size,
        "epsilon": fam.epsilon,
        "threshold_radius": fam.threshold_radius,
        "half_width": fam.half_width,
        "gram_diagonal": list(fam.gram_diagonal),
        "quadrature_error": fam.quadrature_error,
        "cutoff": args.cutoff,
        "truncated_negative_count": count,
    }
    print(dumps(doc))
    return 0


def _cmd_verify(args) -> int:
    try:
        prof = load_profile(args.solution)
    except FileNotFoundError:
        print(f"no such file: {args.solution}", file=sys.stderr)
        return 1
    diag = verify_solution(prof)
    doc = {
        "residual_max": diag.residual_max,
        "residual_rms": diag.residual_rms,
        "boundary_gap_left": diag.boundary_gap_left,
        "boundary_gap_right": diag.boundary_gap_right,
        "w_violation": diag.w_violation,
        "energy": diag.energy_value,
        "energy_margin": diag.energy_margin,
        "symmetry_defect": diag.symmetry_defect,
        "constraint_excess": diag.constraint_excess,
        "singular_branch": diag.singular_branch,
        "failures": list(diag.failures),
        "passed": diag.passed,
    }
    print(dumps(doc))
    return 0 if diag.passed else 4


def _cmd_plot(args, parser) -> int:
    if args.report is None and args.solution is None:
        parser.error("plot needs --report and/or --solution")
    written = []
    if args.report is not None:
        try:
            with open(args.report, "r", encoding="ascii") as f:
                report = sweep_report_from_doc(json.load(f))
        except FileNotFoundError:
            print(f"no such file: {args.report}", file=sys.stderr)
            return 1
        written += emit_plots(report, args.out_dir)
    if args.solution is not None:
        try:
            prof = load_profile(args.solution)
        except FileNotFoundError:
            print(f"no such file: {args.solution}", file=sys.stderr)
            return 1
        written.append(_plot_single(prof, args.out_dir))
    if not args.quiet:
        for p in written:
            print(f"wrote {p}")
    return 0


def _plot_single(prof, out_dir) -> Path:
    from . import svg
    from .spectral import build_schrodinger

    pot = build_schrodinger(prof).potential
    xs, hs = svg.decimate(prof.grid, prof.h)
    xv, vv = svg.decimate(prof.grid, pot)
    doc = svg.line_chart(
        [svg.Series(tuple(xs), tuple(hs), "#1f6feb", label="h(x)"),
         svg.Series(tuple(xv), tuple(vv), "#d29922", label="V(x)",
                    dashed=True, axis="right")],
        title=f"profile ({prof.symmetry_class} class, {prof.zero_count} zeros)",
        xlabel="x", ylabel="h", ylabel_right="V")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"profile_{prof.symmetry_class}_{prof.zero_count}.svg"
    path.write_text(doc, encoding="ascii", newline="\n")
    return path


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()

    # a config file contributes defaults; real flags override them
    pre = _Parser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        try:
            values = _read_config(known.config)
            _apply_config(parser, _find_subparser(parser, argv), values)
        except (OSError, ValueError) as exc:
            print(f"spherekink: bad config: {exc}", file=sys.stderr)
            return 1

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    if args.seedless and not args.quiet:
        print(_SEEDLESS_NOTE)

    func = args.func
    try:
        if func in (_cmd_solve, _cmd_sweep, _cmd_plot):
            return func(args, parser)
        return func(args)
    except NoBracketFound as exc:
        print(f"spherekink: no bracket: {exc}", file=sys.stderr)
        return 2
    except PolishDiverged as exc:
        print(f"spherekink: polish failed: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"spherekink: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
