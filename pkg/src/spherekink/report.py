"""Sweeps over zero counts, convergence tables, and flat-file reporting.

A sweep solves every level 1..max_zeros (the parity of the level fixes its
symmetry class), attaches energies and spectral counts, and serialises the
lot as CSV + JSON + optional SVG.  Output bytes are a pure function of the
configuration: records are sorted before writing, floats are rendered with
a fixed format, and nothing stamps wall-clock time.

Levels are solved independently of each other (fan-out); a level that fails
to bracket or polish becomes a failure entry rather than aborting the rest.
All file writes happen in one collector pass at the end.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__, svg
from .core import (
    HALF_PI,
    NuPerturbation,
    ProblemParams,
    Profile,
    energy,
    singular_energy,
    weighted_norm,
)
from .serialize import dumps, format_float, profile_from_doc, profile_to_doc
from .shooting import NoBracketFound, PolishDiverged, SolveRequest, find_solution
from .spectral import SpectralReport, build_schrodinger, morse_index, report_to_doc

VERSION_STAMP = f"spherekink {__version__}; numpy {np.__version__}; scipy {scipy.__version__}"


@dataclass(frozen=True)
class SweepConfig:
    """One experiment: problem parameters, levels, and discretisation."""

    m: int
    omega: float
    max_zeros: int
    nu: NuPerturbation | None = None
    cutoff: float = 20.0
    grid_size: int = 4001
    newton_tol: float = 1e-10
    null_band: float = 1e-6
    boundary_tol: float = 1e-6
    out_dir: str | None = None
    plots: bool = False

    def __post_init__(self):
        if self.max_zeros < 0:
            raise ValueError("max_zeros must be >= 0")

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.m, self.omega, self.nu)


@dataclass(frozen=True)
class SolutionRecord:
    """One solved level with its derived quantities.

    Deliberately not self-validating, so diagnostic paths can build records
    that break the expected bounds (convergence_check points at them).
    """

    profile: Profile
    energy: float
    spectral: SpectralReport
    sup_norm: float
    H_norm: float
    sequence_key: tuple  # (symmetry class, total zeros)


@dataclass(frozen=True)
class SweepReport:
    config: SweepConfig
    singular_energy: float
    hypothesis: bool
    records: tuple
    failures: tuple        # (class, zeros, message)
    convergence_table: tuple  # (class, zeros, energy_gap, sup_norm, H_norm)
    version: str = VERSION_STAMP


def make_record(prof: Profile, spectral: SpectralReport) -> SolutionRecord:
    return SolutionRecord(profile=prof, energy=energy(prof), spectral=spectral,
                          sup_norm=prof.sup_norm, H_norm=weighted_norm(prof),
                          sequence_key=(prof.symmetry_class, prof.zero_count))


def class_of_level(zeros: int) -> str:
    return "odd" if zeros % 2 == 1 else "even"


def _solve_level(config: SweepConfig, zeros: int) -> SolutionRecord:
    req = SolveRequest(config.params, class_of_level(zeros), zeros,
                       cutoff=config.cutoff, grid_size=config.grid_size,
                       newton_tol=config.newton_tol, boundary_tol=config.boundary_tol)
    prof = find_solution(req)
    rep = morse_index(prof, null_band=config.null_band)
    rec = make_record(prof, rep)
    if not rec.energy < singular_energy(config.params):
        raise PolishDiverged(
            f"energy {rec.energy!r} is not below the singular level; the level "
            f"did not converge to a connecting profile")
    return rec


def run_sweep(config: SweepConfig) -> SweepReport:
    """Solve all levels, assemble the report, and (if configured) write it."""
    e_inf = singular_energy(config.params)
    records = []
    failures = []
    for zeros in range(1, config.max_zeros + 1):
        try:
            records.append(_solve_level(config, zeros))
        except (NoBracketFound, PolishDiverged, ValueError, RuntimeError) as exc:
            failures.append((class_of_level(zeros), zeros, str(exc)))

    records.sort(key=lambda r: r.sequence_key)
    failures.sort(key=lambda f: (f[0], f[1]))
    for cls in ("even", "odd"):
        es = [r.energy for r in records if r.sequence_key[0] == cls]
        if any(b <= a for a, b in zip(es, es[1:])):
            raise RuntimeError(f"energies in the {cls} class are not strictly increasing")

    table = tuple((r.sequence_key[0], r.sequence_key[1], e_inf - r.energy,
                   r.sup_norm, r.H_norm) for r in records)
    report = SweepReport(config=config, singular_energy=e_inf,
                         hypothesis=config.params.hypothesis(),
                         records=tuple(records), failures=tuple(failures),
                         convergence_table=table)
    if config.out_dir is not None:
        write_report(report, config.out_dir)
    return report


# -- convergence check ---------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceCheck:
    status: str            # "pass" | "fail" | "insufficient data"
    failures: tuple
    table: tuple           # (class, zeros, energy_gap, sup_norm, H_norm)
    slack: float


def convergence_check(report: SweepReport, *, slack: float = 1e-6) -> ConvergenceCheck:
    """Trend check per class: sup_norm, H_norm, and the energy gap to the
    singular level must all decrease along increasing zero count.

    A decrease may be violated by at most `slack` before it counts as a
    failure (the quantities can be separated by less than the discretisation
    noise, sup_norm especially).  Records violating the strict energy bound
    are reported regardless.
    """
    failures = []
    checked_any = False
    for rec in report.records:
        if not rec.energy < report.singular_energy:
            failures.append(
                f"record {rec.sequence_key} has energy {rec.energy!r} not strictly "
                f"below the singular level {report.singular_energy!r}: violates the "
                f"connecting-profile energy bound")
    for cls in ("even", "odd"):
        recs = [r for r in report.records if r.sequence_key[0] == cls]
        if len(recs) < 2:
            continue
        checked_any = True
        for a, b in zip(recs, recs[1:]):
            for name, va, vb in (
                    ("sup_norm", a.sup_norm, b.sup_norm),
                    ("H_norm", a.H_norm, b.H_norm),
                    ("energy gap", report.singular_energy - a.energy,
                     report.singular_energy - b.energy)):
                if vb >= va + slack:
                    failures.append(
                        f"{name} fails to decrease from {a.sequence_key} to "
                        f"{b.sequence_key}: {va!r} -> {vb!r}")
    table = report.convergence_table
    if not checked_any and not failures:
        return ConvergenceCheck("insufficient data", (), table, slack)
    status = "pass" if not failures else "fail"
    return ConvergenceCheck(status, tuple(failures), table, slack)


# -- serialisation --------------------------------------------------------------

def record_to_doc(rec: SolutionRecord) -> dict:
    return {
        "class": rec.sequence_key[0],
        "zeros": rec.sequence_key[1],
        "energy": rec.energy,
        "sup_norm": rec.sup_norm,
        "H_norm": rec.H_norm,
        "spectral": report_to_doc(rec.spectral),
        "profile": profile_to_doc(rec.profile),
    }


def record_from_doc(doc: dict) -> SolutionRecord:
    s = doc["spectral"]
    rep = SpectralReport(index=int(s["index"]),
                         nullity_estimate=int(s["nullity_estimate"]),
                         leading_eigenvalues=tuple(s["leading_eigenvalues"]),
                         cutoff=float(s["cutoff"]), n=int(s["n"]),
                         null_band=float(s["null_band"]),
                         band_sensitivity=tuple((float(b), int(c))
                                                for b, c in s["band_sensitivity"]),
                         flags=tuple(s["flags"]))
    return SolutionRecord(profile=profile_from_doc(doc["profile"]),
                          energy=float(doc["energy"]), spectral=rep,
                          sup_norm=float(doc["sup_norm"]),
                          H_norm=float(doc["H_norm"]),
                          sequence_key=(doc["class"], int(doc["zeros"])))


def sweep_report_to_doc(report: SweepReport) -> dict:
    cfg = report.config
    nu_doc = None
    if cfg.nu is not None:
        nu_doc = {"grid": cfg.nu.grid, "values": cfg.nu.values}
    return {
        "version": report.version,
        "m": cfg.m,
        "omega": cfg.omega,
        "nu": nu_doc,
        "max_zeros": cfg.max_zeros,
        "cutoff": cfg.cutoff,
        "grid_size": cfg.grid_size,
        "newton_tol": cfg.newton_tol,
        "null_band": cfg.null_band,
        "hypothesis": report.hypothesis,
        "singular_energy": report.singular_energy,
        "records": [record_to_doc(r) for r in report.records],
        "failures": [[c, z, msg] for c, z, msg in report.failures],
        "convergence": [[c, z, g, s, h] for c, z, g, s, h in report.convergence_table],
    }


def sweep_report_from_doc(doc: dict) -> SweepReport:
    nu = None
    if doc.get("nu") is not None:
        nu = NuPerturbation(np.asarray(doc["nu"]["grid"], dtype=float),
                            np.asarray(doc["nu"]["values"], dtype=float))
    cfg = SweepConfig(m=int(doc["m"]), omega=float(doc["omega"]),
                      max_zeros=int(doc["max_zeros"]), nu=nu,
                      cutoff=float(doc["cutoff"]), grid_size=int(doc["grid_size"]),
                      newton_tol=float(doc["newton_tol"]),
                      null_band=float(doc["null_band"]))
    return SweepReport(config=cfg,
                       singular_energy=float(doc["singular_energy"]),
                       hypothesis=bool(doc["hypothesis"]),
                       records=tuple(record_from_doc(d) for d in doc["records"]),
                       failures=tuple((c, int(z), m) for c, z, m in doc["failures"]),
                       convergence_table=tuple(
                           (c, int(z), float(g), float(s), float(h))
                           for c, z, g, s, h in doc["convergence"]),
                       version=str(doc["version"]))


CSV_COLUMNS = ("class", "zeros", "energy", "energy_gap", "index", "nullity",
               "sup_norm", "H_norm", "residual", "X", "N")


def write_sweep_csv(report: SweepReport, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.records:
            cls, zeros = r.sequence_key
            w.writerow([cls, zeros,
                        format_float(r.energy),
                        format_float(report.singular_energy - r.energy),
                        r.spectral.index, r.spectral.nullity_estimate,
                        format_float(r.sup_norm), format_float(r.H_norm),
                        format_float(r.profile.residual_norm),
                        format_float(r.profile.cutoff), r.profile.n])


def write_report(report: SweepReport, out_dir) -> list:
    """Collector stage: CSV, report JSON, per-solution JSON, optional SVG."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    p = out / "sweep.csv"
    write_sweep_csv(report, p)
    written.append(p)

    p = out / "sweep.json"
    with open(p, "w", encoding="ascii", newline="\n") as f:
        f.write(dumps(sweep_report_to_doc(report)))
        f.write("\n")
    written.append(p)

    for r in report.records:
        cls, zeros = r.sequence_key
        p = out / f"solution_{cls}_{zeros}.json"
        with open(p, "w", encoding="ascii", newline="\n") as f:
            f.write(dumps(profile_to_doc(r.profile)))
            f.write("\n")
        written.append(p)

    if report.config.plots:
        written.extend(emit_plots(report, out))
    return written


# -- plots -----------------------------------------------------------------------

def emit_plots(report: SweepReport, out_dir, style: dict | None = None) -> list:
    """One SVG per solution (h with its Schrodinger potential overlaid) and a
    summary SVG of energy against zero count with the singular level dashed."""
    if not report.records:
        warnings.warn("empty report: no plots emitted")
        return []
    style = style or {}
    width = float(style.get("width", 720.0))
    height = float(style.get("height", 440.0))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for r in report.records:
        cls, zeros = r.sequence_key
        prof = r.profile
        pot = build_schrodinger(prof).potential
        xs, hs = svg.decimate(prof.grid, prof.h)
        xv, vv = svg.decimate(prof.grid, pot)
        doc = svg.line_chart(
            [svg.Series(tuple(xs), tuple(hs), "#1f6feb", label="h(x)"),
             svg.Series(tuple(xv), tuple(vv), "#d29922", label="V(x)",
                        dashed=True, axis="right")],
            hlines=((HALF_PI, "#8c959f", True, "left"),
                    (-HALF_PI, "#8c959f", True, "left")),
            title=f"profile {cls} class, {zeros} zeros "
                  f"(m={report.config.m}, omega={report.config.omega:g})",
            xlabel="x", ylabel="h", ylabel_right="V",
            width=width, height=height)
        p = out / f"profile_{cls}_{zeros}.svg"
        p.write_text(doc, encoding="ascii", newline="\n")
        written.append(p)

    ks = [r.sequence_key[1] for r in sorted(report.records, key=lambda r: r.sequence_key[1])]
    es = [r.energy for r in sorted(report.records, key=lambda r: r.sequence_key[1])]
    doc = svg.line_chart(
        [svg.Series(tuple(float(k) for k in ks), tuple(es), "#1f6feb",
                    label="E(h_k)", markers=True)],
        hlines=((report.singular_energy, "#cf222e", True, "left"),),
        title=f"energies toward the singular level "
              f"(m={report.config.m}, omega={report.config.omega:g})",
        xlabel="total zeros", ylabel="energy", width=width, height=height)
    p = out / "summary.svg"
    p.write_text(doc, encoding="ascii", newline="\n")
    written.append(p)
    return written
