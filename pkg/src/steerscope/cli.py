"""Command-line front end: ``steerscope analyze | thresholds | scan``."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import __version__
from .activation import (
    AnalysisOptions,
    analyze,
    dimension_note,
    minimal_k,
    povm_note,
    variant_note,
    window_bounds,
)
from .criteria import OptimizerOptions
from .linalg import ValidationError
from .report import ReportFile, fmt_float, load_state, parse_preset, report_to_dict, serialize
from .thresholds import (
    MeasurementClass,
    PrecisionError,
    Variant,
    f_povm,
    f_proj,
    kcopy_threshold,
    single_copy_bound,
)

EXIT_VALIDATION = 2
EXIT_PRECISION = 3
MAX_RATIONAL_CHARS = 64

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_range(text: str) -> list[int]:
    """'2..8', '2-8' or '5' -> inclusive integer list."""
    for sep in ("..", "-", ":"):
        if sep in text:
            a, b = text.split(sep, 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise click.BadParameter(f"empty range {text!r}")
            return list(range(lo, hi + 1))
    return [int(text)]


def _render_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [["" if v is None else str(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    click.echo(text, nl=False)


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(__version__, prog_name="steerscope")
def cli():
    """Reduction-criterion and k-copy steering analysis of bipartite states."""


variant_option = click.option(
    "--variant", type=click.Choice(["proof", "printed-eq10"]), default="proof", show_default=True,
    help="Right-hand side of the k-copy criterion.")
eq16_option = click.option(
    "--printed-eq16", is_flag=True, default=False,
    help="Use the printed closed-form POVM bound (exceeds 1 at d=2) instead of the default.")
format_option = click.option(
    "--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table", show_default=True)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write output here.")


###########
# analyze #
###########

def _load_input(source: str):
    if Path(source).is_file():
        return load_state(source)
    return parse_preset(source)


def _report_table(rf: ReportFile) -> str:
    r = rf.report
    rows = [
        ["source", rf.source],
        ["dims", f"{r.dim_a}x{r.dim_b}" + (" (embedded)" if r.embedded else "")],
        ["d", r.d],
        ["reduction min eigenvalue", fmt_float(r.reduction_min_eig)],
        ["reduction violated", r.reduction_violated],
        ["filtered fidelity", fmt_float(r.filtered_fidelity)],
        ["entanglement fraction F", fmt_float(r.F)],
        ["k_min (proof form)", r.k_min_proj],
        ["k_min (printed eq10)", r.k_min_eq10],
        ["window (projective)", None if r.window is None else f"({r.window[0]:.10g}, {r.window[1]:.10g}]"],
        ["single-copy LHS projective", r.single_copy_projective_lhs],
        ["single-copy LHS POVM", r.single_copy_povm_lhs],
        ["bootstrap (k_c, dim)", r.bootstrap],
        ["hashing S(B)-S(AB) [bits]", fmt_float(r.hashing_margin)],
        ["hashing distillable", r.hashing_distillable],
        ["flags", json.dumps(rf.flags, sort_keys=True)],
    ]
    text = _render_table(["field", "value"], rows)
    for e in r.errors:
        text += f"error: {e}\n"
    for n in r.notes:
        text += f"note: {n}\n"
    return text


def _report_csv(rf: ReportFile) -> str:
    d = report_to_dict(rf.report)
    rows = [[k, json.dumps(v) if isinstance(v, (list, dict)) else v] for k, v in sorted(d.items())]
    rows.append(["flags", json.dumps(rf.flags, sort_keys=True)])
    rows.append(["source", rf.source])
    rows.append(["version", rf.version])
    return _render_csv(["field", "value"], rows)


@cli.command("analyze")
@click.argument("source")
@variant_option
@eq16_option
@click.option("--kmax", type=int, default=64, show_default=True, help="Copy-number search cap.")
@click.option("--seed", type=int, default=0, show_default=True, help="Optimizer restart seed.")
@click.option("--restarts", type=int, default=32, show_default=True)
@format_option
@out_option
def analyze_cmd(source, variant, printed_eq16, kmax, seed, restarts, fmt, out):
    """Analyze a state given as a JSON state file or a preset.

    Presets: phi+:d=N | iso:d=N,F=X | schmidt:c1,c2,... | random:dA,dB,rank,seed
    """
    try:
        rho = _load_input(source)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, f"invalid input ({exc.invariant}): {exc}")
    opts = AnalysisOptions(
        variant=Variant(variant),
        printed_eq16=printed_eq16,
        k_max=kmax,
        optimizer=OptimizerOptions(restarts=restarts, seed=seed),
    )
    try:
        report = analyze(rho, opts)
    except PrecisionError as exc:
        _fail(EXIT_PRECISION, str(exc))
    if any("copy-count search" in e for e in report.errors):
        _fail(EXIT_PRECISION, "; ".join(report.errors))
    flags = {"variant": variant, "printed_eq16": printed_eq16, "kmax": kmax, "seed": seed, "restarts": restarts}
    rf = ReportFile(report=report, source=source, flags=flags)
    if out:
        Path(out).write_text(serialize(rf))
    if fmt == "json":
        click.echo(serialize(rf), nl=False)
    elif fmt == "csv":
        click.echo(_report_csv(rf), nl=False)
    else:
        click.echo(_report_table(rf), nl=False)


##############
# thresholds #
##############

THRESHOLD_HEADER = [
    "d", "k", "D", "f_proj", "f_proj_exact", "f_povm", "f_povm_exact", "f_povm_form",
    "kcopy", "kcopy_exact", "kcopy_variant", "representation", "error_bound", "warning",
]


def threshold_rows(d_max: int, k_max: int, variant: Variant, printed_eq16: bool) -> list[list]:
    rows = []
    warning = "printed POVM form exceeds 1 at d=2; not a valid fraction bound" if printed_eq16 else ""
    for d in range(2, d_max + 1):
        fp, fv = f_proj(d), f_povm(d, printed_eq16)
        for k in range(1, k_max + 1):
            t = kcopy_threshold(d, k, variant)
            rows.append([
                d, k, d**k,
                fp.decimal(), fp.rational(MAX_RATIONAL_CHARS) or "",
                fv.decimal(), fv.rational(MAX_RATIONAL_CHARS) or "",
                "printed-eq16" if printed_eq16 else "default",
                t.decimal(), t.rational(MAX_RATIONAL_CHARS) or "",
                variant.value, t.representation,
                "0" if t.is_exact else fmt_float(t.error_bound),
                warning,
            ])
    return rows


@cli.command("thresholds")
@click.option("--dmax", "d_max", type=click.IntRange(min=2), default=4, show_default=True)
@click.option("--kmax", "k_max", type=click.IntRange(min=1), default=4, show_default=True)
@variant_option
@eq16_option
@format_option
@out_option
def thresholds_cmd(d_max, k_max, variant, printed_eq16, fmt, out):
    """Tabulate single-copy bounds and k-copy thresholds for d <= DMAX, k <= KMAX."""
    variant = Variant(variant)
    try:
        rows = threshold_rows(d_max, k_max, variant, printed_eq16)
    except PrecisionError as exc:
        _fail(EXIT_PRECISION, str(exc))
    notes = [variant_note(variant), povm_note(printed_eq16)]
    if fmt == "json":
        payload = {"columns": THRESHOLD_HEADER, "rows": [dict(zip(THRESHOLD_HEADER, r)) for r in rows], "notes": notes}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = _render_csv(THRESHOLD_HEADER, rows)
    else:
        short = [h for h in THRESHOLD_HEADER if not h.endswith("_exact") and h != "warning"]
        idx = [THRESHOLD_HEADER.index(h) for h in short]
        text = _render_table(short, [[r[i] for i in idx] for r in rows])
        text += "".join(f"note: {n}\n" for n in notes)
    _emit(text, out)


########
# scan #
########

SCAN_HEADER = ["kind", "d", "k", "mclass", "f_low", "f_high", "nonempty", "text"]


def scan_rows(ds: list[int], ks: list[int], mclass: MeasurementClass, printed_eq16: bool) -> list[list]:
    rows = []
    first_d: dict[int, int] = {}
    first_k: dict[int, int] = {}
    for d in ds:
        for k in ks:
            w = window_bounds(d, k, mclass, printed_eq16)
            rows.append(["window", d, k, mclass.value, w.f_low.decimal(), w.f_high.decimal(), w.nonempty, ""])
            if w.nonempty:
                first_d.setdefault(k, d)
                first_k.setdefault(d, k)
    for k in ks:
        if len(ds) > 1:
            rows.append(["min_d", first_d.get(k), k, mclass.value, None, None, k in first_d,
                         f"first d in {ds[0]}..{ds[-1]} with a nonempty window at k={k}"])
    for d in ds:
        if len(ks) > 1:
            bound = single_copy_bound(d, mclass, printed_eq16).value
            mk = minimal_k(d, bound, Variant.PROOF, k_max=max(ks))
            rows.append(["min_k", d, first_k.get(d), mclass.value, None, None, d in first_k,
                         f"first k in {ks[0]}..{ks[-1]} with a nonempty window; minimal_k at F = bound is {mk}"])
    if 2 in ks and len(ds) > 1:
        found = first_d.get(2)
        rows.append(["note", found, 2, mclass.value, None, None, None,
                     dimension_note(mclass, found, ds[-1])])
    rows.append(["note", None, None, mclass.value, None, None, None, variant_note(Variant.PROOF)])
    if mclass is MeasurementClass.POVM:
        rows.append(["note", None, None, mclass.value, None, None, None, povm_note(printed_eq16)])
    return rows


@cli.command("scan")
@click.option("--d-range", "d_range", default="2..8", show_default=True, help="Dimensions, e.g. 2..8 or 2.")
@click.option("--k-range", "k_range", default="2", show_default=True, help="Copy numbers, e.g. 1..30.")
@click.option("--mclass", type=click.Choice(["projective", "povm"]), default="projective", show_default=True)
@eq16_option
@format_option
@out_option
def scan_cmd(d_range, k_range, mclass, printed_eq16, fmt, out):
    """Grid of super-activation windows (F_low, F_high] with minimal-d / minimal-k summaries."""
    ds, ks = _parse_range(d_range), _parse_range(k_range)
    if ds[0] < 2 or ks[0] < 1:
        _fail(EXIT_VALIDATION, "need d >= 2 and k >= 1")
    mclass = MeasurementClass(mclass)
    try:
        rows = scan_rows(ds, ks, mclass, printed_eq16)
    except PrecisionError as exc:
        _fail(EXIT_PRECISION, str(exc))
    if fmt == "json":
        text = json.dumps([dict(zip(SCAN_HEADER, r)) for r in rows], indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = _render_csv(SCAN_HEADER, rows)
    else:
        text = _render_table(SCAN_HEADER[:-1], [r[:-1] for r in rows if r[0] == "window"])
        text += "".join(f"{r[0]}: {r[7]} -> {r[1] if r[0] == 'min_d' else r[2]}\n" for r in rows if r[0] in ("min_d", "min_k"))
        text += "".join(f"note: {r[7]}\n" for r in rows if r[0] == "note")
    _emit(text, out)


def main():  # pragma: no cover
    cli()


if __name__ == "__main__":  # pragma: no cover
    main()
