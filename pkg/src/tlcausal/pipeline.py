"""Batch orchestration: enumerate, filter, score, control, classify, report.

The five stages run serially and deterministically; re-running an identical
configuration over identical inputs produces byte-identical output files
(wall time lives only in the in-memory report).  Each stage's errors are
re-raised with the stage name prefixed so the command line can report where
a run died.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from . import fdr as fdrmod
from .causal import enumerate_pairwise, score_hypotheses
from .errors import DataError, TlcausalError, UsageError
from .pctl import print_formula
from .traces import TraceSet, load_events, load_traces

__all__ = ["PipelineConfig", "HypothesisRow", "Report", "run_pipeline",
           "load_config_file", "write_report", "read_hypotheses_tsv",
           "render_outputs"]

HYPOTHESES_FILE = "hypotheses.tsv"
EDGES_FILE = "edges.tsv"
PLOT_FILE = "plot.tsv"
SUMMARY_FILE = "summary.txt"

TSV_COLUMNS = ("cause", "effect", "tmin", "tmax", "p_cond", "p_marginal",
               "prima_facie", "eps_avg", "z", "fdr", "label")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one inference run needs.

    ``paths`` may list several replicate files of the same format over the
    same variables.  ``divisor`` selects the impact-average denominator
    ("defined" or "strict"); ``p0`` switches the null-proportion estimate
    into the fdr ratio.
    """

    paths: Tuple[str, ...]
    format: str = "event-csv"
    horizon: Optional[int] = None
    tmin: int = 1
    tmax: int = 1
    negations: bool = False
    divisor: str = "defined"
    min_support: int = 1
    bins: int = fdrmod.DEFAULT_BINS
    degree: int = fdrmod.DEFAULT_DEGREE
    threshold: float = fdrmod.DEFAULT_THRESHOLD
    p0: bool = False
    seed: int = 0
    outdir: Optional[str] = None

    def check(self):
        if not self.paths:
            raise UsageError("no input path given")
        if len(set(self.paths)) != len(self.paths):
            raise UsageError("input paths must be distinct")
        if self.tmin < 1 or self.tmax < self.tmin:
            raise UsageError("window requires 1 <= tmin <= tmax")
        if self.divisor not in ("defined", "strict"):
            raise UsageError("divisor must be 'defined' or 'strict'")
        if not 0.0 < self.threshold <= 1.0:
            raise UsageError("threshold must lie in (0, 1]")


@dataclass
class HypothesisRow:
    cause: str
    effect: str
    tmin: int
    tmax: int
    p_cond: Optional[float]
    p_marginal: Optional[float]
    prima_facie: bool
    eps_avg: Optional[float]
    z: Optional[float] = None
    fdr: Optional[float] = None
    label: str = "insignificant"


@dataclass
class Report:
    """Run outcome: the hypothesis table plus stage bookkeeping."""

    rows: List[HypothesisRow]
    significant: List[Tuple[str, str]]
    null_model: Optional[fdrmod.NullModel]
    plot: List[tuple]
    counts: dict
    settings: dict
    wall_time: float = 0.0


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TlcausalError as exc:
        exc.args = (f"[stage {name}] {exc.args[0] if exc.args else ''}",)
        raise


def _load_all(config: PipelineConfig) -> TraceSet:
    if config.format == "event-csv":
        # replicates share one variable universe, in first-appearance order
        event_lists = [load_events(path, config.horizon)
                       for path in config.paths]
        variables: List[str] = []
        for events in event_lists:
            for v in events.variables():
                if v not in variables:
                    variables.append(v)
        return TraceSet(tuple(ev.to_trace(tuple(variables))
                              for ev in event_lists))
    traces = []
    for path in config.paths:
        ts = load_traces(path, config.format, horizon=config.horizon)
        traces.extend(ts.traces)
    return TraceSet(tuple(traces))


def run_pipeline(config: PipelineConfig) -> Report:
    """Execute the full inference pipeline; write outputs when ``outdir``
    is set.  A run with zero prima facie causes is a valid empty report."""
    config.check()
    started = time.perf_counter()

    data = _stage("load", _load_all, config)
    hypotheses = _stage("enumerate", enumerate_pairwise,
                        data.variables, config.tmin, config.tmax,
                        config.negations)
    scores = _stage("score", score_hypotheses, data, hypotheses,
                    divisor=config.divisor, min_support=config.min_support)

    rows = []
    for result in scores.prima_facie:
        h = result.hypothesis
        rows.append(HypothesisRow(
            cause=print_formula(h.cause), effect=print_formula(h.effect),
            tmin=h.tmin, tmax=h.tmax,
            p_cond=result.p_cond.probability if result.p_cond.denominator else None,
            p_marginal=(result.p_marginal.probability
                        if result.p_marginal.denominator else None),
            prima_facie=result.passed,
            eps_avg=None))
    index = {(r.cause, r.effect): r for r in rows}
    scored = []
    for record in scores.records:
        key = (print_formula(record.hypothesis.cause),
               print_formula(record.hypothesis.effect))
        index[key].eps_avg = record.eps_avg
        if record.eps_avg is not None:
            scored.append(index[key])

    null_model = None
    plot = []
    significant: List[Tuple[str, str]] = []
    if scored:
        zs = _stage("fdr", fdrmod.z_scores, [r.eps_avg for r in scored])
        density = _stage("fdr", fdrmod.fit_mixture, zs,
                         bins=config.bins, degree=config.degree)
        null_model = _stage("fdr", fdrmod.fit_null, density,
                            estimate_p0=config.p0)
        fdrs = _stage("fdr", fdrmod.local_fdr, density, null_model,
                      np.asarray(zs.values))
        chosen = _stage("classify", fdrmod.classify, list(fdrs),
                        config.threshold)
        for i, row in enumerate(scored):
            row.z = float(zs.values[i])
            row.fdr = float(fdrs[i])
            row.label = "significant" if i in chosen else "insignificant"
        significant = [(r.cause, r.effect) for r in rows
                       if r.label == "significant"]
        plot = fdrmod.plot_rows(density, null_model)

    counts = {
        "enumerated": len(rows),
        "prima_facie": sum(1 for r in rows if r.prima_facie),
        "scored": len(scored),
        "significant": len(significant),
        "unscored_undefined": sum(
            1 for r in rows if r.prima_facie and r.eps_avg is None),
    }
    settings = {
        "inputs": ",".join(config.paths),
        "format": config.format,
        "window": f"[{config.tmin},{config.tmax}]",
        "negations": "on" if config.negations else "off",
        "divisor": config.divisor,
        "min_support": str(config.min_support),
        "bins": str(config.bins),
        "degree": str(config.degree),
        "threshold": _fmt_float(config.threshold),
        "p0": "on" if config.p0 else "off",
        "traces": str(len(data)),
        "variables": str(len(data.variables)),
        "ticks": str(data.total_ticks),
        "aggregation": "frequency-weighted over antecedent ticks",
    }
    report = Report(rows, significant, null_model, plot, counts, settings,
                    wall_time=time.perf_counter() - started)
    if config.outdir is not None:
        write_report(report, config.outdir)
    return report


# ---------------------------------------------------------------------------
# Output rendering

def _fmt_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".10g")


def _row_cells(row: HypothesisRow):
    return (row.cause, row.effect, str(row.tmin), str(row.tmax),
            _fmt_float(row.p_cond), _fmt_float(row.p_marginal),
            "1" if row.prima_facie else "0",
            _fmt_float(row.eps_avg), _fmt_float(row.z), _fmt_float(row.fdr),
            row.label)


def write_report(report: Report, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    render_outputs(report, out)


def render_outputs(report: Report, out: Path) -> None:
    with open(out / HYPOTHESES_FILE, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(TSV_COLUMNS) + "\n")
        for row in report.rows:
            fh.write("\t".join(_row_cells(row)) + "\n")
    with open(out / EDGES_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for cause, effect in report.significant:
            fh.write(f"{cause}\t{effect}\n")
    with open(out / PLOT_FILE, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("center\tcount\tf\tf0\n")
        for center, count, fv, f0 in report.plot:
            fh.write(f"{_fmt_float(center)}\t{count}\t"
                     f"{_fmt_float(fv)}\t{_fmt_float(f0)}\n")
    with open(out / SUMMARY_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in report.settings.items():
            fh.write(f"{key}: {value}\n")
        for key in ("enumerated", "prima_facie", "scored",
                    "unscored_undefined", "significant"):
            fh.write(f"{key}: {report.counts[key]}\n")
        if report.null_model is not None:
            nm = report.null_model
            fh.write(f"null: delta0={_fmt_float(nm.delta0)} "
                     f"sigma0={_fmt_float(nm.sigma0)}"
                     + (f" p0={_fmt_float(nm.p0)}" if nm.p0 is not None else "")
                     + "\n")


def read_hypotheses_tsv(path) -> List[HypothesisRow]:
    """Parse a previously written hypothesis table."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines or tuple(lines[0].split("\t")) != TSV_COLUMNS:
        raise DataError(f"{path}: not a hypothesis table")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(TSV_COLUMNS):
            raise DataError(f"{path}:{lineno}: expected "
                            f"{len(TSV_COLUMNS)} columns")
        def opt(s):
            return None if s == "" else float(s)
        rows.append(HypothesisRow(
            cause=cells[0], effect=cells[1],
            tmin=int(cells[2]), tmax=int(cells[3]),
            p_cond=opt(cells[4]), p_marginal=opt(cells[5]),
            prima_facie=cells[6] == "1",
            eps_avg=opt(cells[7]), z=opt(cells[8]), fdr=opt(cells[9]),
            label=cells[10]))
    return rows


def rerun_fdr(rows: List[HypothesisRow], bins: int, degree: int,
              threshold: float, p0: bool) -> Report:
    """Stages 4-5 over a saved table: re-standardize the stored impact
    averages, refit, and relabel."""
    scored = [r for r in rows if r.eps_avg is not None]
    for row in rows:
        row.z = None
        row.fdr = None
        row.label = "insignificant"
    null_model = None
    plot = []
    significant: List[Tuple[str, str]] = []
    if scored:
        zs = _stage("fdr", fdrmod.z_scores, [r.eps_avg for r in scored])
        density = _stage("fdr", fdrmod.fit_mixture, zs, bins=bins,
                         degree=degree)
        null_model = _stage("fdr", fdrmod.fit_null, density, estimate_p0=p0)
        fdrs = _stage("fdr", fdrmod.local_fdr, density, null_model,
                      np.asarray(zs.values))
        chosen = _stage("classify", fdrmod.classify, list(fdrs), threshold)
        for i, row in enumerate(scored):
            row.z = float(zs.values[i])
            row.fdr = float(fdrs[i])
            row.label = "significant" if i in chosen else "insignificant"
        significant = [(r.cause, r.effect) for r in rows
                       if r.label == "significant"]
        plot = fdrmod.plot_rows(density, null_model)
    counts = {
        "enumerated": len(rows),
        "prima_facie": sum(1 for r in rows if r.prima_facie),
        "scored": len(scored),
        "significant": len(significant),
        "unscored_undefined": sum(
            1 for r in rows if r.prima_facie and r.eps_avg is None),
    }
    settings = {
        "inputs": "(saved hypothesis table)",
        "bins": str(bins),
        "degree": str(degree),
        "threshold": _fmt_float(threshold),
        "p0": "on" if p0 else "off",
    }
    return Report(rows, significant, null_model, plot, counts, settings)


# ---------------------------------------------------------------------------
# Flat key=value configuration files with bracketed section headers

CONFIG_KEYS = {
    "path", "format", "horizon",
    "tmin", "tmax", "negations",
    "divisor", "min_support",
    "bins", "degree", "threshold", "p0",
    "outdir", "seed",
    "preset", "size", "trigger_prob", "spontaneous_rate", "refractory",
    "delay_min", "delay_max", "target_firings",
}


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; bracketed section headers group keys for
    readability but key names are global and must be unique."""
    out: dict = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            if key in out:
                raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out
