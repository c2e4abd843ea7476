"""Experiment harness: synthetic SNR sweeps, the modulated-signal experiment,
file ingestion, mode-to-truth scoring and report emission.

Sweep cells run independently; a failed decomposition is recorded in its
cell, never aborts the sweep.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .modes import DecompositionConfig, ModeSet, rmd_decompose
from .signals import (
    SineComponent,
    TimeSeries,
    add_noise_at_snr,
    dominant_frequency,
    gen_am_mixture,
    gen_sinusoid_mixture,
    periodogram,
    read_timeseries_csv,
    score_mode,
)

SCHEMA_VERSION = 1

GENERATORS = ("sine-mixture", "am-mixture", "file")

# report annotation bands for physiological file runs, in Hz
RESPIRATION_BAND = (0.1, 0.5)
HEARTBEAT_BAND = (0.8, 2.0)


@dataclass(frozen=True)
class RunConfig:
    """One decomposition configuration of the sweep grid."""

    alpha: float
    diff_order: int = 1
    theta: float = 0.85
    n_modes: int = 3
    measure: str = "spectral"
    shrinkage: bool = False


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment sweep.

    Synthetic generators draw a fresh noise realization per (snr, seed) and
    decompose it once per grid configuration.  ``file`` runs skip noise
    injection and scoring and simply decompose the ingested signal.
    """

    generator: str
    snr_db: tuple[float, ...] = ()
    seeds: tuple[int, ...] = ()
    configs: tuple[RunConfig, ...] = ()
    sample_rate_hz: float = 200.0
    duration_s: float = 10.0
    embedding_dim: int | None = 200
    # sine-mixture parameters
    frequencies_hz: tuple[float, ...] = (2.0, 5.0, 19.0)
    amplitudes: tuple[float, ...] = (3.0, 0.5, 4.0)
    phases: tuple[float, ...] | None = None
    # am-mixture parameters
    f1_hz: float = 3.0
    f2_hz: float = 8.0
    f3_hz: float = 31.0
    f_mod_hz: float = 0.5
    # file parameters
    input_path: str | None = None
    # scoring tolerance for the per-component "within tolerance" flag
    peak_tol_hz: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "configs", tuple(self.configs))
        object.__setattr__(self, "frequencies_hz", tuple(self.frequencies_hz))
        object.__setattr__(self, "amplitudes", tuple(self.amplitudes))
        if self.phases is not None:
            object.__setattr__(self, "phases", tuple(self.phases))
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if not self.configs:
            raise ValueError("at least one decomposition configuration is required")
        if self.generator != "file":
            if not self.snr_db or not self.seeds:
                raise ValueError("synthetic runs need non-empty snr_db and seeds lists")
        else:
            if not self.input_path:
                raise ValueError("file runs need input_path")
        if self.generator == "sine-mixture" and (
            len(self.frequencies_hz) != len(self.amplitudes)
        ):
            raise ValueError("frequencies_hz and amplitudes must have equal length")

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentSpec":
        """Build a spec from parsed JSON.

        Configurations may be given explicitly under ``configs`` or as a
        cross-product grid of ``alphas`` x ``diff_orders`` with shared
        ``theta`` / ``n_modes`` / ``measure``.
        """
        doc = dict(doc)
        if "configs" in doc:
            configs = tuple(RunConfig(**c) for c in doc.pop("configs"))
            for key in ("alphas", "diff_orders", "theta", "n_modes", "measure"):
                doc.pop(key, None)
        else:
            alphas = doc.pop("alphas", None)
            if alphas is None:
                raise ValueError("spec needs either 'configs' or an 'alphas' grid")
            orders = doc.pop("diff_orders", [1])
            theta = doc.pop("theta", 0.85)
            n_modes = doc.pop("n_modes", 3)
            measure = doc.pop("measure", "spectral")
            shrinkage = doc.pop("shrinkage", False)
            configs = tuple(
                RunConfig(alpha=float(a), diff_order=int(o), theta=float(theta),
                          n_modes=int(n_modes), measure=measure, shrinkage=bool(shrinkage))
                for a in alphas
                for o in orders
            )
        return ExperimentSpec(configs=configs, **doc)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["configs"] = [asdict(c) for c in self.configs]
        return doc


@dataclass(frozen=True)
class ComponentScore:
    """Scores of one ground-truth component within one cell."""

    true_freq_hz: float
    matched: bool
    mode_index: int | None
    peak_freq_hz: float | None
    correlation: float | None
    rmse: float | None
    within_peak_tol: bool | None
    sidebands_present: bool | None = None


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (snr, seed, configuration) sweep cell."""

    snr_db: float | None
    seed: int | None
    alpha: float
    diff_order: int
    theta: float
    n_modes: int
    measure: str
    success: bool
    error: str | None
    wall_ms: float
    mode_peaks_hz: tuple[float | None, ...] = ()
    scores: tuple[ComponentScore, ...] = ()
    band_labels: tuple[str, ...] = ()

    def same_but_timing(self, other: "CellResult") -> bool:
        """Equality ignoring the wall-clock field."""
        a = asdict(self)
        b = asdict(other)
        a.pop("wall_ms")
        b.pop("wall_ms")
        return a == b


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    cells: tuple[CellResult, ...]
    schema_version: int = SCHEMA_VERSION

    def aggregates(self) -> list[dict]:
        """Per (snr, configuration, true component) summary, recomputed
        from the cells on every call."""
        groups: dict[tuple, list[ComponentScore]] = {}
        for cell in self.cells:
            if not cell.success:
                continue
            for score in cell.scores:
                key = (cell.snr_db, cell.alpha, cell.diff_order, cell.theta,
                       cell.measure, score.true_freq_hz)
                groups.setdefault(key, []).append(score)
        out = []
        for key in sorted(groups, key=lambda k: tuple(str(p) for p in k)):
            snr, alpha, order, theta, measure, freq = key
            scores = groups[key]
            matched = [s for s in scores if s.matched]
            corrs = [s.correlation for s in matched if s.correlation is not None]
            errs = [
                abs(s.peak_freq_hz - freq)
                for s in matched
                if s.peak_freq_hz is not None
            ]
            out.append({
                "snr_db": snr,
                "alpha": alpha,
                "diff_order": order,
                "theta": theta,
                "measure": measure,
                "true_freq_hz": freq,
                "n_cells": len(scores),
                "n_matched": len(matched),
                "mean_correlation": float(np.mean(corrs)) if corrs else None,
                "min_correlation": float(np.min(corrs)) if corrs else None,
                "mean_abs_peak_err_hz": float(np.mean(errs)) if errs else None,
                "max_abs_peak_err_hz": float(np.max(errs)) if errs else None,
            })
        return out

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "spec": self.spec.to_dict(),
            "cells": [asdict(c) for c in self.cells],
            "aggregates": self.aggregates(),
        }
        return json.dumps(doc, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "ExperimentReport":
        doc = json.loads(text)
        spec = ExperimentSpec.from_dict(doc["spec"])
        cells = []
        for c in doc["cells"]:
            c = dict(c)
            c["scores"] = tuple(ComponentScore(**s) for s in c["scores"])
            c["mode_peaks_hz"] = tuple(c["mode_peaks_hz"])
            c["band_labels"] = tuple(c["band_labels"])
            cells.append(CellResult(**c))
        return ExperimentReport(
            spec=spec, cells=tuple(cells), schema_version=doc["schema_version"]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return (
            self.schema_version == other.schema_version
            and self.spec == other.spec
            and self.cells == other.cells
        )


def load_signal_csv(path: str | Path, sample_rate_hz: float) -> TimeSeries:
    """Ingest a signal CSV (see `rmd.signals` for the format contract).

    Parse failures carry the offending line number; non-finite values and
    empty files are rejected.
    """
    return read_timeseries_csv(path, sample_rate_hz)


def _decomposition_config(spec: ExperimentSpec, rc: RunConfig) -> DecompositionConfig:
    return DecompositionConfig(
        n_modes=rc.n_modes,
        merge_threshold=rc.theta,
        alpha=rc.alpha,
        diff_order=rc.diff_order,
        similarity=rc.measure,
        K_override=spec.embedding_dim,
        shrinkage=rc.shrinkage,
    )


def match_modes_to_truths(
    ms: ModeSet, truths: list[TimeSeries]
) -> dict[int, int]:
    """Injective greedy matching: truth -> mode index.

    Truths are visited in descending RMS order; each claims the unclaimed
    mode whose spectral peak is nearest its own.  Peakless modes never match.
    """
    mode_peaks = [e.peak_frequency_hz for e in ms.report]
    truth_peaks = [dominant_frequency(periodogram(t)) for t in truths]
    order = np.argsort(
        [-float(np.sqrt(np.mean(t.samples**2))) for t in truths], kind="stable"
    )
    available = {i for i, p in enumerate(mode_peaks) if p is not None}
    assignment: dict[int, int] = {}
    for ti in order:
        if not available or truth_peaks[ti] is None:
            continue
        best = min(available, key=lambda mi: abs(mode_peaks[mi] - truth_peaks[ti]))
        assignment[int(ti)] = best
        available.discard(best)
    return assignment


def _sideband_presence(mode: TimeSeries, f_center: float, f_mod: float) -> bool:
    """True when both modulation sidebands clear the mode's spectral floor."""
    spec = periodogram(mode)
    floor = float(np.median(spec.power))
    ok = True
    for f in (f_center - f_mod, f_center + f_mod):
        k = int(np.argmin(np.abs(spec.frequencies - f)))
        ok = ok and bool(spec.power[k] > floor)
    return ok


def _score_cell(
    spec: ExperimentSpec,
    ms: ModeSet,
    truths: list[TimeSeries],
    am_truth_index: int | None = None,
) -> tuple[tuple[float | None, ...], tuple[ComponentScore, ...]]:
    assignment = match_modes_to_truths(ms, truths)
    truth_freqs = [dominant_frequency(periodogram(t)) for t in truths]
    scores = []
    for ti, truth in enumerate(truths):
        freq = truth_freqs[ti] if truth_freqs[ti] is not None else 0.0
        mi = assignment.get(ti)
        if mi is None:
            scores.append(ComponentScore(
                true_freq_hz=freq, matched=False, mode_index=None,
                peak_freq_hz=None, correlation=None, rmse=None,
                within_peak_tol=None,
            ))
            continue
        metrics = score_mode(ms.modes[mi], truth)
        peak = metrics.peak_frequency
        sidebands = None
        if am_truth_index is not None and ti == am_truth_index:
            sidebands = _sideband_presence(ms.modes[mi], spec.f1_hz, spec.f_mod_hz)
        scores.append(ComponentScore(
            true_freq_hz=freq,
            matched=True,
            mode_index=mi,
            peak_freq_hz=peak,
            correlation=metrics.correlation,
            rmse=metrics.rmse,
            within_peak_tol=(abs(peak - freq) <= spec.peak_tol_hz
                             if peak is not None else False),
            sidebands_present=sidebands,
        ))
    mode_peaks = tuple(e.peak_frequency_hz for e in ms.report)
    return mode_peaks, tuple(scores)


def _run_synthetic(
    spec: ExperimentSpec,
    clean: TimeSeries,
    truths: list[TimeSeries],
    am_truth_index: int | None = None,
) -> ExperimentReport:
    cells = []
    for snr in spec.snr_db:
        for seed in spec.seeds:
            noisy, _ = add_noise_at_snr(clean, snr, seed)
            for rc in spec.configs:
                t0 = time.perf_counter()
                try:
                    ms = rmd_decompose(noisy, _decomposition_config(spec, rc))
                    peaks, scores = _score_cell(spec, ms, truths, am_truth_index)
                    cells.append(CellResult(
                        snr_db=snr, seed=seed, alpha=rc.alpha,
                        diff_order=rc.diff_order, theta=rc.theta,
                        n_modes=rc.n_modes, measure=rc.measure,
                        success=True, error=None,
                        wall_ms=(time.perf_counter() - t0) * 1e3,
                        mode_peaks_hz=peaks, scores=scores,
                    ))
                except Exception as exc:  # cell failures are data
                    cells.append(CellResult(
                        snr_db=snr, seed=seed, alpha=rc.alpha,
                        diff_order=rc.diff_order, theta=rc.theta,
                        n_modes=rc.n_modes, measure=rc.measure,
                        success=False, error=f"{type(exc).__name__}: {exc}",
                        wall_ms=(time.perf_counter() - t0) * 1e3,
                    ))
    return ExperimentReport(spec=spec, cells=tuple(cells))


def run_sine_snr_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """SNR sweep over a mixture of pure sinusoids."""
    if spec.generator != "sine-mixture":
        raise ValueError("spec.generator must be 'sine-mixture'")
    phases = spec.phases or (0.0,) * len(spec.frequencies_hz)
    components = [
        SineComponent(f, a, p)
        for f, a, p in zip(spec.frequencies_hz, spec.amplitudes, phases)
    ]
    clean, truths = gen_sinusoid_mixture(components, spec.sample_rate_hz, spec.duration_s)
    return _run_synthetic(spec, clean, truths)


def run_nonlinear_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Amplitude-modulated mixture sweep; the AM component additionally gets
    a sideband-presence check."""
    if spec.generator != "am-mixture":
        raise ValueError("spec.generator must be 'am-mixture'")
    clean, truths = gen_am_mixture(
        spec.f1_hz, spec.f2_hz, spec.f3_hz, spec.f_mod_hz,
        spec.sample_rate_hz, spec.duration_s,
    )
    return _run_synthetic(spec, clean, truths, am_truth_index=0)


def _band_label(peak: float | None) -> str:
    if peak is None:
        return ""
    if RESPIRATION_BAND[0] <= peak <= RESPIRATION_BAND[1]:
        return "respiration"
    if HEARTBEAT_BAND[0] <= peak <= HEARTBEAT_BAND[1]:
        return "heartbeat"
    return ""


def run_file_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Decompose an ingested signal file; no ground truth, so cells carry
    the per-mode peaks and physiological band annotations only."""
    if spec.generator != "file":
        raise ValueError("spec.generator must be 'file'")
    x = load_signal_csv(spec.input_path, spec.sample_rate_hz)
    cells = []
    for rc in spec.configs:
        t0 = time.perf_counter()
        try:
            ms = rmd_decompose(x, _decomposition_config(spec, rc))
            peaks = tuple(e.peak_frequency_hz for e in ms.report)
            cells.append(CellResult(
                snr_db=None, seed=None, alpha=rc.alpha, diff_order=rc.diff_order,
                theta=rc.theta, n_modes=rc.n_modes, measure=rc.measure,
                success=True, error=None,
                wall_ms=(time.perf_counter() - t0) * 1e3,
                mode_peaks_hz=peaks,
                band_labels=tuple(_band_label(p) for p in peaks),
            ))
        except Exception as exc:
            cells.append(CellResult(
                snr_db=None, seed=None, alpha=rc.alpha, diff_order=rc.diff_order,
                theta=rc.theta, n_modes=rc.n_modes, measure=rc.measure,
                success=False, error=f"{type(exc).__name__}: {exc}",
                wall_ms=(time.perf_counter() - t0) * 1e3,
            ))
    return ExperimentReport(spec=spec, cells=tuple(cells))


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    runner = {
        "sine-mixture": run_sine_snr_experiment,
        "am-mixture": run_nonlinear_experiment,
        "file": run_file_experiment,
    }[spec.generator]
    return runner(spec)


# ---------------------------------------------------------------------------
# artifacts


def _csv_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


SUMMARY_COLUMNS = (
    "snr_db", "seed", "alpha", "diff_order", "measure", "true_freq_hz",
    "matched", "peak_freq_hz", "correlation", "rmse", "wall_ms",
)


def write_report(report: ExperimentReport, out_dir: str | Path) -> dict[str, Path]:
    """Emit ``report.json``, ``summary.csv`` and plot-ready per-component CSVs.

    summary.csv holds one row per (cell, true component); file runs, which
    have no truths, get one row per recovered mode with the truth columns
    left blank.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.json"}
    paths["report"].write_text(report.to_json(), encoding="utf-8")

    rows = []
    per_component: dict[float, list] = {}
    for cell in report.cells:
        base = (cell.snr_db, cell.seed, cell.alpha, cell.diff_order, cell.measure)
        if cell.scores:
            for s in cell.scores:
                rows.append(base + (s.true_freq_hz, s.matched, s.peak_freq_hz,
                                    s.correlation, s.rmse, cell.wall_ms))
                per_component.setdefault(s.true_freq_hz, []).append(
                    (cell.snr_db, cell.seed, cell.alpha, cell.diff_order,
                     s.matched, s.peak_freq_hz, s.correlation, s.rmse)
                )
        elif cell.success:
            for peak in cell.mode_peaks_hz:
                rows.append(base + (None, None, peak, None, None, cell.wall_ms))
        else:
            rows.append(base + (None, None, None, None, None, cell.wall_ms))

    with open(out / "summary.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_csv_field(v) for v in row) + "\n")
    paths["summary"] = out / "summary.csv"

    for freq, entries in sorted(per_component.items()):
        name = f"component_{freq:g}hz.csv"
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.write("snr_db,seed,alpha,diff_order,matched,peak_freq_hz,correlation,rmse\n")
            for e in entries:
                fh.write(",".join(_csv_field(v) for v in e) + "\n")
        paths[name] = out / name
    return paths
