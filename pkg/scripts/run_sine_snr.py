#!/usr/bin/env python3
"""Run the low-SNR sinusoid-separation sweep and write its report.

Usage: python scripts/run_sine_snr.py [out_dir]
"""

import json
import sys
from pathlib import Path

from rmd.bench import ExperimentSpec, run_experiment, write_report

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else REPO / "results" / "sine_snr"
    spec_doc = json.loads((REPO / "specs" / "sine_snr.json").read_text())
    report = run_experiment(ExperimentSpec.from_dict(spec_doc))
    paths = write_report(report, out_dir)
    n_failed = sum(1 for c in report.cells if not c.success)
    print(f"{len(report.cells)} cells ({n_failed} failed) -> {paths['report']}")
    for agg in report.aggregates():
        print(
            f"snr={agg['snr_db']:g} alpha={agg['alpha']:g} order={agg['diff_order']} "
            f"f={agg['true_freq_hz']:g}Hz matched={agg['n_matched']}/{agg['n_cells']} "
            f"corr={agg['mean_correlation']} |dpeak|={agg['mean_abs_peak_err_hz']}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
