#!/usr/bin/env python3
"""Short end-to-end run of the mode x scenario matrix with sanity checks on the report."""
import argparse
import math
import os
import sys
import tempfile

from iesguard.harness import emit, load_run_config, run_matrix


def check_report(report, expected_cells: int) -> int:
    failures = 0
    if len(report) != expected_cells:
        print(f"[check] expected {expected_cells} cells, got {len(report)}")
        failures += 1
    for row in report.rows:
        key = f"mode {row['mode']} scenario {row['scenario']} seed {row['seed']}"
        if not all(math.isfinite(row[k]) for k in ('profit', 'revenue', 'cost', 'reward_mean')):
            print(f"[check] {key}: non-finite metrics")
            failures += 1
        if abs(row['profit'] - (row['revenue'] - row['cost'])) > 1e-6 * max(1.0, abs(row['profit'])):
            print(f"[check] {key}: profit does not equal revenue minus cost")
            failures += 1
    n_traces = len(report.traces)
    if n_traces != expected_cells * report.rows[0]['episodes'] * 24:
        print(f"[check] unexpected number of dispatch trace rows: {n_traces}")
        failures += 1
    return failures


def main() -> int:
    parser = argparse.ArgumentParser(description="iesguard robustness smoke run")
    parser.add_argument("--episodes", type=int, default=int(os.getenv("IESGUARD_SMOKE_EPISODES", "6")))
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1])
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default=None, help="Keep outputs in this directory")
    args = parser.parse_args()

    out = args.out or tempfile.mkdtemp(prefix="iesguard-smoke-")
    cfg = load_run_config(
        None,
        output_dir=out,
        seeds=args.seeds,
        workers=args.workers,
        synthetic_days=3,
        trainer={'episodes': args.episodes, 'batch_size': 32, 'learning_starts': 48, 'hidden': [32, 32]},
        evaluation={'episodes': 3, 'clean_episodes': 3, 'attacked_episodes': 3},
    )
    print(f"[run] {len(cfg.mode) * len(cfg.scenario) * len(cfg.seeds)} cells, output in {out}")
    report = run_matrix(cfg, train_missing=True)
    for path in emit(report, cfg.output_path):
        print(f"[run] wrote {path}")

    print(report.profit_table())
    failures = check_report(report, len(cfg.mode) * len(cfg.scenario) * len(cfg.seeds))
    if failures:
        print(f"[result] FAIL ({failures} failure conditions)")
        return 1
    print("[result] PASS")
    return 0


if __name__ == "__main__":
    sys.exit(main())
