"""Run every experiment with its default parameters and write JSON reports.

    python scripts/run_all.py --out reports/
"""
import argparse
from pathlib import Path

import numpy as np

from collapse_lab import experiments as ex
from collapse_lab.cli import emit_report


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", type=Path, default=Path("reports"))
    parser.add_argument("--seed", type=int, default=ex.DEFAULT_SEED)
    parser.add_argument("--samples", type=int, default=10**5)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    reports = {}
    for initial in ("+z", "-z", "+x", "-x"):
        name = "electron_" + initial.replace("+", "plus").replace("-", "minus")
        reports[name] = ex.run_electron_experiment(initial, samples=args.samples, seed=args.seed)
    for n in (1, 4, 10, 16, 1000):
        reports[f"photons_{n}"] = ex.run_photon_experiment(n, samples=args.samples, seed=args.seed)
    for branch in ("M_++", "M_+-"):
        reports["retrodict_" + branch[2:].replace("+", "p").replace("-", "m")] = ex.run_retrodiction(branch)
    reports["retrodict_phase"] = ex.phase_sweep(np.linspace(0, np.pi, 16))

    for name, rep in reports.items():
        (args.out / f"{name}.json").write_text(emit_report(rep, "json"), encoding="utf-8")
        delta = "" if rep.delta is None else f"  delta={rep.delta:+.6f}"
        print(f"{name:<24} {rep.runtime * 1e3:8.1f} ms{delta}")


if __name__ == "__main__":
    main()
