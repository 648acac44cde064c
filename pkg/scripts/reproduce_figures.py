"""Write the figure data sets to results/.

    python scripts/reproduce_figures.py [--quick] [--workers K]

Noiseless PIE against nbar for N = 2, 4, 8, then transducer and gate error
sweeps for N = 8 with alpha optimized per error value, then correlated gate
noise for N = 4. Plotting is left to the reader; every CSV shares one header.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from cqpolar.experiments import load_config, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="coarser grids")
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--results", type=Path, default=ROOT / "results")
    args = ap.parse_args()

    cfgdir = ROOT / "configs"
    nbar = tuple(np.geomspace(1e-4, 1e-1, 7 if args.quick else 16).tolist())
    base = load_config(cfgdir / "noiseless.json")
    for n in (2, 4, 8):
        cfg = base.replace(config_id=f"noiseless_n{n}", n_bins=n, nbar=nbar, workers=args.workers)
        print("wrote", run_sweep(cfg, args.results / f"noiseless_n{n}.csv"))

    for name in ("transducer_n8", "gate_n8"):
        cfg = load_config(cfgdir / f"{name}.json", {"workers": args.workers})
        if args.quick:
            cfg = cfg.replace(error_p=cfg.error_p[::2])
        print("wrote", run_sweep(cfg, args.results / f"{name}.csv"))

    corr = load_config(cfgdir / "gate_correlated_n4.json")
    for model in ("independent", "paired", "uniform"):
        cfg = corr.replace(config_id=f"gate_{model}_n4", pauli_model=model, workers=args.workers)
        print("wrote", run_sweep(cfg, args.results / f"gate_{model}_n4.csv"))


if __name__ == "__main__":
    main()
