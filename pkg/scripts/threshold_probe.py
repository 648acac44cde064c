"""Best PIE / Dolinar PIE ratio for N=8 under each noise setting.

    python scripts/threshold_probe.py [--nbar-min 1e-7] [--points 16]

A ratio above 1 means the receiver is superadditive somewhere on the grid.
"""
from __future__ import annotations

import argparse

import numpy as np

from cqpolar.polar import default_code
from cqpolar.qsim import NoiseConfig, noisy_pipeline_channel
from cqpolar.rates import dolinar_pie, rate_point

SETTINGS = [
    {},
    {"transducer_p": 0.002},
    {"transducer_p": 0.003},
    {"transducer_p": 0.01},
    {"gate_p": 1e-4},
    {"gate_p": 2e-4},
    {"gate_p": 5e-4},
    {"gate_p": 1e-3},
    {"gate_p": 1e-3, "decoupling": "postselect"},
    {"gate_p": 1e-3, "compression": False},
    {"gate_p": 1e-3, "decoding": False},
    {"gate_p": 1e-2},
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nbar-min", type=float, default=1e-7)
    ap.add_argument("--nbar-max", type=float, default=3e-2)
    ap.add_argument("--points", type=int, default=16)
    ap.add_argument("--n-bins", type=int, default=8)
    args = ap.parse_args()

    code = default_code(args.n_bins)
    grid = np.geomspace(args.nbar_min, args.nbar_max, args.points)
    print(f"{'setting':48s} {'max ratio':>9s} {'at nbar':>9s}")
    for kw in SETTINGS:
        noise = NoiseConfig(**kw)
        ratios = []
        for nbar in grid:
            a = float(np.sqrt(nbar))
            ratios.append(rate_point(noisy_pipeline_channel(code, a, noise), code.n_bins, a, nbar=nbar).pie
                          / dolinar_pie(nbar))
        k = int(np.argmax(ratios))
        label = ", ".join(f"{key}={val}" for key, val in kw.items()) or "noiseless"
        print(f"{label:48s} {ratios[k]:9.4f} {grid[k]:9.2e}")


if __name__ == "__main__":
    main()
