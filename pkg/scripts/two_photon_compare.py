"""Two-photon versus single-photon receiver PIE for N=4.

    python scripts/two_photon_compare.py
"""
from __future__ import annotations

import numpy as np

from cqpolar.multiphoton import two_photon_channel
from cqpolar.polar import default_code
from cqpolar.rates import optimize_input, pie
from cqpolar.scdecoder import effective_channel


def main() -> None:
    code = default_code(4)
    print(f"{'alpha':>6s} {'single':>8s} {'two':>8s} {'max row diff':>13s}")
    for a in (1e-3, 0.01, 0.05, 0.1, 0.2, 0.3):
        one, two = effective_channel(code, a), two_photon_channel(code, a)
        _, i1 = optimize_input(one)
        _, i2 = optimize_input(two)
        diff = float(np.abs(one.probabilities - two.probabilities).max())
        print(f"{a:6.3f} {pie(i1, 4, a * a):8.4f} {pie(i2, 4, a * a):8.4f} {diff:13.3e}")


if __name__ == "__main__":
    main()
