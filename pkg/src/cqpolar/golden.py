"""Closed-form reference values for the N=4, K=2 decoder.

The projectors and POVM elements do not depend on alpha. Basis order is
vacuum, then a photon in bin 1, 2, 3, 4.
"""
from __future__ import annotations

import numpy as np

__all__ = ["PROJECTORS_N4", "POVM_N4", "transition_n4"]


def _m(rows) -> np.ndarray:
    return np.array(rows, dtype=float)


_q, _e = 0.25, 0.125

PROJECTORS_N4 = {
    "000": _m([
        [1, 0, 0, 0, 0],
        [0, 0.75, _q, -_q, _q],
        [0, _q, 0.75, _q, -_q],
        [0, -_q, _q, 0.75, _q],
        [0, _q, -_q, _q, 0.75],
    ]),
    "001": _m([
        [0, 0, 0, 0, 0],
        [0, _q, -_q, _q, -_q],
        [0, -_q, _q, -_q, _q],
        [0, _q, -_q, _q, -_q],
        [0, -_q, _q, -_q, _q],
    ]),
    "0000": _m([
        [0.5, _q, _q, _q, _q],
        [_q, 7 / 8, -_e, -_e, -_e],
        [_q, -_e, 7 / 8, -_e, -_e],
        [_q, -_e, -_e, 7 / 8, -_e],
        [_q, -_e, -_e, -_e, 7 / 8],
    ]),
    "0001": _m([
        [0.5, -_q, -_q, -_q, -_q],
        [-_q, _e, _e, _e, _e],
        [-_q, _e, _e, _e, _e],
        [-_q, _e, _e, _e, _e],
        [-_q, _e, _e, _e, _e],
    ]),
    "0010": _m([
        [0.5, -_q, _q, -_q, _q],
        [-_q, 7 / 8, _e, -_e, _e],
        [_q, _e, 7 / 8, _e, -_e],
        [-_q, -_e, _e, 7 / 8, _e],
        [_q, _e, -_e, _e, 7 / 8],
    ]),
    "0011": _m([
        [0.5, _q, -_q, _q, -_q],
        [_q, _e, -_e, _e, -_e],
        [-_q, -_e, _e, -_e, _e],
        [_q, _e, -_e, _e, -_e],
        [-_q, -_e, _e, -_e, _e],
    ]),
}

_shared = _m([
    [0, 0, 0, 0, 0],
    [0, _e, -_e, _e, -_e],
    [0, -_e, _e, -_e, _e],
    [0, _e, -_e, _e, -_e],
    [0, -_e, _e, -_e, _e],
])

POVM_N4 = {
    "0000": _m([
        [0.5, _q, _q, _q, _q],
        [_q, 0.625, _e, -0.375, _e],
        [_q, _e, 0.625, _e, -0.375],
        [_q, -0.375, _e, 0.625, _e],
        [_q, _e, -0.375, _e, 0.625],
    ]),
    "0001": PROJECTORS_N4["0001"].copy(),
    "0010": _shared,
    "0011": _shared.copy(),
}


def transition_n4(alpha: float) -> np.ndarray:
    """Closed-form P(y|u) on the truncated space, rows and columns 0000..0011."""
    a, a2 = alpha, alpha**2
    d = 4 * a2 + 1
    q = (2 * a2 + 2 * a + 0.5) / d
    r = (2 * a2 - 2 * a + 0.5) / d
    h = 0.5 / d
    s = 2 * a2 / d
    return np.array([[q, r, 0, 0], [r, q, 0, 0], [h, h, s, s], [h, h, s, s]])
