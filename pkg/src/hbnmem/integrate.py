"""Adaptive Dormand-Prince 5(4) integrator for complex ODE systems.

Written here rather than taken from ``scipy.integrate`` because the master
equation propagator needs a hook on every *accepted* step (to re-Hermitize
the density matrix and watch trace drift), which ``solve_ivp`` does not
expose.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class IntegrationError(RuntimeError):
    """Step size underflow or too many steps."""


# Dormand & Prince (1980), 7 stages, FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)
    n_steps: int
    n_rejected: int
    n_rhs: int


def dopri45(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t_span: tuple[float, float],
    y0: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    first_step: Optional[float] = None,
    t_eval: Optional[Sequence[float]] = None,
    on_accept: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
    max_steps: int = 1_000_000,
) -> Solution:
    """Integrate ``y' = fun(t, y)`` from ``t_span[0]`` to ``t_span[1]``.

    ``t_eval`` points are hit exactly by shortening steps; without it every
    accepted step is recorded. ``on_accept(t, y)`` may return a corrected
    state, which replaces ``y`` before the next step.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    if t_eval is not None:
        stops = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(stops) <= 0) or stops[0] < t0 or stops[-1] > t1:
            raise ValueError("t_eval must be increasing and inside t_span")
        stops = list(stops)
        if stops[-1] != t1:
            stops.append(t1)
    else:
        stops = [t1]
    record = t_eval is None

    k = np.empty((7,) + y.shape, dtype=y.dtype)
    k[0] = fun(t0, y)
    n_rhs = 1

    if first_step is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
        d1 = np.sqrt(np.mean(np.abs(k[0] / scale) ** 2))
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    else:
        h = first_step
    h = min(h, max_step, t1 - t0)

    ts, ys = [], []
    if record or (t_eval is not None and stops[0] == t0):
        ts.append(t0)
        ys.append(y.copy())
        if not record:
            stops.pop(0)

    t = t0
    n_steps = n_rejected = 0
    stop_idx = 0
    while stop_idx < len(stops):
        target = stops[stop_idx]
        if n_steps + n_rejected > max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps at t={t:.6g}")
        hit = t + h >= target
        h_try = target - t if hit else h
        if h_try <= 16 * np.spacing(abs(t)) or h_try <= 0:
            raise IntegrationError(f"step size underflow at t={t:.6g}")
        for s in range(1, 7):
            dy = np.tensordot(_A[s], k[:s], axes=1)
            k[s] = fun(t + _C[s] * h_try, y + h_try * dy)
        n_rhs += 6
        y_new = y + h_try * np.tensordot(_B5[:6], k[:6], axes=1)
        err = h_try * np.tensordot(_E, k, axes=1)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean(np.abs(err / scale) ** 2))
        if err_norm <= 1.0:
            t = target if hit else t + h_try
            y = y_new
            n_steps += 1
            fixed = on_accept(t, y) if on_accept is not None else None
            if fixed is not None:
                y = fixed
                k[0] = fun(t, y)
                n_rhs += 1
            else:
                k[0] = k[6]  # FSAL
            if record or hit:
                ts.append(t)
                ys.append(y.copy())
            if hit:
                stop_idx += 1
            factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
            # a step clipped to hit an output time says little about the natural step size
            h = max(h, h_try * factor) if hit else h_try * factor
            h = min(h, max_step)
        else:
            n_rejected += 1
            h = h_try * max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
    return Solution(np.array(ts), np.array(ys), n_steps, n_rejected, n_rhs)
