"""Dormand-Prince 5(4) integrator for the two-mode system.

PI step-size control on the error per unit step: a step of size ``h`` is
accepted when ``max|err| <= tol * |h|``, so the error accumulated over a
horizon ``T`` is of order ``tol * T``. Output comes from the quartic
continuous extension at caller-supplied times.

The stepping loop is compiled with numba; the state is fixed to
``(c0, cp, q)`` with ``q`` the running integral of ``n0 - n_p``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["StepFailure", "solve"]


class StepFailure(RuntimeError):
    """Step size fell below the floating-point floor before the error test passed."""


C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
])

B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])

# 5th-order minus embedded 4th-order weights
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# Shampine's continuous extension: y(t + th*h) = y + h * sum_s K_s * (P_s @ [th, th^2, th^3, th^4])
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI gains for an error estimate scaling like h**4 (error per unit step)
ALPHA = 0.7 / 4
BETA = 0.4 / 4

OK, STOPPED, FAILED = 0, 1, 2


@njit(cache=True)
def _rhs(t, y, out, a, b, delta, nl, rotating):
    c0 = y[0]
    cp = y[1]
    n0 = c0.real * c0.real + c0.imag * c0.imag
    n_p = cp.real * cp.real + cp.imag * cp.imag
    hb = 0.5 * b
    if rotating:
        out[0] = -1j * (nl * a * n_p * c0 + hb * cp)
        out[1] = -1j * ((nl * n0 - delta) * cp + hb * c0)
    else:
        drive = np.exp(1j * delta * t)
        out[0] = -1j * (nl * a * n_p * c0 + hb * drive * cp)
        out[1] = -1j * (nl * n0 * cp + hb * np.conj(drive) * c0)
    out[2] = n0 - n_p


@njit(cache=True)
def _solve(y0, t0, t_end, tol, t_eval, a, b, delta, nl, rotating, stop_np, Ct, At, Bt, Et, Pt):
    n = y0.size
    n_eval = t_eval.size
    out = np.empty((n_eval, n), dtype=np.complex128)
    k = np.empty((7, n), dtype=np.complex128)
    ys = np.empty(n, dtype=np.complex128)
    y = y0.copy()
    y_new = np.empty(n, dtype=np.complex128)
    t = t0
    direction = 1.0 if t_end >= t0 else -1.0

    _rhs(t, y, k[0], a, b, delta, nl, rotating)

    # Hairer-Wanner starting step
    d0 = np.max(np.abs(y))
    d1 = np.max(np.abs(k[0]))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    for i in range(n):
        ys[i] = y[i] + direction * h0 * k[0, i]
    _rhs(t + direction * h0, ys, k[1], a, b, delta, nl, rotating)
    d2 = np.max(np.abs(k[1] - k[0])) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (tol / max(d1, d2)) ** 0.25
    h = min(100 * h0, h1)
    err_prev = 1e-4

    i_eval = 0
    while i_eval < n_eval and t_eval[i_eval] * direction <= t * direction:
        out[i_eval] = y
        if abs(y[1]) ** 2 > stop_np:
            return out, i_eval + 1, STOPPED, t
        i_eval += 1

    while (t_end - t) * direction > 0:
        h = min(h, abs(t_end - t))
        floor = 16 * np.spacing(max(abs(t), 1.0))
        if h < floor:
            return out, i_eval, FAILED, t
        hs = h * direction

        for s in range(1, 6):
            for i in range(n):
                acc = 0j
                for j in range(s):
                    acc += At[s, j] * k[j, i]
                ys[i] = y[i] + hs * acc
            _rhs(t + Ct[s] * hs, ys, k[s], a, b, delta, nl, rotating)
        for i in range(n):
            acc = 0j
            for j in range(6):
                acc += Bt[j] * k[j, i]
            y_new[i] = y[i] + hs * acc
        _rhs(t + hs, y_new, k[6], a, b, delta, nl, rotating)

        err = 0.0
        for i in range(n):
            acc = 0j
            for j in range(7):
                acc += Et[j] * k[j, i]
            err = max(err, abs(hs * acc))
        err /= tol * h
        if not np.isfinite(err):
            return out, i_eval, FAILED, t

        if err <= 1.0:
            t_new = t + hs
            if abs(t_end - t_new) < floor:
                t_new = t_end
            stop = False
            while i_eval < n_eval and t_eval[i_eval] * direction <= t_new * direction:
                th = (t_eval[i_eval] - t) / hs
                for i in range(n):
                    acc = 0j
                    for j in range(7):
                        acc += k[j, i] * th * (Pt[j, 0] + th * (Pt[j, 1] + th * (Pt[j, 2] + th * Pt[j, 3])))
                    out[i_eval, i] = y[i] + hs * acc
                if abs(out[i_eval, 1]) ** 2 > stop_np:
                    stop = True
                i_eval += 1
            t = t_new
            for i in range(n):
                y[i] = y_new[i]
                k[0, i] = k[6, i]
            if stop or abs(y[1]) ** 2 > stop_np:
                return out, i_eval, STOPPED, t
            factor = SAFETY * max(err, 1e-10) ** -ALPHA * err_prev ** BETA
            h *= min(MAX_FACTOR, max(MIN_FACTOR, factor))
            err_prev = max(err, 1e-4)
        else:
            h *= max(MIN_FACTOR, SAFETY * err ** -ALPHA)

    # leftover samples coincide with t_end up to rounding
    while i_eval < n_eval:
        out[i_eval] = y
        i_eval += 1
    return out, i_eval, OK, t


def solve(y0, t0, t_end, tol, t_eval, a, b, delta, nonlinear=True, rotating=True, stop_np=np.inf):
    """Integrate the two-mode system from ``t0`` to ``t_end``.

    ``y0`` is ``(c0, cp, q)`` with ``cp`` already in the chosen frame. Returns
    ``(times, states, stopped)``: dense-output samples at the leading part of
    ``t_eval`` that was reached. Integration ends early, after the current step,
    once a sample or step end has ``|cp|^2 > stop_np``.

    Raises StepFailure when the controller cannot meet ``tol``.
    """
    t_eval = np.ascontiguousarray(t_eval, dtype=np.float64)
    out, n_done, status, t_reached = _solve(
        np.asarray(y0, dtype=np.complex128), float(t0), float(t_end), float(tol), t_eval,
        float(a), float(b), float(delta), 1.0 if nonlinear else 0.0, bool(rotating), float(stop_np),
        C, A, B, E, P)
    if status == FAILED:
        raise StepFailure(f"step size below floating-point floor near t={t_reached:.6g} (tol={tol:g})")
    return t_eval[:n_done], out[:n_done], status == STOPPED
