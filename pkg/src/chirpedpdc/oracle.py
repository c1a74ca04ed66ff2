"""Direct numerical integration of the scaled propagation equations.

This is the reference the special-function solution is checked against.  It
integrates the coupled first-order system in the rotating frame (the
``(i/2) x`` terms) with an adaptive embedded Runge-Kutta scheme, splitting the
interval so the step ceiling follows the local phase rate ``|x|/2``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "IntegrationSettings",
    "GreenPair",
    "IntegrationError",
    "StepUnderflowError",
    "ToleranceNotMetError",
    "integrate_green",
    "integrate_second_order",
    "compose",
]

_METHODS = {3: "RK23", 5: "RK45", 8: "DOP853"}
_SEGMENT = 8.0
_STEPS_PER_RADIAN = 1.0
# local error target relative to the requested tolerance; the global error of
# a long oscillatory run is roughly ten times the local one
_LOCAL_SAFETY = 0.1


class IntegrationError(RuntimeError):
    pass


class StepUnderflowError(IntegrationError):
    """The integrator could not resolve the oscillation."""


class ToleranceNotMetError(IntegrationError):
    """The unitarity residual of the result exceeds the promised bound."""


@dataclass(frozen=True)
class IntegrationSettings:
    """Tolerances and step ceiling (in scaled ``x`` units) for the integrator.

    ``method_order`` picks the embedded pair: 3 (Bogacki-Shampine), 5
    (Dormand-Prince) or 8 (DOP853).
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step: float = 0.5
    method_order: int = 8

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("tolerances and max_step must be positive")
        if self.method_order not in _METHODS:
            raise ValueError(f"method_order must be one of {sorted(_METHODS)}")


@dataclass
class GreenPair:
    """Numerically integrated fundamental matrix ``[[A, B], [B~, A~]]``."""

    A_num: np.ndarray
    B_num: np.ndarray
    Bt_num: np.ndarray
    At_num: np.ndarray
    residual_unitarity: np.ndarray

    @property
    def matrix(self):
        return np.array([[self.A_num, self.B_num], [self.Bt_num, self.At_num]])


def _segments(a, b):
    n = max(1, int(math.ceil(abs(b - a) / _SEGMENT)))
    knots = np.linspace(a, b, n + 1)
    return list(zip(knots[:-1], knots[1:]))


def _step_ceiling(settings, xa, xb):
    rate = 0.5 * max(abs(xa), abs(xb), 1.0)
    return min(settings.max_step, 1.0 / (_STEPS_PER_RADIAN * rate))


def integrate_green(coords, settings=None):
    """Fundamental matrix of the scaled system from ``x0`` to ``xL``.

    ``coords`` may hold several detunings; they must share ``xL - x0`` so the
    whole batch is integrated as one vector system.  The first column starts
    from ``(1, 0)`` and the second from ``(0, 1)``.

    Raises
    ------
    StepUnderflowError
        If the adaptive stepper gives up.
    ToleranceNotMetError
        If ``| |A|^2 - |B|^2 - 1 |`` exceeds ``10 rel_tol (|A|^2 + |B|^2)``.
    """
    settings = settings or IntegrationSettings()
    x0 = np.atleast_1d(coords.x0).astype(float)
    xl = np.atleast_1d(coords.xL).astype(float)
    span = xl - x0
    if np.any(span < 0):
        raise ValueError("integration needs x0 <= xL")
    if np.ptp(span) > 1e-9 * max(1.0, float(np.max(np.abs(span)))):
        raise ValueError("batched coordinates must share xL - x0")
    length = float(span[0])
    n = x0.size
    sigma = coords.sigma

    def rhs(s, y):
        x = x0 + s
        u1, v1, u2, v2 = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        half = 0.5j * x
        return np.concatenate((
            -half * u1 + sigma * v1,
            half * v1 + sigma * u1,
            -half * u2 + sigma * v2,
            half * v2 + sigma * u2,
        ))

    y0 = np.concatenate((np.ones(n), np.zeros(n), np.zeros(n), np.ones(n))).astype(complex)
    # solve_ivp measures error as an RMS over components; scale so each lane
    # keeps the requested tolerance
    scale = _LOCAL_SAFETY / math.sqrt(4 * n)
    rtol = max(settings.rel_tol * scale, 100 * np.finfo(float).eps)
    atol = settings.abs_tol * scale
    if length == 0:
        y = y0
    else:
        # the step ceiling follows the largest |x| of the batch
        y = y0
        for sa, sb in _segments(0.0, length):
            sol = solve_ivp(
                rhs, (sa, sb), y, method=_METHODS[settings.method_order],
                rtol=rtol, atol=atol,
                max_step=_step_ceiling(settings, *_batch_extent(x0, sa, sb)),
            )
            if sol.status != 0:
                raise StepUnderflowError(
                    f"integration failed on s in [{sa:.4g}, {sb:.4g}]: {sol.message}"
                )
            y = sol.y[:, -1]
    A, Bt, B, At = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
    res = np.abs(np.abs(A) ** 2 - np.abs(B) ** 2 - 1)
    bound = 10 * settings.rel_tol * (np.abs(A) ** 2 + np.abs(B) ** 2)
    if np.any(res > bound):
        i = int(np.argmax(res / bound))
        raise ToleranceNotMetError(
            f"unitarity residual {res[i]:.3g} exceeds {bound[i]:.3g} at x0={x0[i]:.6g}"
        )
    shape = np.shape(coords.x0)
    out = [v.reshape(shape) if shape else complex(v[0]) for v in (A, B, Bt, At)]
    res = res.reshape(shape) if shape else float(res[0])
    return GreenPair(out[0], out[1], out[2], out[3], res)


def _batch_extent(x0, sa, sb):
    lo = x0 + sa
    hi = x0 + sb
    return float(np.max(np.abs(lo))), float(np.max(np.abs(hi)))


def compose(first, second):
    """Green pair of running ``first`` and then ``second``."""
    m = np.einsum("ij...,jk...->ik...", second.matrix, first.matrix)
    A, B, Bt, At = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    res = np.abs(np.abs(A) ** 2 - np.abs(B) ** 2 - 1)
    return GreenPair(A, B, Bt, At, res)


def integrate_second_order(coords, settings, init_value, init_slope, x_eval=None, sigma_sq=None):
    """Integrate ``w'' + (x^2/4 + i/2 - sigma^2) w = 0`` from ``x0`` to ``xL``.

    ``coords`` must be scalar.  ``sigma_sq`` overrides ``coords.nu`` (it may be
    complex).  The absolute tolerance is scaled by the size of the initial
    data, so the solution is exactly linear in it.

    Returns
    -------
    x, w : ndarray
        Sample positions (``x_eval`` or 201 evenly spaced points) and values.
    """
    settings = settings or IntegrationSettings()
    x0, xl = float(coords.x0), float(coords.xL)
    if xl < x0:
        raise ValueError("integration needs x0 <= xL")
    s2 = coords.nu if sigma_sq is None else complex(sigma_sq)
    c = 0.5j - s2
    if x_eval is None:
        x_eval = np.linspace(x0, xl, 201)
    x_eval = np.asarray(x_eval, dtype=float)
    if np.any((x_eval < x0) | (x_eval > xl)) or np.any(np.diff(x_eval) < 0):
        raise ValueError("x_eval must be sorted and inside [x0, xL]")
    mag = max(abs(complex(init_value)), abs(complex(init_slope)))
    if mag == 0:
        return x_eval, np.zeros(x_eval.size, dtype=complex)

    def rhs(x, y):
        return np.array([y[1], -(0.25 * x * x + c) * y[0]])

    rtol = max(_LOCAL_SAFETY * settings.rel_tol / math.sqrt(2), 100 * np.finfo(float).eps)
    # an exact power of two keeps the error norm invariant under scaling
    atol = settings.abs_tol * 2.0 ** math.frexp(mag)[1]
    y0 = np.array([init_value, init_slope], dtype=complex)
    out = np.empty(x_eval.size, dtype=complex)
    y = y0
    for xa, xb in _segments(x0, xl) if xl > x0 else []:
        last = xb == xl
        sel = (x_eval >= xa) & ((x_eval < xb) | (last & (x_eval <= xb)))
        sol = solve_ivp(
            rhs, (xa, xb), y, method=_METHODS[settings.method_order],
            rtol=rtol, atol=atol, max_step=_step_ceiling(settings, xa, xb),
            dense_output=True,
        )
        if sol.status != 0:
            raise StepUnderflowError(f"integration failed on [{xa:.4g}, {xb:.4g}]: {sol.message}")
        if sel.any():
            out[sel] = sol.sol(x_eval[sel])[0]
        y = sol.y[:, -1]
    if xl == x0:
        out[:] = init_value
    return x_eval, out
