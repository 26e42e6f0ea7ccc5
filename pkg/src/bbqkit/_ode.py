"""Scalar Dormand-Prince 5(4) integrator for two-state systems.

Specialized to a pair of coupled first-order scalar equations so the hot
loop runs on plain Python floats; for junction sweeps this is substantially
faster than array-based steppers and keeps the step-underflow failure mode
explicit.
"""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["StepUnderflowError", "integrate_2d"]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-minus-fourth order error weights (k2 drops out)
_E1 = 35 / 384 - 5179 / 57600
_E3 = 500 / 1113 - 7571 / 16695
_E4 = 125 / 192 - 393 / 640
_E5 = -2187 / 6784 + 92097 / 339200
_E6 = 11 / 84 - 187 / 2100
_E7 = -1 / 40

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class StepUnderflowError(RuntimeError):
    """Step control drove the step size below the representable floor."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(
            f"step size underflow at t = {time:.9g}: the system is too stiff for "
            "the requested tolerance"
        )


def integrate_2d(
    rhs: Callable[[float, float, float], tuple[float, float]],
    t0: float,
    y0: float,
    z0: float,
    t_end: float,
    rtol: float,
    atol: float,
    sink: Callable[[float, float, float], None] | None = None,
) -> tuple[float, float, float, int]:
    """Advance (y, z) from t0 to t_end with adaptive embedded error control.

    ``sink``, when given, receives (t, y, z) after every accepted step.
    Returns the final (t, y, z) and the accepted-step count.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    t, y, z = t0, y0, z0
    fy, fz = rhs(t, y, z)
    if not (math.isfinite(fy) and math.isfinite(fz)):
        raise StepUnderflowError(t)
    span = t_end - t0
    h = 1e-4 * span
    h_floor = 16.0 * math.ulp(max(abs(t0), abs(t_end)))
    n_accepted = 0

    while t < t_end:
        if h > t_end - t:
            h = t_end - t
        k1y, k1z = fy, fz
        k2y, k2z = rhs(t + _C2 * h, y + h * (_A21 * k1y), z + h * (_A21 * k1z))
        k3y, k3z = rhs(
            t + _C3 * h,
            y + h * (_A31 * k1y + _A32 * k2y),
            z + h * (_A31 * k1z + _A32 * k2z),
        )
        k4y, k4z = rhs(
            t + _C4 * h,
            y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
            z + h * (_A41 * k1z + _A42 * k2z + _A43 * k3z),
        )
        k5y, k5z = rhs(
            t + _C5 * h,
            y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
            z + h * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z),
        )
        k6y, k6z = rhs(
            t + h,
            y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
            z + h * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z),
        )
        y_new = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        z_new = z + h * (_B1 * k1z + _B3 * k3z + _B4 * k4z + _B5 * k5z + _B6 * k6z)
        k7y, k7z = rhs(t + h, y_new, z_new)

        if not (math.isfinite(y_new) and math.isfinite(z_new)
                and math.isfinite(k7y) and math.isfinite(k7z)):
            h *= _MIN_FACTOR
            if h < h_floor:
                raise StepUnderflowError(t)
            fy, fz = rhs(t, y, z)
            continue

        err_y = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        err_z = h * (_E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z)
        scale_y = atol + rtol * max(abs(y), abs(y_new))
        scale_z = atol + rtol * max(abs(z), abs(z_new))
        err = math.sqrt(0.5 * ((err_y / scale_y) ** 2 + (err_z / scale_z) ** 2))

        if err <= 1.0:
            t += h
            y, z = y_new, z_new
            fy, fz = k7y, k7z  # first-same-as-last
            n_accepted += 1
            if sink is not None:
                sink(t, y, z)
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err**-0.2)
        else:
            factor = max(_MIN_FACTOR, _SAFETY * err**-0.2)
        h *= factor
        if h < h_floor:
            raise StepUnderflowError(t)
    return t, y, z, n_accepted
