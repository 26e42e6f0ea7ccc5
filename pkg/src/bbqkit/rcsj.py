"""Time-domain simulation of a current-driven junction with gap-gated loss.

The junction is a parallel combination of the supercurrent element
I_c*sin(phi), a voltage-controlled conductance that is zero below the gap
voltage 2*Delta0/e and 1/R_N above it, and a shunt capacitance C_J. Current
balance at the drive node gives a second-order equation for the phase, which
is integrated in dimensionless form: time in units of the inverse plasma
frequency omega_p = sqrt(2*pi*I_c/(Phi0*C_J)), currents in units of I_c, and
the damping set by 1/Q with Q = sqrt(beta_c) = omega_p*R_N*C_J.

The conductance step at the gap voltage is smoothed by a linear ramp over a
configurable half-width so the right-hand side stays Lipschitz; both
plateaus are reproduced exactly outside the ramp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._ode import StepUnderflowError, integrate_2d
from .constants import CODATA, PhysicalConstants

__all__ = [
    "RcsjParams",
    "PhaseState",
    "Trajectory",
    "Branch",
    "IVCurve",
    "SimulationError",
    "junction_conductance",
    "integrate",
    "iv_sweep",
]

#: Default half-width of the conductance smoothing ramp, as a fraction of the
#: gap voltage 2*Delta0/e.
DEFAULT_WINDOW_FRACTION = 1e-3


class SimulationError(RuntimeError):
    """Integration failed; carries the time (and bias point, if any)."""


@dataclass(frozen=True)
class RcsjParams:
    """Junction parameters: critical current (A), normal resistance (ohm),
    shunt capacitance (F), and zero-temperature gap energy (J)."""

    i_c: float
    r_n: float
    c_j: float
    delta0: float

    def __post_init__(self) -> None:
        for name in ("i_c", "r_n", "c_j", "delta0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite")

    def plasma_frequency(self, constants: PhysicalConstants = CODATA) -> float:
        """omega_p = sqrt(2*pi*I_c/(Phi0*C_J)), rad/s."""
        return math.sqrt(2.0 * math.pi * self.i_c / (constants.phi0 * self.c_j))

    def beta_c(self, constants: PhysicalConstants = CODATA) -> float:
        """Stewart-McCumber damping group 2*pi*I_c*R_N^2*C_J/Phi0 = Q^2."""
        return 2.0 * math.pi * self.i_c * self.r_n**2 * self.c_j / constants.phi0

    def gap_voltage(self, constants: PhysicalConstants = CODATA) -> float:
        """Quasiparticle onset voltage 2*Delta0/e, volts."""
        return 2.0 * self.delta0 / constants.e_charge


@dataclass(frozen=True)
class PhaseState:
    """Junction phase (rad), its time derivative (rad/s), and the time (s)."""

    phi: float
    dphi_dt: float
    time: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi) and math.isfinite(self.dphi_dt)
                and math.isfinite(self.time)):
            raise ValueError("phase state must be finite")

    def voltage(self, constants: PhysicalConstants = CODATA) -> float:
        """Instantaneous junction voltage (Phi0/2pi)*dphi/dt, volts."""
        return constants.phi0 / (2.0 * math.pi) * self.dphi_dt


@dataclass(frozen=True)
class Trajectory:
    """Integrated phase trajectory sampled at the accepted steps."""

    time_s: np.ndarray
    phi_rad: np.ndarray
    dphi_dt_rad_s: np.ndarray
    constants: PhysicalConstants = CODATA

    @property
    def voltage_v(self) -> np.ndarray:
        return self.constants.phi0 / (2.0 * math.pi) * self.dphi_dt_rad_s

    def __len__(self) -> int:
        return int(self.time_s.size)

    def __getitem__(self, index: int) -> PhaseState:
        return PhaseState(
            phi=float(self.phi_rad[index]),
            dphi_dt=float(self.dphi_dt_rad_s[index]),
            time=float(self.time_s[index]),
        )

    def final_state(self) -> PhaseState:
        return self[-1]


class Branch(enum.Enum):
    SWEEP_UP = "up"
    SWEEP_DOWN = "down"


@dataclass(frozen=True)
class IVCurve:
    """One branch of a swept current-voltage characteristic."""

    branch: Branch
    i_amp: np.ndarray
    v_volt: np.ndarray

    def __post_init__(self) -> None:
        i = np.asarray(self.i_amp, dtype=float)
        v = np.asarray(self.v_volt, dtype=float)
        object.__setattr__(self, "i_amp", i)
        object.__setattr__(self, "v_volt", v)
        if i.shape != v.shape or i.ndim != 1:
            raise ValueError("i_amp and v_volt must be 1-D arrays of equal length")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(i)):
            raise ValueError("IV samples must be finite")
        if i.size >= 2:
            diffs = np.diff(i)
            if not (np.all(diffs >= 0) or np.all(diffs <= 0)):
                raise ValueError("drive current must be monotone along a branch")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.i_amp.tolist(), self.v_volt.tolist()))


def junction_conductance(
    v: Union[float, np.ndarray],
    params: RcsjParams,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
    constants: PhysicalConstants = CODATA,
) -> Union[float, np.ndarray]:
    """Quasiparticle conductance in siemens at junction voltage ``v``.

    Zero for |V| < 2*Delta0/e - w and 1/R_N for |V| > 2*Delta0/e + w, with a
    linear ramp across the smoothing window of half-width
    w = window_fraction * (2*Delta0/e).
    """
    v_gap = params.gap_voltage(constants)
    w = window_fraction * v_gap
    g_n = 1.0 / params.r_n
    x = (np.abs(v) - (v_gap - w)) / (2.0 * w)
    return g_n * np.clip(x, 0.0, 1.0)


def _dimensionless_rhs(
    params: RcsjParams,
    drive_amps: Callable[[float], float] | float,
    window_fraction: float,
    constants: PhysicalConstants,
) -> Callable[[float, float, float], tuple[float, float]]:
    """RHS in plasma-time units: tau = omega_p*t, state (phi, w = dphi/dtau)."""
    omega_p = params.plasma_frequency(constants)
    inv_q = 1.0 / math.sqrt(params.beta_c(constants))
    v_scale = constants.phi0 * omega_p / (2.0 * math.pi)  # volts per unit w
    v_gap = params.gap_voltage(constants)
    half_window = window_fraction * v_gap
    w_lo = (v_gap - half_window) / v_scale
    w_hi = (v_gap + half_window) / v_scale
    ramp = w_hi - w_lo
    i_c = params.i_c
    sin = math.sin

    if callable(drive_amps):
        def rhs(tau: float, phi: float, w: float) -> tuple[float, float]:
            aw = abs(w)
            if aw <= w_lo:
                damping = 0.0
            elif aw >= w_hi:
                damping = inv_q * w
            else:
                damping = inv_q * w * (aw - w_lo) / ramp
            return w, drive_amps(tau / omega_p) / i_c - sin(phi) - damping
    else:
        i_ratio = float(drive_amps) / i_c

        def rhs(tau: float, phi: float, w: float) -> tuple[float, float]:
            aw = abs(w)
            if aw <= w_lo:
                damping = 0.0
            elif aw >= w_hi:
                damping = inv_q * w
            else:
                damping = inv_q * w * (aw - w_lo) / ramp
            return w, i_ratio - sin(phi) - damping

    return rhs


def integrate(
    params: RcsjParams,
    drive: Callable[[float], float] | float,
    initial: PhaseState,
    t_end: float,
    tol: float = 1e-8,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
    constants: PhysicalConstants = CODATA,
) -> Trajectory:
    """Integrate the phase equation from ``initial`` up to ``t_end`` seconds.

    ``drive`` is the drive current: either a constant in amperes or a
    callable of time (seconds) returning amperes. ``tol`` is the local
    relative error tolerance of the adaptive stepper.

    Raises
    ------
    SimulationError
        On step-size underflow (stiffness) or non-finite state; the message
        carries the failure time in seconds.
    """
    if not t_end > initial.time:
        raise ValueError("t_end must exceed the initial time")
    if not tol > 0:
        raise ValueError("tol must be positive")
    omega_p = params.plasma_frequency(constants)
    rhs = _dimensionless_rhs(params, drive, window_fraction, constants)

    times = [initial.time]
    phis = [initial.phi]
    dphis = [initial.dphi_dt]

    def sink(tau: float, phi: float, w: float) -> None:
        times.append(tau / omega_p)
        phis.append(phi)
        dphis.append(w * omega_p)

    try:
        integrate_2d(
            rhs,
            initial.time * omega_p,
            initial.phi,
            initial.dphi_dt / omega_p,
            t_end * omega_p,
            rtol=tol,
            atol=tol * 1e-2,
            sink=sink,
        )
    except StepUnderflowError as exc:
        raise SimulationError(
            f"integration failed at t = {exc.time / omega_p:.9g} s: {exc}"
        ) from exc
    return Trajectory(
        time_s=np.array(times),
        phi_rad=np.array(phis),
        dphi_dt_rad_s=np.array(dphis),
        constants=constants,
    )


def _average_voltage(
    taus: Sequence[float], phis: Sequence[float], v_scale: float
) -> float:
    """Time-averaged dimensionless voltage over the window, clipped to an
    integer number of 2*pi phase slips when at least two slips occurred."""
    taus = np.asarray(taus)
    phis = np.asarray(phis)
    span_phi = phis[-1] - phis[0]
    if abs(span_phi) >= 4.0 * math.pi:
        sign = 1.0 if span_phi > 0 else -1.0
        ph = sign * phis
        first = math.ceil(ph[0] / (2.0 * math.pi) + 0.5)  # skip a partial first turn
        last = math.floor(ph[-1] / (2.0 * math.pi))
        t_a = _crossing_time(taus, ph, first * 2.0 * math.pi, which="first")
        t_b = _crossing_time(taus, ph, last * 2.0 * math.pi, which="last")
        if last > first and t_a is not None and t_b is not None and t_b > t_a:
            return v_scale * sign * (last - first) * 2.0 * math.pi / (t_b - t_a)
    return v_scale * span_phi / (taus[-1] - taus[0])


def _crossing_time(
    taus: np.ndarray, phis: np.ndarray, target: float, which: str
) -> float | None:
    """Linear-interpolated time of an upward crossing of ``target``; robust
    against locally non-monotone phase (ripple on the running state)."""
    upward = np.nonzero((phis[:-1] < target) & (phis[1:] >= target))[0]
    if upward.size == 0:
        return None
    idx = int(upward[0] if which == "first" else upward[-1])
    t1, p1 = taus[idx], phis[idx]
    t2, p2 = taus[idx + 1], phis[idx + 1]
    if p2 == p1:
        return float(t1)
    return float(t1 + (target - p1) * (t2 - t1) / (p2 - p1))


def iv_sweep(
    params: RcsjParams,
    i_max: float,
    n_points: int,
    settle_periods: int = 50,
    average_periods: int = 200,
    tol: float = 1e-8,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
    constants: PhysicalConstants = CODATA,
) -> tuple[IVCurve, IVCurve]:
    """Hysteresis-resolving dc sweep 0 -> i_max -> 0.

    Each bias point continues from the final state of the previous one (the
    state continuity is what exposes hysteresis), discards
    ``settle_periods`` plasma periods, then reports the voltage averaged
    over ``average_periods`` plasma periods, clipped to an integer number of
    phase-slip periods when they are detectable.

    Returns the up-branch and down-branch :class:`IVCurve`.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    omega_p = params.plasma_frequency(constants)
    period = 2.0 * math.pi  # one plasma period in dimensionless time
    v_scale = constants.phi0 * omega_p / (2.0 * math.pi)

    up_bias = np.linspace(0.0, i_max, n_points)
    down_bias = np.linspace(i_max, 0.0, n_points)

    phi, w = 0.0, 0.0
    branches = []
    for branch, biases in ((Branch.SWEEP_UP, up_bias), (Branch.SWEEP_DOWN, down_bias)):
        voltages = np.empty(len(biases))
        for k, i_d in enumerate(biases):
            rhs = _dimensionless_rhs(params, float(i_d), window_fraction, constants)
            try:
                _, phi, w, _ = integrate_2d(
                    rhs, 0.0, phi, w, settle_periods * period,
                    rtol=tol, atol=tol * 1e-2,
                )
                taus = [0.0]
                phis = [phi]

                def sink(tau: float, p: float, _w: float) -> None:
                    taus.append(tau)
                    phis.append(p)

                _, phi, w, _ = integrate_2d(
                    rhs, 0.0, phi, w, average_periods * period,
                    rtol=tol, atol=tol * 1e-2, sink=sink,
                )
            except StepUnderflowError as exc:
                raise SimulationError(
                    f"{branch.value}-branch bias point I_d = {i_d:.6g} A failed at "
                    f"t = {exc.time / omega_p:.9g} s: {exc}"
                ) from exc
            voltages[k] = _average_voltage(taus, phis, v_scale)
        branches.append(IVCurve(branch=branch, i_amp=biases, v_volt=voltages))
    return branches[0], branches[1]
