"""Equivalent-circuit synthesis: conjugate pole pairs -> parallel RLC stages.

Each complex pole pair of a fitted impedance maps onto one parallel RLC
resonator of the series chain. Taking the representative pole with positive
imaginary part, s = xi + j*omega with residue a + j*b, the identification is

    omega_k = |Im s|        (resonance, rad/s)
    Q_k     = -omega_k / (2 xi)
    R_k     = -a / xi
    C_k     = Q_k / (omega_k R_k)
    L_k     = 1 / (omega_k^2 C_k)

which is exact as a parameter map; only the reconstruction of the impedance
from the two-pole symmetric form is approximate (the imaginary residue part
is dropped, an error of order 1/Q near resonance).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .ratfit import RationalModel

__all__ = [
    "RLCMode",
    "SynthesisError",
    "synthesize_modes",
    "mode_impedance",
    "chain_impedance",
    "modes_to_dicts",
    "modes_from_dicts",
]

TWO_PI = 2.0 * np.pi

_IDENTITY_RTOL = 1e-9


class SynthesisError(ValueError):
    """Model cannot be realized as a chain of parallel RLC resonators."""


@dataclass(frozen=True)
class RLCMode:
    """One parallel RLC resonator of the synthesized chain.

    Attributes
    ----------
    omega : float
        Resonance frequency, rad/s.
    q_factor : float
        Quality factor (dimensionless).
    r : float
        Parallel resistance, ohms.
    l : float
        Inductance, henries.
    c : float
        Capacitance, farads.
    """

    omega: float
    q_factor: float
    r: float
    l: float
    c: float

    def __post_init__(self) -> None:
        for name in ("omega", "q_factor", "r", "l", "c"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite")
        omega_lc = 1.0 / np.sqrt(self.l * self.c)
        if abs(omega_lc - self.omega) > _IDENTITY_RTOL * self.omega:
            raise ValueError("omega must equal 1/sqrt(l*c)")
        q_rc = self.omega * self.r * self.c
        if abs(q_rc - self.q_factor) > _IDENTITY_RTOL * self.q_factor:
            raise ValueError("q_factor must equal omega*r*c")

    @property
    def freq_hz(self) -> float:
        return self.omega / TWO_PI

    @classmethod
    def from_rwq(cls, r: float, omega: float, q_factor: float) -> "RLCMode":
        """Build a mode from (R, omega, Q); C and L follow from the identities."""
        c = q_factor / (omega * r)
        return cls(omega=omega, q_factor=q_factor, r=r, l=1.0 / (omega**2 * c), c=c)


def _representative_pairs(model: RationalModel) -> list[tuple[complex, complex]]:
    """Return (pole, residue) with Im(pole) > 0, one per conjugate pair."""
    pairs = []
    for p, r in zip(model.poles, model.residues):
        if p.imag == 0:
            raise SynthesisError(
                f"real pole at {p.real:.6g} rad/s cannot form a resonant mode"
            )
        if p.imag > 0:
            pairs.append((p, r))
    return pairs


def synthesize_modes(model: RationalModel, *, discard_warn_frac: float = 0.01) -> list[RLCMode]:
    """Convert every conjugate pole pair of ``model`` into an :class:`RLCMode`.

    Modes are returned sorted by ascending resonance frequency. The constant
    and slope terms have no RLC-stage counterpart: if either contributes more
    than ``discard_warn_frac`` of the in-band median impedance magnitude, a
    warning is issued; they are discarded in both cases.

    Raises
    ------
    SynthesisError
        On a real pole, a lossless pole (Re = 0, infinite Q), or a residue
        with non-positive real part (negative resistance).
    """
    pairs = _representative_pairs(model)
    if not pairs:
        raise SynthesisError("model has no complex pole pairs")

    modes = []
    for pole, residue in pairs:
        damping = pole.real
        omega = pole.imag
        a = residue.real
        if damping == 0:
            raise SynthesisError(
                f"lossless pole at {omega:.6g} rad/s has infinite Q; add loss to the "
                "model or construct the LC mode directly"
            )
        if a <= 0:
            raise SynthesisError(
                f"residue real part {a:.6g} <= 0 at pole {omega:.6g} rad/s implies a "
                "non-physical negative resistance"
            )
        q_factor = -omega / (2.0 * damping)
        r = -a / damping
        modes.append(RLCMode.from_rwq(r=r, omega=omega, q_factor=q_factor))
    modes.sort(key=lambda m: m.omega)

    _warn_on_discarded_terms(model, modes, discard_warn_frac)
    return modes


def _warn_on_discarded_terms(model: RationalModel, modes: list[RLCMode], frac: float) -> None:
    omegas = np.array([m.omega for m in modes])
    grid = np.geomspace(omegas.min() / 2.0, omegas.max() * 2.0, 201)
    z_mag = np.abs(
        sum(r / (1j * grid - p) for p, r in zip(model.poles, model.residues))
        + model.const_term
        + 1j * grid * model.slope_term
    )
    scale = float(np.median(z_mag))
    slope_contrib = abs(model.slope_term) * grid[-1]
    if abs(model.const_term) > frac * scale or slope_contrib > frac * scale:
        warnings.warn(
            f"discarding constant term {model.const_term:.3g} ohm and slope term "
            f"{model.slope_term:.3g} ohm*s exceeding {frac:.0%} of the in-band "
            f"median |Z| = {scale:.3g} ohm; the quantization chain has no home for them",
            stacklevel=3,
        )


def mode_impedance(mode: RLCMode, freq_hz: Sequence[float] | np.ndarray) -> np.ndarray:
    """Impedance of one parallel RLC stage at the given frequencies.

    Evaluates Z(s) = ((omega R / Q) s) / (s^2 + (omega/Q) s + omega^2)
    with s = j*2*pi*f.
    """
    freq = np.atleast_1d(np.asarray(freq_hz, dtype=float))
    if np.any(~np.isfinite(freq)) or np.any(freq <= 0):
        raise ValueError("frequencies must be positive and finite")
    s = 1j * TWO_PI * freq
    num = (mode.omega * mode.r / mode.q_factor) * s
    den = s * s + (mode.omega / mode.q_factor) * s + mode.omega**2
    return num / den


def chain_impedance(
    modes: Sequence[RLCMode],
    freq_hz: Sequence[float] | np.ndarray,
    const_term: float = 0.0,
    slope_term: float = 0.0,
) -> np.ndarray:
    """Series-chain impedance: the sum of all stage impedances plus the
    constant and slope terms."""
    freq = np.atleast_1d(np.asarray(freq_hz, dtype=float))
    total = np.full(freq.shape, complex(const_term)) + 1j * TWO_PI * freq * slope_term
    for mode in modes:
        total = total + mode_impedance(mode, freq)
    return total


def modes_to_dicts(modes: Sequence[RLCMode]) -> list[dict[str, Any]]:
    return [
        {
            "omega_rad_s": float(m.omega),
            "q": float(m.q_factor),
            "r_ohm": float(m.r),
            "l_h": float(m.l),
            "c_f": float(m.c),
        }
        for m in modes
    ]


def modes_from_dicts(docs: Sequence[dict[str, Any]]) -> list[RLCMode]:
    return [
        RLCMode(
            omega=float(d["omega_rad_s"]),
            q_factor=float(d["q"]),
            r=float(d["r_ohm"]),
            l=float(d["l_h"]),
            c=float(d["c_f"]),
        )
        for d in docs
    ]
