"""Physical constants used throughout the toolkit (SI units)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.constants


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the fundamental constants the quantization chain depends on.

    Attributes
    ----------
    h : float
        Planck constant, J*s.
    hbar : float
        Reduced Planck constant, J*s.
    e_charge : float
        Elementary charge, C.
    phi0 : float
        Magnetic flux quantum h/(2e), Wb.
    """

    h: float
    hbar: float
    e_charge: float
    phi0: float

    def __post_init__(self) -> None:
        for name in ("h", "hbar", "e_charge", "phi0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.phi0 != self.h / (2 * self.e_charge):
            raise ValueError("phi0 must equal h/(2*e_charge) exactly as computed")

    @classmethod
    def from_planck_and_charge(cls, h: float, e_charge: float) -> "PhysicalConstants":
        return cls(h=h, hbar=h / (2 * math.pi), e_charge=e_charge,
                   phi0=h / (2 * e_charge))


CODATA = PhysicalConstants.from_planck_and_charge(scipy.constants.h, scipy.constants.e)
