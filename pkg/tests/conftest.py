"""Shared oracles for the test suite.

The RLC generator below is written in admittance form, 1/(1/R + 1/(sL) + sC),
deliberately different from the package's transfer-function algebra so the
two routes stay independent.
"""

import numpy as np
import pytest

TWO_PI = 2.0 * np.pi


def rlc_impedance_oracle(freq_hz, r, omega0, q):
    """Parallel RLC impedance via the admittance sum."""
    c = q / (omega0 * r)
    l = 1.0 / (omega0**2 * c)
    s = 1j * TWO_PI * np.asarray(freq_hz, dtype=float)
    return 1.0 / (1.0 / r + 1.0 / (s * l) + s * c)


def rlc_pole_residue_oracle(r, omega0, q):
    """Exact pole (Im > 0) and residue of the parallel RLC partial fraction.

    The pole sits at -omega0/(2Q) + j*omega0*sqrt(1 - 1/(4Q^2)); the residue
    follows from evaluating s/C at the pole divided by the pole separation.
    """
    c = q / (omega0 * r)
    xi = -omega0 / (2.0 * q)
    omega_d = omega0 * np.sqrt(1.0 - 1.0 / (4.0 * q**2))
    pole = xi + 1j * omega_d
    residue = pole / (c * (pole - np.conj(pole)))
    return pole, residue


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)
