"""Quantization of the synthesized LC chain and Kerr-parameter extraction.

In the dissipationless limit each RLC stage becomes a harmonic mode with a
zero-point phase fluctuation phi_zpf = (2*pi/Phi0)*sqrt(hbar/(2*omega*C)).
Shunting the chain with a Josephson junction adds the nonlinear energy
E_J*(1 - cos(phi_hat) - phi_hat^2/2), whose quadratic part is already carried
by the linear network. Kerr parameters are computed two independent ways:

* perturbatively, from the normal-ordered quartic term of the cosine
  expansion (number-conserving contributions only), and
* exactly, by dense diagonalization in a truncated Fock product basis with
  the cosine evaluated through the spectral decomposition of phi_hat.

The two routes cross-validate each other; they agree in the weakly
anharmonic regime and separate as phi_zpf grows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from .constants import CODATA, PhysicalConstants
from .synthesis import RLCMode

__all__ = [
    "JunctionParams",
    "QuantizedMode",
    "DispersiveModel",
    "HamiltonianMatrix",
    "QuantizationError",
    "quantize_modes",
    "kerr_perturbative",
    "build_hamiltonian",
    "kerr_exact",
    "annihilation_operator",
    "flux_operator",
    "charge_operator",
    "dispersive_to_dict",
]

#: Largest allowed Fock-product dimension for dense diagonalization.
DEFAULT_DIMENSION_CAP = 4096

_HERMITICITY_RTOL = 1e-12


class QuantizationError(RuntimeError):
    """Hamiltonian construction or spectrum labeling failed."""


class JunctionSource(enum.Enum):
    DIRECT = "direct"
    FROM_CRITICAL_CURRENT = "from_critical_current"


@dataclass(frozen=True)
class JunctionParams:
    """Josephson junction energy scale.

    ``e_j`` is the Josephson energy in joules. When built from a critical
    current the standard relation E_J = Phi0*I_c/(2*pi) applies and the
    source current is retained for reporting.
    """

    e_j: float
    source: JunctionSource = JunctionSource.DIRECT
    i_c: float | None = None

    def __post_init__(self) -> None:
        # e_j = 0 is admitted so the harmonic limit can be exercised directly
        if not (np.isfinite(self.e_j) and self.e_j >= 0):
            raise ValueError("e_j must be finite and non-negative")
        if self.source is JunctionSource.FROM_CRITICAL_CURRENT and self.i_c is None:
            raise ValueError("critical-current junctions must record i_c")

    @classmethod
    def from_energy(cls, e_j: float) -> "JunctionParams":
        return cls(e_j=e_j)

    @classmethod
    def from_critical_current(
        cls, i_c: float, constants: PhysicalConstants = CODATA
    ) -> "JunctionParams":
        if not i_c > 0:
            raise ValueError("critical current must be positive")
        e_j = constants.phi0 * i_c / (2.0 * math.pi)
        return cls(e_j=e_j, source=JunctionSource.FROM_CRITICAL_CURRENT, i_c=i_c)


@dataclass(frozen=True)
class QuantizedMode:
    """Harmonic mode of the dissipationless chain.

    Attributes
    ----------
    omega : float
        Mode frequency, rad/s.
    c : float
        Mode capacitance, farads.
    phi_zpf : float
        Dimensionless zero-point phase fluctuation,
        (2*pi/Phi0)*sqrt(hbar/(2*omega*c)).
    """

    omega: float
    c: float
    phi_zpf: float
    constants: PhysicalConstants = CODATA

    def __post_init__(self) -> None:
        for name in ("omega", "c", "phi_zpf"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite")
        expected = phi_zpf_of(self.omega, self.c, self.constants)
        if abs(self.phi_zpf - expected) > 1e-12 * expected:
            raise ValueError("phi_zpf inconsistent with (2*pi/phi0)*sqrt(hbar/(2*omega*c))")

    @classmethod
    def from_omega_c(
        cls, omega: float, c: float, constants: PhysicalConstants = CODATA
    ) -> "QuantizedMode":
        return cls(omega=omega, c=c, phi_zpf=phi_zpf_of(omega, c, constants),
                   constants=constants)


def phi_zpf_of(omega: float, c: float, constants: PhysicalConstants = CODATA) -> float:
    """Zero-point phase fluctuation of an LC mode."""
    return (2.0 * math.pi / constants.phi0) * math.sqrt(constants.hbar / (2.0 * omega * c))


@dataclass(frozen=True)
class DispersiveModel:
    """Mode frequencies plus self-Kerr and cross-Kerr parameters (hertz).

    ``alpha[i]`` is the self-Kerr of mode i and ``chi[i, j]`` the cross-Kerr
    between modes i and j (symmetric, zero diagonal, reported once per
    unordered pair). ``freqs_hz`` holds the reported transition frequency of
    each mode: the bare omega/(2*pi) for the perturbative route, the dressed
    0->1 transition for the exact route.
    """

    modes: tuple[QuantizedMode, ...]
    freqs_hz: np.ndarray
    alpha: np.ndarray
    chi: np.ndarray

    def __post_init__(self) -> None:
        modes = tuple(self.modes)
        freqs = np.atleast_1d(np.asarray(self.freqs_hz, dtype=float))
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        chi = np.asarray(self.chi, dtype=float)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "chi", chi)
        n = len(modes)
        if alpha.shape != (n,) or freqs.shape != (n,):
            raise ValueError("alpha and freqs_hz must have one entry per mode")
        if chi.shape != (n, n):
            raise ValueError("chi must be a square matrix over the modes")
        if np.any(np.diag(chi) != 0):
            raise ValueError("chi must have a zero diagonal")
        if not np.array_equal(chi, chi.T):
            raise ValueError("chi must be symmetric")


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hamiltonian in the tensor-product Fock basis (joules)."""

    dim: int
    entries: np.ndarray
    mode_truncations: tuple[int, ...]

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        truncations = tuple(int(t) for t in self.mode_truncations)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "mode_truncations", truncations)
        if entries.shape != (self.dim, self.dim):
            raise ValueError("entries must be a dim x dim matrix")
        if self.dim != int(np.prod(truncations)):
            raise ValueError("dim must equal the product of mode_truncations")
        scale = float(np.max(np.abs(entries))) or 1.0
        if float(np.max(np.abs(entries - entries.conj().T))) > _HERMITICITY_RTOL * scale:
            raise ValueError("Hamiltonian matrix must be Hermitian")


# ---------------------------------------------------------------------------
# operators

def annihilation_operator(n_levels: int) -> np.ndarray:
    """Truncated bosonic annihilation operator (n_levels x n_levels)."""
    return np.diag(np.sqrt(np.arange(1, n_levels)), 1)


def flux_operator(mode: QuantizedMode, n_levels: int) -> np.ndarray:
    """Single-mode flux operator sqrt(hbar/(2*omega*C))*(a + a^dag), Wb."""
    a = annihilation_operator(n_levels)
    scale = math.sqrt(mode.constants.hbar / (2.0 * mode.omega * mode.c))
    return scale * (a + a.T)


def charge_operator(mode: QuantizedMode, n_levels: int) -> np.ndarray:
    """Single-mode charge operator -i*sqrt(hbar*omega*C/2)*(a - a^dag), C."""
    a = annihilation_operator(n_levels)
    scale = math.sqrt(mode.constants.hbar * mode.omega * mode.c / 2.0)
    return -1j * scale * (a - a.T)


def _embed(op: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    """Kronecker-embed a single-mode operator at position ``slot``."""
    result = np.array([[1.0]])
    for k, d in enumerate(dims):
        factor = op if k == slot else np.eye(d)
        result = np.kron(result, factor)
    return result


# ---------------------------------------------------------------------------
# quantization chain

def quantize_modes(
    modes: Sequence[RLCMode], constants: PhysicalConstants = CODATA
) -> list[QuantizedMode]:
    """Drop each stage's resistance and quantize the remaining LC oscillators.

    Order is preserved; omega and C carry over unchanged.
    """
    return [QuantizedMode.from_omega_c(m.omega, m.c, constants) for m in modes]


def kerr_perturbative(
    modes: Sequence[QuantizedMode],
    junction: JunctionParams,
    constants: PhysicalConstants = CODATA,
) -> DispersiveModel:
    """Kerr parameters from the quartic term of the cosine expansion.

    Keeping only number-conserving normal-ordered contributions of
    -E_J*phi_hat^4/24 gives

        alpha_i = E_J * phi_zpf_i^4 / (2 h)
        chi_ij  = E_J * phi_zpf_i^2 * phi_zpf_j^2 / h

    both in hertz. Valid only for weak anharmonicity (phi_zpf < 1).
    """
    modes = list(modes)
    phi = np.array([m.phi_zpf for m in modes])
    if np.any(phi >= 1.0):
        raise ValueError(
            "perturbative expansion requires phi_zpf < 1 for every mode; "
            f"got max phi_zpf = {phi.max():.4g}"
        )
    h = constants.h
    alpha = junction.e_j * phi**4 / (2.0 * h)
    chi = junction.e_j * np.outer(phi**2, phi**2) / h
    np.fill_diagonal(chi, 0.0)
    freqs = np.array([m.omega for m in modes]) / (2.0 * math.pi)
    return DispersiveModel(modes=tuple(modes), freqs_hz=freqs, alpha=alpha, chi=chi)


def build_hamiltonian(
    modes: Sequence[QuantizedMode],
    junction: JunctionParams,
    truncations: Sequence[int],
    constants: PhysicalConstants = CODATA,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> HamiltonianMatrix:
    """Assemble H0 + Hnl in the tensor-product Fock basis.

    H0 = sum_i hbar*omega_i a_i^dag a_i (zero-point offsets dropped) and
    Hnl = E_J*(1 - cos(phi_hat) - phi_hat^2/2) with
    phi_hat = sum_i phi_zpf_i (a_i + a_i^dag). The cosine is evaluated
    exactly for the truncated phi_hat through its spectral decomposition.
    """
    modes = list(modes)
    truncations = [int(t) for t in truncations]
    if len(truncations) != len(modes):
        raise ValueError("need one truncation per mode")
    if any(t < 3 for t in truncations):
        raise ValueError("every truncation must be at least 3")
    dim = int(np.prod(truncations))
    if dim > dimension_cap:
        raise ValueError(
            f"Fock-product dimension {dim} exceeds the cap {dimension_cap}"
        )

    h0 = np.zeros((dim, dim))
    phi = np.zeros((dim, dim))
    for k, (mode, n_levels) in enumerate(zip(modes, truncations)):
        a = annihilation_operator(n_levels)
        h0 += constants.hbar * mode.omega * _embed(a.T @ a, k, truncations)
        phi += mode.phi_zpf * _embed(a + a.T, k, truncations)

    # cos(phi_hat) via spectral decomposition: exact for the truncated operator
    eigvals, eigvecs = scipy.linalg.eigh(phi, check_finite=False)
    cos_phi = (eigvecs * np.cos(eigvals)) @ eigvecs.T
    h_nl = junction.e_j * (np.eye(dim) - cos_phi - (phi @ phi) / 2.0)
    total = h0 + h_nl
    # wash out the matrix-product rounding so the stored matrix is exactly symmetric
    total = (total + total.T) / 2.0
    return HamiltonianMatrix(dim=dim, entries=total.astype(complex),
                             mode_truncations=tuple(truncations))


def _label_states(
    eigvecs: np.ndarray,
    bare_indices: Sequence[int],
    dims: Sequence[int],
) -> dict[int, int]:
    """Map each requested bare Fock index to the eigenstate of maximum-modulus
    overlap. Raises if any overlap is ambiguous or two states collide."""
    assignment: dict[int, int] = {}
    for bare in bare_indices:
        overlaps = np.abs(eigvecs[bare, :])
        k = int(np.argmax(overlaps))
        state = tuple(int(n) for n in np.unravel_index(bare, dims))
        if overlaps[k] < 0.5:
            raise QuantizationError(
                f"state labeling ambiguous for bare state {state}: max overlap "
                f"{overlaps[k]:.3f} < 0.5 (increase truncations or reduce phi_zpf)"
            )
        if k in assignment.values():
            raise QuantizationError(
                f"state labeling collision at bare state {state} (degenerate or "
                "strongly hybridized modes; increase truncations or detune)"
            )
        assignment[bare] = k
    return assignment


def kerr_exact(
    hamiltonian: HamiltonianMatrix,
    modes: Sequence[QuantizedMode],
    constants: PhysicalConstants = CODATA,
) -> DispersiveModel:
    """Kerr parameters from the exact spectrum of the truncated Hamiltonian.

    Eigenstates are labeled by maximum-modulus overlap with the bare Fock
    product states; the spectroscopic definitions are

        alpha_i = [(E(1_i) - E(0)) - (E(2_i) - E(1_i))] / h
        chi_ij  = [E(1_i) + E(1_j) - E(1_i 1_j) - E(0)] / h

    A guard band of two levels per mode is required so the extraction never
    touches the top of any truncated ladder.
    """
    modes = list(modes)
    dims = hamiltonian.mode_truncations
    if len(dims) != len(modes):
        raise ValueError("hamiltonian truncations do not match the mode list")
    if any(t < 5 for t in dims):
        raise ValueError(
            "kerr_exact needs truncations >= 5 (levels 0..2 plus a 2-level guard band)"
        )
    n = len(modes)

    matrix = hamiltonian.entries
    if np.max(np.abs(matrix.imag)) == 0.0:
        matrix = matrix.real
    eigvals, eigvecs = scipy.linalg.eigh(matrix, check_finite=False)

    def bare_index(occupation: dict[int, int]) -> int:
        occ = tuple(occupation.get(k, 0) for k in range(n))
        return int(np.ravel_multi_index(occ, dims))

    wanted = {bare_index({})}
    for i in range(n):
        wanted.add(bare_index({i: 1}))
        wanted.add(bare_index({i: 2}))
        for j in range(i + 1, n):
            wanted.add(bare_index({i: 1, j: 1}))
    labels = _label_states(eigvecs, sorted(wanted), dims)

    def energy(occupation: dict[int, int]) -> float:
        return float(eigvals[labels[bare_index(occupation)]])

    h = constants.h
    e_ground = energy({})
    freqs = np.array([(energy({i: 1}) - e_ground) / h for i in range(n)])
    alpha = np.array(
        [(2.0 * energy({i: 1}) - e_ground - energy({i: 2})) / h for i in range(n)]
    )
    chi = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            value = (
                energy({i: 1}) + energy({j: 1}) - energy({i: 1, j: 1}) - e_ground
            ) / h
            chi[i, j] = chi[j, i] = value
    return DispersiveModel(modes=tuple(modes), freqs_hz=freqs, alpha=alpha, chi=chi)


def dispersive_to_dict(
    model: DispersiveModel, junction: JunctionParams, constants: PhysicalConstants = CODATA
) -> dict[str, Any]:
    """JSON-ready form: frequencies in GHz, Kerr parameters in MHz."""
    return {
        "freqs_ghz": [f / 1e9 for f in model.freqs_hz],
        "alpha_mhz": [a / 1e6 for a in model.alpha],
        "chi_mhz": [[v / 1e6 for v in row] for row in model.chi],
        "phi_zpf": [m.phi_zpf for m in model.modes],
        "ej_ghz": junction.e_j / constants.h / 1e9,
    }
