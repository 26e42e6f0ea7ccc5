"""Stable pole-residue rational fitting of sampled impedance data.

The fitter approximates Z(s) on the imaginary axis s = j*2*pi*f by

    Z(s) = sum_k r_k / (s - s_k) + d + e*s

with complex-conjugate pole/residue pairs, a real constant term d and a real
slope term e. Poles are located by the classic two-stage relocating
least-squares scheme: each iteration solves one linear system for the
residues of the target and of an auxiliary scaling function sharing the same
pole set, then moves the poles to the zeros of the scaling function (an
eigenvalue problem). Poles that land in the right half-plane are reflected
back to keep every iterate stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .network import FrequencyResponse, ResponseKind

__all__ = [
    "RationalModel",
    "FitReport",
    "FitError",
    "EvaluationError",
    "VectorFitter",
    "fit_impedance",
    "evaluate_model",
    "transfer_function",
    "model_to_dict",
    "model_from_dict",
]

TWO_PI = 2.0 * np.pi

#: Relative tolerance used when checking conjugate pairing of deserialized models.
_PAIRING_RTOL = 1e-9


class FitError(RuntimeError):
    """Vector fit failed mid-iteration (singular system or non-finite values)."""


class EvaluationError(ValueError):
    """Model evaluated too close to one of its own poles."""


@dataclass(frozen=True)
class RationalModel:
    """Pole-residue impedance model: poles in rad/s, residues in ohm*rad/s.

    Complex poles appear together with their conjugates (adjacent entries,
    the Im > 0 member first) and the paired residues are conjugate as well,
    so the model evaluates to a conjugate-symmetric (real impulse response)
    impedance. ``const_term`` is in ohms, ``slope_term`` in ohm*s.
    """

    poles: np.ndarray
    residues: np.ndarray
    const_term: float = 0.0
    slope_term: float = 0.0

    def __post_init__(self) -> None:
        poles = np.atleast_1d(np.asarray(self.poles, dtype=complex))
        residues = np.atleast_1d(np.asarray(self.residues, dtype=complex))
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        if poles.shape != residues.shape or poles.ndim != 1:
            raise ValueError("poles and residues must be 1-D arrays of equal length")
        if poles.size and (not np.all(np.isfinite(poles)) or not np.all(np.isfinite(residues))):
            raise ValueError("poles and residues must be finite")
        if not (np.isfinite(self.const_term) and np.isfinite(self.slope_term)):
            raise ValueError("const_term and slope_term must be finite")
        if np.any(poles.real >= 0):
            raise ValueError("all poles must lie in the open left half-plane")
        self._check_pairing(poles, residues)

    @staticmethod
    def _check_pairing(poles: np.ndarray, residues: np.ndarray) -> None:
        unmatched = list(range(len(poles)))
        while unmatched:
            i = unmatched.pop(0)
            if poles[i].imag == 0:
                continue
            scale = abs(poles[i])
            for j in unmatched:
                if abs(poles[j] - poles[i].conjugate()) <= _PAIRING_RTOL * scale:
                    rscale = max(abs(residues[i]), 1.0)
                    if abs(residues[j] - residues[i].conjugate()) > _PAIRING_RTOL * rscale:
                        raise ValueError(
                            f"residues of conjugate pole pair at {poles[i]:.6g} are not conjugate"
                        )
                    unmatched.remove(j)
                    break
            else:
                raise ValueError(f"complex pole {poles[i]:.6g} lacks its conjugate partner")

    @property
    def n_pole_pairs(self) -> int:
        return int(np.sum(self.poles.imag > 0))


@dataclass(frozen=True)
class FitReport:
    """Outcome of one vector-fit run.

    ``rms_error`` is in ohms over the training samples, ``max_rel_error`` is
    dimensionless, ``converged`` flags whether the relative pole displacement
    between the last two iterations fell below the requested tolerance.
    ``rms_history`` holds the rms error after each iteration's residue fit.
    """

    iterations: int
    rms_error: float
    max_rel_error: float
    converged: bool
    rms_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.rms_error < 0 or self.max_rel_error < 0:
            raise ValueError("error measures must be non-negative")


# ---------------------------------------------------------------------------
# internal linear-algebra helpers (all work on normalized s = j*omega)

def _initial_poles(omega: np.ndarray, n_pairs: int) -> np.ndarray:
    """Starting pole pairs: imaginary parts log-spaced across the interior of
    the band, real parts -omega/100 (starting quality factor of 50).
    Returns one representative per pair (Im > 0)."""
    interior = np.geomspace(omega[0], omega[-1], n_pairs + 2)[1:-1]
    return np.array([-w / 100.0 + 1j * w for w in interior])


def _basis(s: np.ndarray, poles: np.ndarray) -> tuple[np.ndarray, list[bool]]:
    """Partial-fraction basis columns for representative poles.

    Complex representatives contribute two real-parameter columns
    (1/(s-p) + 1/(s-p*) and j/(s-p) - j/(s-p*)); real poles one column.
    Returns the complex matrix and a per-pole "is complex" list.
    """
    cols = []
    is_complex = []
    for p in poles:
        if p.imag != 0:
            term = 1.0 / (s - p)
            conj_term = 1.0 / (s - p.conjugate())
            cols.append(term + conj_term)
            cols.append(1j * term - 1j * conj_term)
            is_complex.append(True)
        else:
            cols.append(1.0 / (s - p.real))
            is_complex.append(False)
    return np.array(cols).T, is_complex


def _lstsq(a: np.ndarray, b: np.ndarray, iteration: int) -> np.ndarray:
    try:
        x, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"least-squares system failed at iteration {iteration}: {exc}") from exc
    if rank == 0:
        raise FitError(f"rank-deficient least-squares system at iteration {iteration}")
    if not np.all(np.isfinite(x)):
        raise FitError(f"non-finite least-squares solution at iteration {iteration}")
    return x


def _relocate(
    s: np.ndarray,
    z: np.ndarray,
    poles: np.ndarray,
    weights: np.ndarray,
    include_const: bool,
    include_slope: bool,
    iteration: int,
) -> np.ndarray:
    basis, is_complex = _basis(s, poles)
    blocks = [basis]
    if include_const:
        blocks.append(np.ones((len(s), 1)))
    if include_slope:
        blocks.append(s[:, None])
    blocks.append(-z[:, None] * basis)
    a = np.hstack(blocks) * weights[:, None]
    rhs = z * weights
    a_ri = np.vstack([a.real, a.imag])
    b_ri = np.concatenate([rhs.real, rhs.imag])
    x = _lstsq(a_ri, b_ri, iteration)
    sigma_res = x[-basis.shape[1]:]

    # Zeros of sigma(s) = 1 + sum c~_k/(s - p_k): eigenvalues of A - b*c~^T
    # in the real block representation of the pole set.
    n = basis.shape[1]
    amat = np.zeros((n, n))
    bvec = np.zeros(n)
    i = 0
    for p, cplx in zip(poles, is_complex):
        if cplx:
            amat[i, i] = amat[i + 1, i + 1] = p.real
            amat[i, i + 1] = p.imag
            amat[i + 1, i] = -p.imag
            bvec[i] = 2.0
            i += 2
        else:
            amat[i, i] = p.real
            bvec[i] = 1.0
            i += 1
    try:
        eig = np.linalg.eigvals(amat - np.outer(bvec, sigma_res))
    except np.linalg.LinAlgError as exc:
        raise FitError(f"pole relocation failed at iteration {iteration}: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise FitError(f"non-finite relocated poles at iteration {iteration}")
    new = eig[eig.imag >= 0]
    # reflect unstable poles into the left half-plane
    new = np.where(new.real > 0, -new.real + 1j * new.imag, new)
    # guard against poles pinned on the imaginary axis
    new = np.where(new.real == 0, new - 1e-12 * np.abs(new), new)
    order = np.lexsort((new.real, np.abs(new.imag)))
    return new[order]


def _fit_residues(
    s: np.ndarray,
    z: np.ndarray,
    poles: np.ndarray,
    weights: np.ndarray,
    include_const: bool,
    include_slope: bool,
    iteration: int,
) -> tuple[np.ndarray, float, float]:
    basis, is_complex = _basis(s, poles)
    blocks = [basis]
    if include_const:
        blocks.append(np.ones((len(s), 1)))
    if include_slope:
        blocks.append(s[:, None])
    a = np.hstack(blocks) * weights[:, None]
    rhs = z * weights
    a_ri = np.vstack([a.real, a.imag])
    b_ri = np.concatenate([rhs.real, rhs.imag])
    x = _lstsq(a_ri, b_ri, iteration)
    residues = []
    i = 0
    for cplx in is_complex:
        if cplx:
            residues.append(x[i] + 1j * x[i + 1])
            i += 2
        else:
            residues.append(complex(x[i]))
            i += 1
    d = float(x[i]) if include_const else 0.0
    i += int(include_const)
    e = float(x[i]) if include_slope else 0.0
    return np.array(residues), d, e


def _expand_pairs(rep_poles: np.ndarray, rep_residues: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Expand representative poles to the full list with explicit conjugates."""
    poles = []
    residues = []
    for p, r in zip(rep_poles, rep_residues):
        if p.imag != 0:
            poles.extend([p, p.conjugate()])
            residues.extend([r, r.conjugate()])
        else:
            poles.append(p)
            residues.append(complex(r.real))
    return np.array(poles), np.array(residues)


def _pair_evaluate(s: np.ndarray | complex, poles: np.ndarray, residues: np.ndarray,
                   d: float, e: float) -> np.ndarray | complex:
    z = d + e * s
    for p, r in zip(poles, residues):
        z = z + r / (s - p)
    return z


class VectorFitter:
    """Iterative relocating least-squares fitter with an estimator interface.

    Follows the scikit-learn parameter conventions: hyperparameters are
    stored verbatim by ``__init__``, :meth:`fit` learns the model and returns
    ``self``, fitted results live in trailing-underscore attributes, and
    :meth:`get_params`/:meth:`set_params` make the object clonable and
    grid-searchable without importing scikit-learn.

    Parameters
    ----------
    n_pole_pairs : int
        Number of complex-conjugate pole pairs to fit.
    max_iters : int
        Maximum pole-relocation iterations.
    pole_move_tol : float
        Convergence threshold on the relative pole displacement between
        successive iterations.
    include_const : bool
        Fit the constant (ohm) term.
    include_slope : bool
        Fit the term proportional to s.
    weighting : {"uniform", "inverse_magnitude"}
        Row weighting of the least-squares system. Inverse-magnitude helps
        data spanning many decades.

    Attributes
    ----------
    model_ : RationalModel
        Fitted pole-residue model (set by :meth:`fit`).
    report_ : FitReport
        Convergence and error summary (set by :meth:`fit`).
    """

    def __init__(
        self,
        n_pole_pairs: int = 1,
        max_iters: int = 20,
        pole_move_tol: float = 1e-8,
        include_const: bool = True,
        include_slope: bool = False,
        weighting: str = "uniform",
    ):
        self.n_pole_pairs = n_pole_pairs
        self.max_iters = max_iters
        self.pole_move_tol = pole_move_tol
        self.include_const = include_const
        self.include_slope = include_slope
        self.weighting = weighting

    # -- scikit-learn estimator plumbing ------------------------------------
    _param_names = (
        "n_pole_pairs",
        "max_iters",
        "pole_move_tol",
        "include_const",
        "include_slope",
        "weighting",
    )

    def get_params(self, deep: bool = True) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params: Any) -> "VectorFitter":
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r} for VectorFitter")
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"VectorFitter({args})"

    # -- fitting -------------------------------------------------------------
    def _validate(self, freq_hz: np.ndarray, z_ohm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        freq = np.asarray(freq_hz, dtype=float).ravel()
        z = np.asarray(z_ohm, dtype=complex).ravel()
        if freq.shape != z.shape:
            raise ValueError("freq_hz and z_ohm must have the same length")
        if not np.all(np.isfinite(freq)) or not np.all(np.isfinite(z)):
            raise ValueError("input samples must be finite")
        if freq.size and (freq[0] <= 0 or np.any(np.diff(freq) <= 0)):
            raise ValueError("frequencies must be strictly increasing and positive")
        if not isinstance(self.n_pole_pairs, (int, np.integer)) or self.n_pole_pairs < 1:
            raise ValueError("n_pole_pairs must be a positive integer")
        needed = 2 * (2 * self.n_pole_pairs + 2)
        if freq.size < needed:
            raise ValueError(
                f"insufficient samples: need at least {needed} for "
                f"{self.n_pole_pairs} pole pairs, got {freq.size}"
            )
        if self.weighting not in ("uniform", "inverse_magnitude"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        return freq, z

    def fit(self, freq_hz: Sequence[float] | np.ndarray, z_ohm: Sequence[complex] | np.ndarray) -> "VectorFitter":
        """Fit the pole-residue model to impedance samples ``z_ohm(freq_hz)``."""
        freq, z = self._validate(freq_hz, z_ohm)
        omega = TWO_PI * freq

        # normalize for conditioning: frequency by the geometric band mean,
        # impedance by its median magnitude
        w_scale = float(np.exp(np.mean(np.log(omega))))
        z_scale = float(np.median(np.abs(z)))
        if z_scale == 0.0:
            z_scale = 1.0
        s = 1j * omega / w_scale
        zn = z / z_scale

        if self.weighting == "inverse_magnitude":
            weights = 1.0 / np.maximum(np.abs(zn), 1e-12)
        else:
            weights = np.ones_like(zn, dtype=float)

        poles = _initial_poles(omega / w_scale, self.n_pole_pairs)
        converged = False
        iterations = 0
        rms_history: list[float] = []
        residues = np.zeros(0, dtype=complex)
        d = e = 0.0
        for it in range(1, self.max_iters + 1):
            iterations = it
            new_poles = _relocate(
                s, zn, poles, weights, self.include_const, self.include_slope, it
            )
            move = float(np.max(np.abs(new_poles - poles) / np.abs(poles)))
            poles = new_poles
            residues, d, e = _fit_residues(
                s, zn, poles, weights, self.include_const, self.include_slope, it
            )
            resid = _pair_evaluate(s, *_expand_pairs(poles, residues), d, e) - zn
            rms_history.append(float(np.sqrt(np.mean(np.abs(resid) ** 2))) * z_scale)
            if move < self.pole_move_tol:
                converged = True
                break

        full_poles, full_residues = _expand_pairs(poles, residues)
        full_poles = full_poles * w_scale
        full_residues = full_residues * w_scale * z_scale
        d = d * z_scale
        e = e * z_scale / w_scale

        model = RationalModel(full_poles, full_residues, d, e)
        z_fit = evaluate_model(model, freq)
        err = z_fit - z
        rms = float(np.sqrt(np.mean(np.abs(err) ** 2)))
        denom = np.maximum(np.abs(z), 1e-300)
        max_rel = float(np.max(np.abs(err) / denom))
        self.model_ = model
        self.report_ = FitReport(
            iterations=iterations,
            rms_error=rms,
            max_rel_error=max_rel,
            converged=converged,
            rms_history=tuple(rms_history),
        )
        return self

    def predict(self, freq_hz: Sequence[float] | np.ndarray) -> np.ndarray:
        """Evaluate the fitted model at the given frequencies (ohms)."""
        if not hasattr(self, "model_"):
            raise RuntimeError("VectorFitter instance is not fitted yet; call fit() first")
        return evaluate_model(self.model_, freq_hz)


def fit_impedance(
    data: FrequencyResponse,
    n_pole_pairs: int,
    *,
    max_iters: int = 20,
    pole_move_tol: float = 1e-8,
    include_const: bool = True,
    include_slope: bool = False,
    weighting: str = "uniform",
) -> tuple[RationalModel, FitReport]:
    """Fit a :class:`FrequencyResponse` holding impedance data.

    Thin wrapper over :class:`VectorFitter` for the pipeline-facing surface.
    """
    if data.kind is not ResponseKind.IMPEDANCE:
        raise ValueError("fit_impedance expects impedance data (convert scattering first)")
    fitter = VectorFitter(
        n_pole_pairs=n_pole_pairs,
        max_iters=max_iters,
        pole_move_tol=pole_move_tol,
        include_const=include_const,
        include_slope=include_slope,
        weighting=weighting,
    ).fit(data.freq_hz, data.values)
    return fitter.model_, fitter.report_


def transfer_function(model: RationalModel, s: np.ndarray | complex) -> np.ndarray | complex:
    """Evaluate the model at arbitrary complex frequencies s (rad/s)."""
    return _pair_evaluate(s, model.poles, model.residues, model.const_term, model.slope_term)


def evaluate_model(model: RationalModel, freq_hz: Sequence[float] | np.ndarray) -> np.ndarray:
    """Evaluate Z(j*2*pi*f) for each frequency in hertz.

    Raises
    ------
    EvaluationError
        If a requested point falls within the machine-scale floor of a pole.
    """
    freq = np.atleast_1d(np.asarray(freq_hz, dtype=float))
    if np.any(~np.isfinite(freq)) or np.any(freq <= 0):
        raise ValueError("frequencies must be positive and finite")
    s = 1j * TWO_PI * freq
    if model.poles.size:
        dist = np.abs(s[:, None] - model.poles[None, :])
        floor = 64.0 * np.finfo(float).eps * np.maximum(np.abs(s)[:, None], np.abs(model.poles)[None, :])
        hit = dist <= floor
        if np.any(hit):
            f_bad = freq[np.any(hit, axis=1)][0]
            raise EvaluationError(f"evaluation at {f_bad:.6g} Hz coincides with a model pole")
    return np.asarray(_pair_evaluate(s, model.poles, model.residues,
                                     model.const_term, model.slope_term))


# ---------------------------------------------------------------------------
# serialization (JSON document with split real/imaginary arrays)

def model_to_dict(model: RationalModel) -> dict[str, Any]:
    return {
        "poles_re": [float(p.real) for p in model.poles],
        "poles_im": [float(p.imag) for p in model.poles],
        "residues_re": [float(r.real) for r in model.residues],
        "residues_im": [float(r.imag) for r in model.residues],
        "d_ohm": float(model.const_term),
        "slope_ohm_s": float(model.slope_term),
    }


def model_from_dict(doc: dict[str, Any]) -> RationalModel:
    poles = np.array(doc["poles_re"], dtype=float) + 1j * np.array(doc["poles_im"], dtype=float)
    residues = np.array(doc["residues_re"], dtype=float) + 1j * np.array(doc["residues_im"], dtype=float)
    return RationalModel(poles, residues, float(doc["d_ohm"]), float(doc["slope_ohm_s"]))
