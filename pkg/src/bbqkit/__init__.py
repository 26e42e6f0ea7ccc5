"""bbqkit: black-box quantization of one-port microwave networks.

The toolkit turns sampled one-port frequency responses into quantized
circuit Hamiltonian parameters (mode frequencies, self-Kerr, cross-Kerr)
and simulates the classical dynamics of current-driven Josephson junctions:

* :mod:`bbqkit.network` - response-file parsing and S <-> Z conversion
* :mod:`bbqkit.ratfit` - stable pole-residue vector fitting
* :mod:`bbqkit.synthesis` - pole pairs -> parallel RLC chain
* :mod:`bbqkit.quantize` - LC quantization, Kerr extraction (perturbative
  and by exact diagonalization)
* :mod:`bbqkit.rcsj` - junction phase dynamics and hysteretic IV sweeps
* :mod:`bbqkit.cli` - the ``bbqkit`` command-line pipeline
"""

from .constants import CODATA, PhysicalConstants
from .network import (
    ConversionError,
    FrequencyResponse,
    ParseError,
    ResponseKind,
    parse_response,
    s_to_z,
    z_to_s,
)
from .quantize import (
    DispersiveModel,
    HamiltonianMatrix,
    JunctionParams,
    QuantizationError,
    QuantizedMode,
    build_hamiltonian,
    kerr_exact,
    kerr_perturbative,
    quantize_modes,
)
from .ratfit import (
    EvaluationError,
    FitError,
    FitReport,
    RationalModel,
    VectorFitter,
    evaluate_model,
    fit_impedance,
    transfer_function,
)
from .rcsj import (
    Branch,
    IVCurve,
    PhaseState,
    RcsjParams,
    SimulationError,
    Trajectory,
    integrate,
    iv_sweep,
    junction_conductance,
)
from .synthesis import (
    RLCMode,
    SynthesisError,
    chain_impedance,
    mode_impedance,
    synthesize_modes,
)

__version__ = "0.1.0"

__all__ = [
    "CODATA",
    "PhysicalConstants",
    "FrequencyResponse",
    "ResponseKind",
    "ParseError",
    "ConversionError",
    "parse_response",
    "s_to_z",
    "z_to_s",
    "RationalModel",
    "FitReport",
    "FitError",
    "EvaluationError",
    "VectorFitter",
    "fit_impedance",
    "evaluate_model",
    "transfer_function",
    "RLCMode",
    "SynthesisError",
    "synthesize_modes",
    "mode_impedance",
    "chain_impedance",
    "JunctionParams",
    "QuantizedMode",
    "DispersiveModel",
    "HamiltonianMatrix",
    "QuantizationError",
    "quantize_modes",
    "kerr_perturbative",
    "build_hamiltonian",
    "kerr_exact",
    "RcsjParams",
    "PhaseState",
    "Trajectory",
    "Branch",
    "IVCurve",
    "SimulationError",
    "junction_conductance",
    "integrate",
    "iv_sweep",
    "__version__",
]
