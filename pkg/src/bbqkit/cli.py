"""Command-line pipeline: parse -> convert -> fit -> synthesize -> quantize,
plus the junction IV simulator.

Subcommands
-----------
fit       Fit a rational impedance model to a response file.
quantize  Synthesize RLC modes from a fitted model and compute Kerr parameters.
rcsj      Sweep a junction IV curve (or trace a single bias point).
pipeline  Run the whole chain and emit every artifact.

Exit codes: 0 success, 2 config error, 3 parse error, 4 fit non-convergence,
5 synthesis error, 6 quantization error, 7 simulation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from ._serialize import canonical_json, csv_rows
from .constants import CODATA
from .network import ConversionError, ParseError, ResponseKind, parse_response, s_to_z
from .quantize import (
    JunctionParams,
    QuantizationError,
    build_hamiltonian,
    dispersive_to_dict,
    kerr_exact,
    kerr_perturbative,
    quantize_modes,
)
from .ratfit import FitError, evaluate_model, fit_impedance, model_to_dict
from .rcsj import RcsjParams, SimulationError, integrate, iv_sweep, PhaseState
from .synthesis import SynthesisError, modes_to_dicts, synthesize_modes

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_FIT = 4
EXIT_SYNTH = 5
EXIT_QUANT = 6
EXIT_SIM = 7


class ConfigError(ValueError):
    pass


class StageFailure(Exception):
    """Wraps a module error with its pipeline stage name and exit code."""

    def __init__(self, stage: str, code: int, cause: Exception):
        self.stage = stage
        self.code = code
        super().__init__(f"{stage}: {cause}")


@dataclass
class RunConfig:
    """Flattened pipeline configuration (flags override config-file values)."""

    input_path: str = ""
    input_format: str = "touchstone"
    ref_impedance_ohm: float | None = None
    n_pole_pairs: int = 1
    max_iters: int = 20
    tol: float = 1e-8
    include_const: bool = True
    include_slope: bool = False
    e_j_ghz: float | None = None
    i_c_ua: float | None = None
    truncations: str = "10"
    out_dir: str = "out"

    def validate(self, need_junction: bool) -> None:
        if not self.input_path:
            raise ConfigError("input path must not be empty")
        if not self.out_dir:
            raise ConfigError("output directory must not be empty")
        if need_junction:
            given = (self.e_j_ghz is not None) + (self.i_c_ua is not None)
            if given != 1:
                raise ConfigError(
                    "exactly one of --e-j-ghz / --i-c-ua must be set for quantization runs"
                )
        if self.n_pole_pairs < 1:
            raise ConfigError("n_pole_pairs must be at least 1")

    def junction(self) -> JunctionParams:
        if self.e_j_ghz is not None:
            return JunctionParams.from_energy(self.e_j_ghz * 1e9 * CODATA.h)
        return JunctionParams.from_critical_current(self.i_c_ua * 1e-6)

    def truncation_list(self, n_modes: int) -> list[int]:
        parts = [int(p) for p in str(self.truncations).split(",") if p.strip()]
        if len(parts) == 1:
            return parts * n_modes
        if len(parts) != n_modes:
            raise ConfigError(
                f"{len(parts)} truncations given for {n_modes} modes"
            )
        return parts


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_CONFIG_PARSERS = {
    "input_path": str,
    "input_format": str,
    "ref_impedance_ohm": float,
    "n_pole_pairs": int,
    "max_iters": int,
    "tol": float,
    "include_const": lambda s: s.lower() in ("1", "true", "yes"),
    "include_slope": lambda s: s.lower() in ("1", "true", "yes"),
    "e_j_ghz": float,
    "i_c_ua": float,
    "truncations": str,
    "out_dir": str,
}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        raw = _read_config_file(args.config)
        for key, text in raw.items():
            if key not in _CONFIG_PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(config, key, _CONFIG_PARSERS[key](text))
    for field in fields(RunConfig):
        value = getattr(args, field.name, None)
        if value is not None:
            setattr(config, field.name, value)
    return config


# ---------------------------------------------------------------------------
# stages

def _load_impedance(config: RunConfig):
    try:
        text = Path(config.input_path).read_text()
    except OSError as exc:
        raise StageFailure("parse", EXIT_PARSE, exc) from exc
    try:
        resp = parse_response(text, config.input_format, config.ref_impedance_ohm)
        if resp.kind is ResponseKind.SCATTERING:
            resp = s_to_z(resp)
    except (ParseError, ConversionError) as exc:
        raise StageFailure("parse", EXIT_PARSE, exc) from exc
    return resp


def _fit_stage(config: RunConfig, resp):
    try:
        model, report = fit_impedance(
            resp,
            config.n_pole_pairs,
            max_iters=config.max_iters,
            pole_move_tol=config.tol,
            include_const=config.include_const,
            include_slope=config.include_slope,
        )
    except (FitError, ValueError) as exc:
        raise StageFailure("fit", EXIT_FIT, exc) from exc
    if not report.converged:
        raise StageFailure(
            "fit", EXIT_FIT,
            RuntimeError(f"fit did not converge within {report.iterations} iterations"),
        )
    return model, report


def _synthesis_stage(model):
    try:
        return synthesize_modes(model)
    except SynthesisError as exc:
        raise StageFailure("synthesis", EXIT_SYNTH, exc) from exc


def _quantize_stage(config: RunConfig, modes):
    try:
        junction = config.junction()
        qmodes = quantize_modes(modes)
        truncations = config.truncation_list(len(qmodes))
        perturbative = kerr_perturbative(qmodes, junction)
        hamiltonian = build_hamiltonian(qmodes, junction, truncations)
        exact = kerr_exact(hamiltonian, qmodes)
    except ConfigError:
        raise
    except (QuantizationError, ValueError) as exc:
        raise StageFailure("quantize", EXIT_QUANT, exc) from exc

    pert_doc = dispersive_to_dict(perturbative, junction)
    exact_doc = dispersive_to_dict(exact, junction)
    deviation = {
        "alpha": [
            abs(ae - ap) / abs(ae) if ae != 0 else 0.0
            for ae, ap in zip(exact.alpha, perturbative.alpha)
        ],
        "chi": [
            [
                abs(ce - cp) / abs(ce) if ce != 0 else 0.0
                for ce, cp in zip(row_e, row_p)
            ]
            for row_e, row_p in zip(exact.chi, perturbative.chi)
        ],
    }
    return {
        "perturbative": pert_doc,
        "exact": exact_doc,
        "relative_deviation": deviation,
    }


def _fit_artifacts(resp, model, report) -> dict[str, str]:
    z_fit = evaluate_model(model, resp.freq_hz)
    compare = csv_rows(
        ["freq_hz", "z_abs_data_ohm", "z_abs_fit_ohm"],
        [
            [float(f), float(abs(zd)), float(abs(zf))]
            for f, zd, zf in zip(resp.freq_hz, resp.values, z_fit)
        ],
    )
    report_doc = {
        "iterations": report.iterations,
        "rms_error_ohm": report.rms_error,
        "max_rel_error": report.max_rel_error,
        "converged": report.converged,
    }
    return {
        "model.json": canonical_json(model_to_dict(model)),
        "fit_report.json": canonical_json(report_doc),
        "impedance_compare.csv": compare,
    }


def _write_artifacts(out_dir: str, artifacts: dict[str, str]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in artifacts.items():
        (out / name).write_text(content)


# ---------------------------------------------------------------------------
# subcommand drivers (compute everything, then write, so failures leave no
# partial outputs)

def run_fit(config: RunConfig) -> None:
    config.validate(need_junction=False)
    resp = _load_impedance(config)
    model, report = _fit_stage(config, resp)
    _write_artifacts(config.out_dir, _fit_artifacts(resp, model, report))


def run_quantize(config: RunConfig, model_path: str) -> None:
    config.validate(need_junction=True)
    try:
        from .ratfit import model_from_dict

        model = model_from_dict(json.loads(Path(model_path).read_text()))
    except (OSError, ValueError, KeyError) as exc:
        raise StageFailure("parse", EXIT_PARSE, exc) from exc
    modes = _synthesis_stage(model)
    dispersive = _quantize_stage(config, modes)
    _write_artifacts(
        config.out_dir,
        {
            "modes.json": canonical_json(modes_to_dicts(modes)),
            "dispersive.json": canonical_json(dispersive),
        },
    )


def run_pipeline(config: RunConfig) -> None:
    config.validate(need_junction=True)
    resp = _load_impedance(config)
    model, report = _fit_stage(config, resp)
    modes = _synthesis_stage(model)
    dispersive = _quantize_stage(config, modes)
    artifacts = _fit_artifacts(resp, model, report)
    artifacts["modes.json"] = canonical_json(modes_to_dicts(modes))
    artifacts["dispersive.json"] = canonical_json(dispersive)
    _write_artifacts(config.out_dir, artifacts)


def run_pipeline_one(args: tuple) -> tuple[str, int, str]:
    """Worker for --jobs: returns (input, exit code, message)."""
    config_values, input_path = args
    config = RunConfig(**config_values)
    config.input_path = input_path
    config.out_dir = str(Path(config.out_dir) / Path(input_path).stem)
    try:
        run_pipeline(config)
    except StageFailure as exc:
        return input_path, exc.code, str(exc)
    except ConfigError as exc:
        return input_path, EXIT_CONFIG, str(exc)
    return input_path, EXIT_OK, "ok"


def run_rcsj(args: argparse.Namespace) -> None:
    try:
        params = RcsjParams(
            i_c=args.i_c_ua * 1e-6,
            r_n=args.r_n_ohm,
            c_j=args.c_j_ff * 1e-15,
            delta0=args.delta0_uev * 1e-6 * CODATA.e_charge,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out_dir)
    try:
        if args.trace:
            omega_p = params.plasma_frequency()
            t_end = args.periods * 2.0 * math.pi / omega_p
            traj = integrate(
                params,
                args.i_drive_ratio * params.i_c,
                PhaseState(phi=0.0, dphi_dt=0.0, time=0.0),
                t_end,
                tol=args.tol,
            )
            content = csv_rows(
                ["t_s", "phi_rad", "v_volt"],
                [
                    [float(t), float(p), float(v)]
                    for t, p, v in zip(traj.time_s, traj.phi_rad, traj.voltage_v)
                ],
            )
            out.mkdir(parents=True, exist_ok=True)
            (out / "trace.csv").write_text(content)
        else:
            up, down = iv_sweep(
                params,
                i_max=args.i_max_ratio * params.i_c,
                n_points=args.n_points,
                settle_periods=args.settle_periods,
                average_periods=args.average_periods,
                tol=args.tol,
            )
            rows = []
            for curve in (up, down):
                for i_amp, v_volt in zip(curve.i_amp, curve.v_volt):
                    rows.append([curve.branch.value, float(i_amp), float(v_volt)])
            out.mkdir(parents=True, exist_ok=True)
            (out / "iv.csv").write_text(csv_rows(["branch", "i_amp", "v_volt"], rows))
    except (SimulationError, ValueError) as exc:
        raise StageFailure("simulate", EXIT_SIM, exc) from exc


# ---------------------------------------------------------------------------
# argument parsing

def _add_fit_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--input", dest="input_path", help="response file to read")
    p.add_argument("--format", dest="input_format", choices=["touchstone", "csv"],
                   help="input format (default touchstone)")
    p.add_argument("--ref-impedance-ohm", dest="ref_impedance_ohm", type=float,
                   help="reference impedance for scattering data")
    p.add_argument("--n-pole-pairs", dest="n_pole_pairs", type=int,
                   help="number of conjugate pole pairs to fit")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", dest="tol", type=float,
                   help="pole relocation convergence tolerance")
    p.add_argument("--include-const", dest="include_const", action="store_true",
                   default=None)
    p.add_argument("--no-include-const", dest="include_const", action="store_false")
    p.add_argument("--include-slope", dest="include_slope", action="store_true",
                   default=None)
    p.add_argument("--no-include-slope", dest="include_slope", action="store_false")
    p.add_argument("--out", dest="out_dir", help="output directory")


def _add_junction_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--e-j-ghz", dest="e_j_ghz", type=float,
                   help="Josephson energy as E_J/h in GHz")
    p.add_argument("--i-c-ua", dest="i_c_ua", type=float,
                   help="junction critical current in microamperes")
    p.add_argument("--truncations", dest="truncations",
                   help="Fock levels per mode, e.g. '12' or '12,8'")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbqkit",
        description="Black-box quantization of one-port responses and junction IV simulation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a rational impedance model")
    _add_fit_options(p_fit)

    p_quant = sub.add_parser("quantize", help="quantize a fitted model")
    p_quant.add_argument("--config", help="key = value config file; flags override it")
    p_quant.add_argument("--model", required=True, help="model.json from a fit run")
    _add_junction_options(p_quant)
    p_quant.add_argument("--out", dest="out_dir", help="output directory")

    p_rcsj = sub.add_parser("rcsj", help="sweep a junction IV curve")
    p_rcsj.add_argument("--i-c-ua", type=float, required=True, dest="i_c_ua")
    p_rcsj.add_argument("--r-n-ohm", type=float, required=True, dest="r_n_ohm")
    p_rcsj.add_argument("--c-j-ff", type=float, required=True, dest="c_j_ff")
    p_rcsj.add_argument("--delta0-uev", type=float, required=True, dest="delta0_uev",
                        help="zero-temperature gap in microelectronvolts")
    p_rcsj.add_argument("--i-max-ratio", type=float, default=2.0, dest="i_max_ratio",
                        help="sweep maximum as a multiple of I_c")
    p_rcsj.add_argument("--n-points", type=int, default=100, dest="n_points")
    p_rcsj.add_argument("--settle-periods", type=int, default=50, dest="settle_periods")
    p_rcsj.add_argument("--average-periods", type=int, default=200, dest="average_periods")
    p_rcsj.add_argument("--tol", type=float, default=1e-8)
    p_rcsj.add_argument("--trace", action="store_true",
                        help="write a single-bias trajectory instead of the sweep")
    p_rcsj.add_argument("--i-drive-ratio", type=float, default=0.5, dest="i_drive_ratio",
                        help="dc bias (units of I_c) for --trace")
    p_rcsj.add_argument("--periods", type=float, default=50.0,
                        help="plasma periods to trace")
    p_rcsj.add_argument("--out", dest="out_dir", default="out")

    p_pipe = sub.add_parser("pipeline", help="run the full chain")
    _add_fit_options(p_pipe)
    _add_junction_options(p_pipe)
    p_pipe.add_argument("inputs", nargs="*",
                        help="response files (alternative to --input; enables --jobs)")
    p_pipe.add_argument("--jobs", type=int, default=1,
                        help="parallel workers across multiple input files")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rcsj":
            run_rcsj(args)
            return EXIT_OK

        config = build_run_config(args)
        if args.command == "fit":
            run_fit(config)
        elif args.command == "quantize":
            config.input_path = args.model  # only used by validate()
            run_quantize(config, args.model)
        elif args.command == "pipeline":
            inputs = list(args.inputs)
            if config.input_path and not inputs:
                inputs = [config.input_path]
            if not inputs:
                raise ConfigError("no input files given")
            if len(inputs) == 1:
                config.input_path = inputs[0]
                run_pipeline(config)
            else:
                config_values = {
                    f.name: getattr(config, f.name) for f in fields(RunConfig)
                }
                tasks = [(config_values, path) for path in inputs]
                worst = EXIT_OK
                if args.jobs > 1:
                    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                        results = list(pool.map(run_pipeline_one, tasks))
                else:
                    results = [run_pipeline_one(t) for t in tasks]
                for path, code, message in results:
                    if code != EXIT_OK:
                        print(f"error: {path}: {message}", file=sys.stderr)
                        worst = max(worst, code)
                return worst
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
