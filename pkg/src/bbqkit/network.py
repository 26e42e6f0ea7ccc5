"""One-port frequency-response ingestion and scattering/impedance conversion.

Supported input formats (documented in the README):

* Touchstone subset, single port: ``!``-prefixed comment lines, exactly one
  option line ``# <HZ|KHZ|MHZ|GHZ> <S|Z> RI R <ref>``, then data rows
  ``<freq> <re> <im>`` (whitespace separated, real/imaginary only).
* CSV with header ``freq_hz,re,im`` followed by numeric rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import IO, Union

import numpy as np

__all__ = [
    "ResponseKind",
    "FrequencyResponse",
    "ParseError",
    "ConversionError",
    "parse_response",
    "s_to_z",
    "z_to_s",
]

#: |1 - S| (or its impedance-side analogue) below this is treated as the
#: open-circuit singularity of the bilinear map.
SINGULARITY_TOL = 1e-9

_FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


class ParseError(ValueError):
    """Malformed frequency-response input; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConversionError(ValueError):
    """S<->Z conversion failed (singular sample or wrong representation)."""


class ResponseKind(enum.Enum):
    SCATTERING = "scattering"
    IMPEDANCE = "impedance"


@dataclass(frozen=True)
class FrequencyResponse:
    """Sampled complex one-port response on a strictly increasing frequency grid.

    Parameters
    ----------
    freq_hz : ndarray
        Sample frequencies in hertz, strictly increasing and positive.
    values : ndarray
        Complex response at each frequency; dimensionless for scattering
        data, ohms for impedance data.
    kind : ResponseKind
        Which representation ``values`` holds.
    ref_impedance : float, optional
        Port reference impedance in ohms. Required for scattering data.
    """

    freq_hz: np.ndarray
    values: np.ndarray
    kind: ResponseKind
    ref_impedance: float | None = None

    def __post_init__(self) -> None:
        freq = np.asarray(self.freq_hz, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "freq_hz", freq)
        object.__setattr__(self, "values", vals)
        if freq.ndim != 1 or vals.shape != freq.shape:
            raise ValueError("freq_hz and values must be 1-D arrays of equal length")
        if freq.size == 0:
            raise ValueError("response must contain at least one sample")
        if not np.all(np.isfinite(freq)) or not np.all(np.isfinite(vals)):
            raise ValueError("response contains non-finite samples")
        if freq[0] <= 0 or np.any(np.diff(freq) <= 0):
            raise ValueError("frequencies must be strictly increasing and positive")
        if self.kind is ResponseKind.SCATTERING:
            if self.ref_impedance is None:
                raise ValueError("scattering data requires a reference impedance")
            if not self.ref_impedance > 0:
                raise ValueError("reference impedance must be positive")

    def __len__(self) -> int:
        return int(self.freq_hz.size)


def _as_text_lines(source: Union[str, bytes, IO]) -> list[str]:
    if isinstance(source, bytes):
        raw: Union[str, bytes] = source
    elif isinstance(source, str):
        raw = source
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        raise TypeError(f"unsupported source type {type(source)!r}")
    if isinstance(raw, bytes):
        try:
            text = raw.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not ASCII text: {exc}") from None
    else:
        text = raw
    if not text.strip():
        raise ParseError("empty input")
    return text.splitlines()


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"could not parse {what} from {token!r}", lineno) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite {what}: {token!r}", lineno)
    return value


def _parse_touchstone(
    lines: list[str], ref_impedance: float | None
) -> FrequencyResponse:
    unit_scale: float | None = None
    kind: ResponseKind | None = None
    file_ref: float | None = None
    freqs: list[float] = []
    values: list[complex] = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("#"):
            if unit_scale is not None:
                raise ParseError("multiple option lines", lineno)
            tokens = line[1:].split()
            if len(tokens) < 3:
                raise ParseError(f"unsupported option line {line!r}", lineno)
            unit = tokens[0].upper()
            if unit not in _FREQ_UNITS:
                raise ParseError(f"unsupported frequency unit {tokens[0]!r}", lineno)
            param = tokens[1].upper()
            if param == "S":
                kind = ResponseKind.SCATTERING
            elif param == "Z":
                kind = ResponseKind.IMPEDANCE
            else:
                raise ParseError(f"unsupported parameter type {tokens[1]!r}", lineno)
            if tokens[2].upper() != "RI":
                raise ParseError(
                    f"unsupported data format {tokens[2]!r} (only RI supported)", lineno
                )
            rest = tokens[3:]
            if rest:
                if len(rest) != 2 or rest[0].upper() != "R":
                    raise ParseError(f"unsupported option line {line!r}", lineno)
                file_ref = _parse_float(rest[1], lineno, "reference impedance")
            unit_scale = _FREQ_UNITS[unit]
            continue
        # data row
        if unit_scale is None:
            raise ParseError("data row before option line", lineno)
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(
                f"expected 3 fields '<freq> <re> <im>', got {len(tokens)}", lineno
            )
        freqs.append(_parse_float(tokens[0], lineno, "frequency") * unit_scale)
        re = _parse_float(tokens[1], lineno, "real part")
        im = _parse_float(tokens[2], lineno, "imaginary part")
        values.append(complex(re, im))

    if unit_scale is None or kind is None:
        raise ParseError("missing option line")
    if not freqs:
        raise ParseError("no data rows")
    if np.any(np.diff(freqs) <= 0) or freqs[0] <= 0:
        raise ParseError("frequency grid is not strictly increasing and positive")

    ref = file_ref if file_ref is not None else ref_impedance
    if kind is ResponseKind.SCATTERING and ref is None:
        raise ParseError("scattering data without reference impedance")
    return FrequencyResponse(np.array(freqs), np.array(values), kind, ref)


def _parse_csv(
    lines: list[str], ref_impedance: float | None, kind: ResponseKind | None
) -> FrequencyResponse:
    rows = [(i, ln.strip()) for i, ln in enumerate(lines, start=1) if ln.strip()]
    if not rows:
        raise ParseError("empty input")
    header_no, header = rows[0]
    if [c.strip().lower() for c in header.split(",")] != ["freq_hz", "re", "im"]:
        raise ParseError(f"expected header 'freq_hz,re,im', got {header!r}", header_no)
    freqs: list[float] = []
    values: list[complex] = []
    for lineno, line in rows[1:]:
        fields = [c.strip() for c in line.split(",")]
        if len(fields) != 3:
            raise ParseError(f"expected 3 comma-separated fields, got {len(fields)}", lineno)
        freqs.append(_parse_float(fields[0], lineno, "frequency"))
        re = _parse_float(fields[1], lineno, "real part")
        im = _parse_float(fields[2], lineno, "imaginary part")
        values.append(complex(re, im))
    if not freqs:
        raise ParseError("no data rows")
    if freqs[0] <= 0 or np.any(np.diff(freqs) <= 0):
        raise ParseError("frequency grid is not strictly increasing and positive")
    if kind is None:
        kind = ResponseKind.SCATTERING if ref_impedance is not None else ResponseKind.IMPEDANCE
    if kind is ResponseKind.SCATTERING and ref_impedance is None:
        raise ParseError("scattering data without reference impedance")
    return FrequencyResponse(np.array(freqs), np.array(values), kind, ref_impedance)


def parse_response(
    source: Union[str, bytes, IO],
    format: str,
    ref_impedance: float | None = None,
    kind: ResponseKind | None = None,
) -> FrequencyResponse:
    """Parse a one-port response file into a :class:`FrequencyResponse`.

    Parameters
    ----------
    source : str, bytes or file-like
        File content (or an open handle).
    format : {"touchstone", "csv"}
        Input grammar. Touchstone carries kind/unit/reference metadata in its
        option line; CSV is raw ``freq_hz,re,im`` triples.
    ref_impedance : float, optional
        Reference impedance in ohms. For Touchstone it is a fallback when the
        option line omits ``R <ref>``; for CSV, passing it marks the data as
        scattering relative to this impedance.
    kind : ResponseKind, optional
        Explicit representation for CSV data (overrides the
        ``ref_impedance``-based inference). Ignored for Touchstone.

    Raises
    ------
    ParseError
        On any deviation from the documented grammar, with the offending
        line number where applicable.
    """
    lines = _as_text_lines(source)
    fmt = format.lower()
    if fmt in ("touchstone", "touchstonesubset", "snp", "s1p"):
        return _parse_touchstone(lines, ref_impedance)
    if fmt == "csv":
        return _parse_csv(lines, ref_impedance, kind)
    raise ValueError(f"unknown format {format!r}")


def s_to_z(resp: FrequencyResponse) -> FrequencyResponse:
    """Convert a scattering response to impedance, Z = Zref*(1+S)/(1-S).

    Raises
    ------
    ConversionError
        If ``resp`` is not scattering data, or any sample sits within
        ``SINGULARITY_TOL`` of the S = 1 open-circuit singularity (the
        offending frequency is reported).
    """
    if resp.kind is not ResponseKind.SCATTERING:
        raise ConversionError("s_to_z expects scattering data")
    s = resp.values
    denom = 1.0 - s
    bad = np.abs(denom) < SINGULARITY_TOL
    if np.any(bad):
        f_bad = resp.freq_hz[bad][0]
        raise ConversionError(f"S = 1 within tolerance at {f_bad:.6g} Hz (open circuit)")
    z = resp.ref_impedance * (1.0 + s) / denom
    return FrequencyResponse(resp.freq_hz, z, ResponseKind.IMPEDANCE, resp.ref_impedance)


DEFAULT_REF_IMPEDANCE = 50.0


def z_to_s(resp: FrequencyResponse, ref_impedance: float | None = None) -> FrequencyResponse:
    """Convert an impedance response to scattering, S = (Z-Zref)/(Z+Zref).

    The reference impedance is taken from ``ref_impedance`` if given, else
    from ``resp.ref_impedance``, else the conventional 50 ohm.
    """
    if resp.kind is not ResponseKind.IMPEDANCE:
        raise ConversionError("z_to_s expects impedance data")
    ref = ref_impedance if ref_impedance is not None else resp.ref_impedance
    if ref is None:
        ref = DEFAULT_REF_IMPEDANCE
    if not ref > 0:
        raise ConversionError("reference impedance must be positive")
    z = resp.values
    denom = z + ref
    bad = np.abs(denom) < SINGULARITY_TOL * ref
    if np.any(bad):
        f_bad = resp.freq_hz[bad][0]
        raise ConversionError(f"Z = -Zref within tolerance at {f_bad:.6g} Hz")
    s = (z - ref) / denom
    return FrequencyResponse(resp.freq_hz, s, ResponseKind.SCATTERING, ref)
