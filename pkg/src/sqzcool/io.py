"""Deterministic CSV/JSON emission and measured-spectrum ingestion.

All numeric CSV fields carry 9 significant digits; non-cooling map cells
are written as ``nan`` (never clamped).  Measured-spectrum CSVs must
declare their frequency unit in a leading comment so unit bugs fail loudly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .cooling import CoolMap
from .errors import ConfigError
from .spectra import Spectrum

FREQ_UNIT_HZ = "hz"
FREQ_UNIT_NORMALIZED = "delta_over_omega"


def format_value(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return f"{x:.9g}"


def write_coolmap_csv(path: str | Path, cmap: CoolMap) -> None:
    """Row-major (kappa, delta) emission with header
    kappa_over_omega,delta_over_omega,n_bath."""
    lines = ["kappa_over_omega,delta_over_omega,n_bath"]
    for i, k in enumerate(cmap.kappa_axis):
        for j, d in enumerate(cmap.delta_axis):
            lines.append(
                f"{format_value(k)},{format_value(d)},{format_value(cmap.values[i, j])}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path: str | Path, spec: Spectrum, omega_m: float, meta: dict) -> None:
    """Spectrum CSV (delta_over_omega, psd_snl) plus a JSON metadata sidecar."""
    path = Path(path)
    lines = ["delta_over_omega,psd_snl"]
    for d, v in zip(spec.grid.deltas, spec.values):
        lines.append(f"{format_value(d / omega_m)},{format_value(v)}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = dict(meta)
    sidecar.update(
        {
            "kind": spec.kind,
            "quad_angle": spec.quad_angle,
            "normalization": spec.normalization,
            "code_version": __version__,
        }
    )
    write_json(path.with_suffix(".json"), sidecar)


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_measured_spectrum(path: str | Path, omega_m: float | None = None):
    """Read a measured-spectrum CSV into (delta_rad_per_s, psd_snl) arrays.

    Expected layout: a ``# frequency_unit=<hz|delta_over_omega>`` comment,
    then a ``frequency,psd_snl`` header and data rows.  Frequencies in Hz
    are offsets from the drive and are converted to angular units;
    normalized frequencies require ``omega_m``.
    """
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ConfigError(f"{path}: missing '# frequency_unit=...' comment line")
    head = lines[0].lstrip("#").strip()
    if "=" not in head:
        raise ConfigError(f"{path}: malformed unit comment {lines[0]!r}")
    key, _, unit = head.partition("=")
    if key.strip() != "frequency_unit":
        raise ConfigError(f"{path}: expected key 'frequency_unit', got {key.strip()!r}")
    unit = unit.strip().lower()
    if unit not in (FREQ_UNIT_HZ, FREQ_UNIT_NORMALIZED):
        raise ConfigError(f"{path}: unknown frequency unit {unit!r}")
    if len(lines) < 2 or lines[1].lower() != "frequency,psd_snl":
        raise ConfigError(f"{path}: expected header 'frequency,psd_snl'")
    freqs, psds = [], []
    for ln in lines[2:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{path}: malformed data row {ln!r}")
        try:
            freqs.append(float(parts[0]))
            psds.append(float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"{path}: non-numeric data row {ln!r}") from exc
    freqs = np.array(freqs)
    psds = np.array(psds)
    if unit == FREQ_UNIT_HZ:
        deltas = 2 * math.pi * freqs
    else:
        if omega_m is None:
            raise ConfigError(f"{path}: normalized frequencies need the mechanical frequency")
        deltas = freqs * omega_m
    return deltas, psds
