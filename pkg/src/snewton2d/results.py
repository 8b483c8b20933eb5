"""On-disk layout of a solved run and its re-verification.

A result directory holds::

    field.bin            grid header + row-major float64 values
    result.json          energy report, solver summary, config, history
    diagnostics.json     symmetry / decay / far-field / sign checks
    radial_profile.csv   radius, mean, max deviation
    config.txt           the run config, verbatim (when run from a file)
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import diagnostics_summary, symmetry_report, write_profile_csv
from .energy import EnergyReport, Params, energy_report
from .errors import ConfigError, CorruptField
from .grid import GridSpec, read_field, write_field
from .logpotential import build_kernel
from .solver import GroundStateResult

__all__ = ["SCHEMA_VERSION", "save_result", "verify_result_dir", "VerifyOutcome"]

SCHEMA_VERSION = 1
FIELD_FILE = "field.bin"
SIDECAR_FILE = "result.json"
DIAG_FILE = "diagnostics.json"
PROFILE_FILE = "radial_profile.csv"
CONFIG_FILE = "config.txt"
VERIFY_RTOL = 1e-9


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def save_result(
    outdir,
    result: GroundStateResult,
    spec: GridSpec,
    config_json: dict,
    config_text: str | None = None,
    diagnostics: bool = True,
) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    write_field(outdir / FIELD_FILE, result.field)
    written.append(outdir / FIELD_FILE)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "config": config_json,
        "report": result.report.to_json(),
        "summary": result.summary(),
        "history": [list(h) for h in result.history],
    }
    _dump(outdir / SIDECAR_FILE, sidecar)
    written.append(outdir / SIDECAR_FILE)
    if diagnostics:
        kernel = build_kernel(spec)
        diag = diagnostics_summary(result.field, result.params.p, kernel)
        diag["schema_version"] = SCHEMA_VERSION
        _dump(outdir / DIAG_FILE, diag)
        write_profile_csv(outdir / PROFILE_FILE, symmetry_report(result.field))
        written += [outdir / DIAG_FILE, outdir / PROFILE_FILE]
    if config_text is not None:
        (outdir / CONFIG_FILE).write_text(config_text)
    return written


class VerifyOutcome:
    def __init__(self):
        self.failures: list[str] = []
        self.checked = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _close(a, b, scale: float) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    if a is None or b is None:
        return a is b
    if math.isnan(a) and math.isnan(b):
        return True
    return abs(a - b) <= VERIFY_RTOL * max(abs(a), abs(b)) + 1e-15 * scale


def _compare_tree(tag: str, saved, fresh, scale: float, out: VerifyOutcome, path: str = "") -> None:
    if isinstance(saved, dict) and isinstance(fresh, dict):
        for key in sorted(set(saved) | set(fresh)):
            if key == "schema_version":
                continue
            if key not in saved or key not in fresh:
                out.failures.append(f"{tag} mismatch: key {path + key} missing")
                continue
            _compare_tree(tag, saved[key], fresh[key], scale, out, f"{path}{key}.")
        return
    if isinstance(saved, list) and isinstance(fresh, list):
        if len(saved) != len(fresh):
            out.failures.append(f"{tag} mismatch: {path[:-1]} length {len(saved)} != {len(fresh)}")
            return
        for i, (a, b) in enumerate(zip(saved, fresh)):
            _compare_tree(tag, a, b, scale, out, f"{path}{i}.")
        return
    out.checked += 1
    if isinstance(saved, (int, float)) and isinstance(fresh, (int, float)):
        if not _close(saved, fresh, scale):
            out.failures.append(f"{tag} mismatch: {path[:-1]} saved {saved!r}, recomputed {fresh!r}")
    elif saved != fresh:
        out.failures.append(f"{tag} mismatch: {path[:-1]} saved {saved!r}, recomputed {fresh!r}")


def params_from_json(d: dict) -> Params:
    a = d["a"]
    if isinstance(a, dict):
        raise ConfigError("results with a sampled coefficient cannot be re-verified from the sidecar")
    return Params(p=d["p"], q=d["q"], gamma=d["gamma"], b=d["b"], a=a)


def verify_result_dir(outdir) -> VerifyOutcome:
    """Recompute the energy report and diagnostics from ``field.bin`` and compare.

    Raises :class:`CorruptField` or :class:`ConfigError` when the directory cannot
    be read at all; comparison failures are collected in the outcome.
    """
    outdir = Path(outdir)
    if not (outdir / SIDECAR_FILE).is_file():
        raise ConfigError(f"no {SIDECAR_FILE} in {outdir}")
    try:
        sidecar = json.loads((outdir / SIDECAR_FILE).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corrupt sidecar: {exc}") from None
    if not (outdir / FIELD_FILE).is_file():
        raise CorruptField(f"corrupt field: {FIELD_FILE} missing")
    u = read_field(outdir / FIELD_FILE)
    cfg = sidecar["config"]
    grid = cfg["grid"]
    if (u.spec.n, u.spec.half_width) != (grid["n"], grid["L"]):
        raise CorruptField("corrupt field: header does not match the sidecar grid")
    params = params_from_json(cfg["params"])
    kernel = build_kernel(u.spec)
    out = VerifyOutcome()

    rep = energy_report(u, params, kernel)
    scale = abs(rep.h1_sq) + abs(rep.I)
    _compare_tree("energy", sidecar["report"], rep.to_json(), scale, out)
    saved_level = sidecar["summary"]["level"]
    out.checked += 1
    if not _close(saved_level, rep.I, scale):
        out.failures.append(f"energy mismatch: level saved {saved_level!r}, recomputed {rep.I!r}")
    # derived residuals stored in the summary
    for key, fresh in (
        ("nehari_residual", abs(rep.nehari) / rep.h1_sq),
        ("pohozaev_residual", abs(rep.P) / rep.h1_sq),
    ):
        out.checked += 1
        if not _close(sidecar["summary"][key], fresh, 1.0):
            out.failures.append(f"energy mismatch: {key} saved {sidecar['summary'][key]!r}, recomputed {fresh!r}")

    if (outdir / DIAG_FILE).is_file():
        saved = json.loads((outdir / DIAG_FILE).read_text())
        fresh = json.loads(json.dumps(diagnostics_summary(u, params.p, kernel)))
        _compare_tree("diagnostics", saved, fresh, float(np.max(np.abs(u.values))), out)
    return out


def energy_report_from_sidecar(outdir) -> EnergyReport:
    sidecar = json.loads((Path(outdir) / SIDECAR_FILE).read_text())
    return EnergyReport.from_json(sidecar["report"])
