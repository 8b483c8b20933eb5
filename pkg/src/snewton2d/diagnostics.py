"""Checks of qualitative properties of computed ground states.

Radial symmetry and monotone decrease, exponential decay of the tail, the
logarithmic far field of the potential, and agreement between the Nehari and
dilation-manifold solutions.  Everything here only reads fields; nothing feeds
back into the solver.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NotConverged, RegimeMismatch, WindowEmpty, ZeroField
from .grid import Field, mass_center, recenter
from .logpotential import LogKernel, potential_w

__all__ = [
    "SymmetryReport",
    "DecayFit",
    "symmetry_report",
    "decay_fit",
    "far_field_check",
    "sign_check",
    "hls_ratio",
    "consistency_suite",
    "diagnostics_summary",
    "write_profile_csv",
]

FLOOR = 1e-12
NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class SymmetryReport:
    center: tuple[float, float]
    shift: tuple[int, int]
    radial_profile: list[tuple[float, float, float]]  # (mean radius, mean value, max deviation)
    angular_rel_dev: float
    monotone_violations: int

    def to_json(self) -> dict:
        d = asdict(self)
        d["radial_profile"] = [list(row) for row in self.radial_profile]
        return d


@dataclass(frozen=True)
class DecayFit:
    A: float
    r2: float
    window: tuple[float, float]

    def to_json(self) -> dict:
        return asdict(self)


def _profile(x: np.ndarray, xp: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Cubic spline through the bin means (extrapolated past the end nodes)."""
    if len(xp) < 4:
        return np.interp(x, xp, fp)
    return CubicSpline(xp, fp, extrapolate=True)(x)


def symmetry_report(u: Field, r_max_frac: float = 0.8, skip_core: int = 2, mono_tol: float = 1e-10) -> SymmetryReport:
    """Radial profile of ``u`` about its centre of mass.

    Cells are binned by radius (bin width h).  Each cell is compared with the
    radial profile interpolated at the cell's own radius, so cells that share
    a bin but sit at slightly different radii are not counted as asymmetry.
    The profile is a cubic spline through the bin means, of ``log u`` when
    ``u`` is positive and of ``u`` otherwise.  A bin's deviation is its largest mismatch divided by
    ``max(|bin mean|, 1e-12)``.
    """
    shifted, center, shift = recenter(u)
    spec = u.spec
    h = spec.spacing
    r = spec.radius(center).ravel()
    v = shifted.values.ravel()
    r_max = r_max_frac * spec.half_width
    nbins = int(np.floor(r_max / h))
    idx = np.floor(r / h).astype(int)
    keep = idx < nbins
    r, v, idx = r[keep], v[keep], idx[keep]
    counts = np.bincount(idx, minlength=nbins)
    occupied = counts > 0
    mean_r = np.bincount(idx, weights=r, minlength=nbins)[occupied] / counts[occupied]
    mean_v = np.bincount(idx, weights=v, minlength=nbins)[occupied] / counts[occupied]
    if np.all(v > 0):
        mean_log = np.bincount(idx, weights=np.log(v), minlength=nbins)[occupied] / counts[occupied]
        prof = np.exp(_profile(r, mean_r, mean_log))
    else:
        prof = _profile(r, mean_r, mean_v)
    dev = np.abs(v - prof)
    maxdev = np.zeros(nbins)
    np.maximum.at(maxdev, idx, dev)
    maxdev = maxdev[occupied]
    rel = maxdev / np.maximum(np.abs(mean_v), FLOOR)
    tol = mono_tol * np.max(np.abs(v))
    increases = np.diff(mean_v) > tol
    violations = int(np.count_nonzero(increases[skip_core:]))
    profile = [(float(a), float(b), float(c)) for a, b, c in zip(mean_r, mean_v, maxdev)]
    return SymmetryReport(
        center=(float(center[0]), float(center[1])),
        shift=shift,
        radial_profile=profile,
        angular_rel_dev=float(rel.max()),
        monotone_violations=violations,
    )


def decay_fit(u: Field, window: tuple[float, float] = (0.3, 0.7)) -> DecayFit:
    """Fit ``log max|u|`` per radial bin against radius over ``window * L``.

    Each bin contributes its largest ``|u|`` paired with that cell's radius.
    Returns the decay rate ``A`` (minus the slope) and the coefficient of
    determination.
    """
    shifted, center, _ = recenter(u)
    spec = u.spec
    h, L = spec.spacing, spec.half_width
    r1, r2 = window[0] * L, window[1] * L
    r = spec.radius(center).ravel()
    av = np.abs(shifted.values.ravel())
    sel = (r >= r1) & (r <= r2) & (av > NOISE_FLOOR)
    if np.count_nonzero(sel) < 2:
        raise WindowEmpty(f"no values above {NOISE_FLOOR:g} in [{r1:g}, {r2:g}]")
    r, av = r[sel], av[sel]
    idx = np.floor(r / h).astype(int)
    order = np.lexsort((-av, idx))
    first = np.ones(len(order), dtype=bool)
    first[1:] = idx[order][1:] != idx[order][:-1]
    pick = order[first]
    rs, ys = r[pick], np.log(av[pick])
    if len(rs) < 2:
        raise WindowEmpty("fewer than two radial bins in the window")
    slope, intercept = np.polyfit(rs, ys, 1)
    resid = ys - (slope * rs + intercept)
    ss_tot = np.sum((ys - ys.mean()) ** 2)
    r_sq = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(A=float(-slope), r2=float(r_sq), window=(float(r1), float(r2)))


def far_field_check(u: Field, p: float, kernel: LogKernel, window: tuple[float, float] = (0.6, 0.8)) -> float:
    """Largest ``|w(x) - (1/2pi) log|x - c| int|u|^p|`` over an annulus.

    ``c`` is the centre of mass of ``|u|^p``; the annulus is ``window * L``
    around it.  Meaningful only for decaying ``u``.
    """
    w = potential_w(u, p, kernel).values
    spec = u.spec
    h2 = spec.spacing**2
    mass = float(h2 * np.sum(np.abs(u.values) ** p))
    if mass == 0:
        return 0.0
    c = mass_center(u, p)
    r = spec.radius(c)
    L = spec.half_width
    ring = (r >= window[0] * L) & (r <= window[1] * L)
    if not ring.any():
        return 0.0
    far = mass / (2 * np.pi) * np.log(r[ring])
    return float(np.max(np.abs(w[ring] - far)))


def sign_check(u: Field, rel: float = 1e-10) -> bool:
    v = u.values
    return bool(v.min() >= -rel * v.max())


def hls_ratio(u: Field, p: float, kernel: LogKernel) -> float:
    """``|V2(u)| / ||u||_{4p/3}^{2p}``, bounded by a Hardy-Littlewood-Sobolev constant."""
    h2 = u.spec.spacing**2
    f = np.abs(u.values) ** p
    v2 = float(h2 * np.sum(f * kernel.convolve(f, "log1p_inv")))
    norm43 = (h2 * np.sum(f ** (4.0 / 3.0))) ** 0.75
    if norm43 == 0:
        raise ZeroField("zero field")
    return abs(v2) / norm43**2


def diagnostics_summary(u: Field, p: float, kernel: LogKernel) -> dict:
    sym = symmetry_report(u)
    try:
        fit = decay_fit(u).to_json()
    except WindowEmpty as exc:
        fit = {"error": str(exc)}
    return {
        "sign_ok": sign_check(u),
        "min_over_max": float(u.values.min() / u.values.max()),
        "symmetry": sym.to_json(),
        "decay": fit,
        "far_field": far_field_check(u, p, kernel),
    }


def consistency_suite(result_nehari, result_fiber, kernel: LogKernel | None = None) -> dict:
    """Compare a Nehari-mode and a fiber-mode ground state for the same parameters."""
    for res in (result_nehari, result_fiber):
        if not res.converged:
            raise NotConverged(f"{res.mode} result did not converge ({res.message})")
    pa, pb = result_nehari.params, result_fiber.params
    if pa != pb:
        raise RegimeMismatch("results were computed for different parameters")
    if not (pa.nehari_ok and pa.fiber_ok):
        raise RegimeMismatch("parameters do not admit both Nehari and fiber modes")
    la, lb = result_nehari.level, result_fiber.level
    out = {
        "level_nehari": la,
        "level_fiber": lb,
        "relative_gap": abs(la - lb) / abs(la),
        "pohozaev_residual_nehari": result_nehari.pohozaev_residual,
        "pohozaev_residual_fiber": result_fiber.pohozaev_residual,
        "sign_ok_nehari": sign_check(result_nehari.field),
        "sign_ok_fiber": sign_check(result_fiber.field),
    }
    for tag, res in (("nehari", result_nehari), ("fiber", result_fiber)):
        sym = symmetry_report(res.field)
        fit = decay_fit(res.field)
        out[f"angular_rel_dev_{tag}"] = sym.angular_rel_dev
        out[f"monotone_violations_{tag}"] = sym.monotone_violations
        out[f"decay_rate_{tag}"] = fit.A
        out[f"decay_r2_{tag}"] = fit.r2
    return out


def write_profile_csv(path, report: SymmetryReport) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["radius", "mean", "max_deviation"])
        for row in report.radial_profile:
            wr.writerow([repr(x) for x in row])
