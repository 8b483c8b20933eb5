"""Fibering maps and projections onto the Nehari set and the dilation manifolds.

Two one-parameter families are used:

* amplitude rays ``t -> t u``; ``phi_u(t) = I(t u)`` is explicit in the
  scalars of ``u``, and its critical point defines the Nehari projection;
* dilations ``t -> t^k u(t x)``; ``psi_{u,k}(t)`` is explicit in five scalar
  integrals of ``u`` (:class:`FiberScalars`), and its unique critical point
  defines the projection onto ``M_k = {J_k = 0}``.

Root finding is done on the scalar closed forms.  Only the final dilated field
is resampled on the grid (bilinear interpolation).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .energy import EnergyReport, Params, _check, _scalars, _Scalars
from .errors import NoNehariRoot, NoSignChange, RegimeViolation, ZeroField
from .grid import Field, _laplacian
from .logpotential import LogKernel

__all__ = [
    "FiberScalars",
    "FiberCase",
    "fiber_case",
    "phi",
    "phi_prime_over_t",
    "nehari_root",
    "nehari_project",
    "psi_eval",
    "psi_root",
    "fiber_project",
    "dilate",
    "jk_gradient",
]

T_CAP = 1e8
BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class FiberScalars:
    """``A = int|grad u|^2, B = int a u^2, C = V0(u), D = (int|u|^p)^2, E = int|u|^q``."""

    A: float
    B: float
    C: float
    D: float
    E: float

    @property
    def h1_sq(self) -> float:
        return self.A + self.B

    @classmethod
    def from_report(cls, rep: EnergyReport) -> "FiberScalars":
        return cls(rep.grad_sq, rep.a_l2, rep.vsplit.v0, rep.lp_p**2, rep.lq_q)

    @classmethod
    def _from_scalars(cls, s: _Scalars) -> "FiberScalars":
        return cls(s.grad_sq, s.a_l2, s.v0, s.lp_p**2, s.lq_q)

    @classmethod
    def of(cls, u: Field, params: Params, kernel: LogKernel) -> "FiberScalars":
        _check(u, kernel)
        return cls._from_scalars(_scalars(u.values, params, kernel))


# -- amplitude fibering ----------------------------------------------------


def phi(s: FiberScalars, t: float, params: Params) -> float:
    """``I(t u)``."""
    p, q = params.p, params.q
    return (
        0.5 * t * t * s.h1_sq
        + params.gamma / (4 * p * np.pi) * t ** (2 * p) * s.C
        - params.b / q * t**q * s.E
    )


def phi_prime_over_t(s: FiberScalars, t: float, params: Params) -> float:
    """``phi_u'(t) / t = ||u||^2 + (gamma/2pi) t^(2p-2) V0 - b t^(q-2) int|u|^q``."""
    p, q = params.p, params.q
    return s.h1_sq + params.gamma / (2 * np.pi) * t ** (2 * p - 2) * s.C - params.b * t ** (q - 2) * s.E


class FiberCase(enum.Enum):
    UNIQUE_MAX = "unique_max"
    MONOTONE_UP = "monotone_up"


def _bisect_log(f, lo: float, hi: float) -> float:
    """Bisection in ``log t`` for a root of ``f`` with ``f(lo) > 0 >= f(hi)``."""
    while hi / lo - 1.0 > BISECT_RTOL:
        mid = np.sqrt(lo * hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return float(np.sqrt(lo * hi))


def nehari_root(s: FiberScalars, params: Params) -> float:
    """Unique ``t > 0`` with ``phi'(t) = 0``; raises :class:`NoNehariRoot` if none below ``T_CAP``."""
    if s.h1_sq <= 0:
        raise ZeroField("cannot project the zero field")
    f = lambda t: phi_prime_over_t(s, t, params)  # noqa: E731
    if f(1.0) == 0:
        return 1.0
    if f(1.0) > 0:
        lo, hi = 1.0, 2.0
        while f(hi) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > T_CAP:
                raise NoNehariRoot(
                    "t -> I(tu) increases on (0, 1e8): this u has no Nehari projection; "
                    "restart from a more concentrated initial guess"
                )
    else:
        lo, hi = 0.5, 1.0
        while f(lo) <= 0:
            lo, hi = 0.5 * lo, lo
    return _bisect_log(f, lo, hi)


def fiber_case(s: FiberScalars, params: Params) -> tuple[FiberCase, float | None]:
    """Which branch of the amplitude-fibering dichotomy ``u`` falls into."""
    try:
        return FiberCase.UNIQUE_MAX, nehari_root(s, params)
    except NoNehariRoot:
        return FiberCase.MONOTONE_UP, None


def nehari_project(u: Field, params: Params, kernel: LogKernel) -> tuple[float, Field]:
    if not params.nehari_ok:
        raise RegimeViolation(params.nehari_violations()[0])
    t = nehari_root(FiberScalars.of(u, params, kernel), params)
    return t, t * u


# -- dilation fibering ---------------------------------------------------------


def _check_k(k: int, params: Params) -> None:
    if k != params.fiber_k:
        raise RegimeViolation(f"k={k} does not match p={params.p:g}; use k={params.fiber_k}")


def _psi_terms(s: FiberScalars, k: int, t: float, params: Params) -> tuple[float, float]:
    p, q, b = params.p, params.q, params.b
    c = params.gamma / (4 * p * np.pi)
    m = 2 * (k * p - 2)
    r = k * q - 2
    lt = np.log(t)
    psi = (
        0.5 * t ** (2 * k) * s.A
        + 0.5 * t ** (2 * (k - 1)) * s.B
        - c * t**m * lt * s.D
        + c * t**m * s.C
        - b / q * t**r * s.E
    )
    dpsi = (
        k * t ** (2 * k - 1) * s.A
        + (k - 1) * t ** (2 * k - 3) * s.B
        - c * t ** (m - 1) * (m * lt + 1.0) * s.D
        + c * m * t ** (m - 1) * s.C
        - b / q * r * t ** (r - 1) * s.E
    )
    return float(psi), float(dpsi)


def psi_eval(s: FiberScalars, k: int, t: float, params: Params) -> tuple[float, float]:
    """``(psi_{u,k}(t), psi'_{u,k}(t))`` from the closed form in the fiber scalars."""
    if not t > 0:
        raise ValueError("t must be positive")
    _check_k(k, params)
    return _psi_terms(s, k, t, params)


def psi_sign_changes(s: FiberScalars, k: int, params: Params, ts: np.ndarray) -> int:
    signs = np.sign([_psi_terms(s, k, t, params)[1] for t in ts])
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))


def psi_root(s: FiberScalars, k: int, params: Params, t_min: float = 1e-6, t_max: float = 1e6) -> float:
    """The ``(+ -> -)`` sign change of ``psi'`` located by a log scan, then bisection."""
    _check_k(k, params)
    dpsi = lambda t: _psi_terms(s, k, t, params)[1]  # noqa: E731
    d1 = dpsi(1.0)
    if d1 == 0:
        return 1.0
    # start the scan from t = 1 outward; the root is almost always close to it
    ratio = 10.0 ** 0.05
    if d1 > 0:
        lo = 1.0
        while lo < t_max:
            hi = lo * ratio
            dh = dpsi(hi)
            if dh == 0:
                return hi
            if dh < 0:
                return _bisect_log(dpsi, lo, hi)
            lo = hi
    else:
        hi = 1.0
        while hi > t_min:
            lo = hi / ratio
            dl = dpsi(lo)
            if dl > 0:
                return _bisect_log(dpsi, lo, hi)
            if dl == 0:
                return lo
            hi = lo
    raise NoSignChange(f"psi' has no sign change on [{t_min:g}, {t_max:g}]")


def _interp_matrix(spec, t: float) -> np.ndarray:
    """1-D bilinear weights sampling an axis at ``t * x`` with zero exterior."""
    n, h, L = spec.n, spec.spacing, spec.half_width
    pos = (t * spec.axis + L) / h - 0.5  # fractional cell index
    i0 = np.floor(pos).astype(int)
    w1 = pos - i0
    W = np.zeros((n, n))
    rows = np.arange(n)
    for idx, w in ((i0, 1.0 - w1), (i0 + 1, w1)):
        ok = (idx >= 0) & (idx < n)
        W[rows[ok], idx[ok]] += w[ok]
    return W


def dilate(u: Field, t: float, k: int) -> Field:
    """``t^k u(t x)`` by bilinear interpolation; points outside the grid read 0."""
    if not t > 0:
        raise ValueError("t must be positive")
    if t == 1.0:
        return u
    W = _interp_matrix(u.spec, t)
    return Field(u.spec, t**k * (W @ u.values @ W.T))


def fiber_project(
    u: Field, params: Params, kernel: LogKernel, max_rounds: int = 30
) -> tuple[float, Field]:
    """Dilate ``u`` onto ``M_k`` (``k = params.fiber_k``).

    The closed-form root is computed from the scalars of the current field and
    the field is resampled; because resampling perturbs the scalars slightly,
    this is repeated until the root is 1 to within the bisection tolerance.
    Returns the accumulated dilation factor and the projected field.
    """
    if not params.fiber_ok:
        raise RegimeViolation("; ".join(params.fiber_violations()))
    k = params.fiber_k
    t_total = 1.0
    field = u
    for _ in range(max_rounds):
        s = FiberScalars.of(field, params, kernel)
        if s.h1_sq <= 0:
            raise ZeroField("cannot project the zero field")
        t = psi_root(s, k, params)
        if abs(t - 1.0) <= 4 * BISECT_RTOL:
            break
        field = dilate(field, t, k)
        t_total *= t
    return t_total, field


def jk_gradient(u: np.ndarray, s: _Scalars, params: Params, kernel: LogKernel, k: int) -> np.ndarray:
    """Gradient of the discrete ``J_k`` (grid inner product)."""
    p, q, g, b = params.p, params.q, params.gamma, params.b
    h = kernel.spec.spacing
    a_vals = params.a.values_on(kernel.spec)
    sgn = np.sign(u)
    av = np.abs(u)
    up1 = sgn * av ** (p - 1)
    out = -2.0 * k * _laplacian(u, h) + 2.0 * (k - 1) * a_vals * u
    if b:
        out -= (k * q - 2) * b * sgn * av ** (q - 1)
    out -= g / (4 * np.pi * p) * 2.0 * s.lp_p * p * up1
    out += g * (k * p - 2) / (2 * p * np.pi) * 2.0 * p * s.conv * up1
    return out
