"""Discrete energy, its exact gradient, and the Nehari/Pohozaev-type scalars.

The discrete energy is

    I(u) = 1/2 ||u||_{H^1}^2 + gamma/(4 p pi) V0(u) - b/q int |u|^q

with every integral a rectangle-rule sum on the grid, the gradient term built
from forward differences, and V0 from :mod:`snewton2d.logpotential`.  Gradients
are taken with respect to the grid inner product ``<f, g> = h^2 sum f g``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import BadExponent, GridMismatch
from .grid import Coefficient, CoefficientLike, Field, _forward_diffs, _laplacian, as_coefficient, grad_sq_sum
from .logpotential import LogKernel, VSplit

__all__ = [
    "Params",
    "EnergyReport",
    "energy_report",
    "gradient",
    "precondition",
    "residual_norm",
    "h1_norm_sq",
]


@dataclass(frozen=True)
class Params:
    """Equation parameters ``(p, q, gamma, b, a)`` plus derived regime flags.

    ``nehari_ok`` means the amplitude-fibering (Nehari) characterisation of the
    ground state applies (``q >= 2p``).  ``fiber_k`` is the dilation exponent:
    1 for ``p >= 3`` and 2 for ``2 <= p < 3``.  ``fiber_ok`` means the dilation
    manifold characterisation applies, which needs constant ``a``, ``q > 2``,
    ``q >= 2p - 2`` and, when ``p < 3``, ``q >= 2p - 1``.
    """

    p: float = 2.0
    q: float = 4.0
    gamma: float = 1.0
    b: float = 1.0
    a: Coefficient = field(default_factory=lambda: Coefficient.constant(1.0))

    def __post_init__(self):
        object.__setattr__(self, "a", as_coefficient(self.a))
        if not (self.p >= 2 and self.q >= 2):
            raise BadExponent(f"need p >= 2 and q >= 2, got p={self.p}, q={self.q}")
        # gamma = 0 is admitted as the degenerate local limit (no nontrivial critical point)
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.b >= 0:
            raise ValueError(f"b must be >= 0, got {self.b}")

    @property
    def nehari_ok(self) -> bool:
        return self.q >= 2 * self.p

    @property
    def fiber_k(self) -> int:
        return 1 if self.p >= 3 else 2

    @property
    def fiber_ok(self) -> bool:
        return not self.fiber_violations()

    def nehari_violations(self) -> list[str]:
        if self.nehari_ok:
            return []
        return [f"q ≥ 2p required for Nehari mode (got p={self.p:g}, q={self.q:g})"]

    def fiber_violations(self) -> list[str]:
        p, q = self.p, self.q
        out = []
        if not self.a.is_constant:
            out.append("constant a required for fiber mode")
        if not q > 2:
            out.append(f"q > 2 required for fiber mode (got q={q:g})")
        if not q >= 2 * p - 2:
            out.append(f"q ≥ 2p - 2 required for fiber mode (got p={p:g}, q={q:g})")
        if p < 3 and not q >= 2 * p - 1:
            out.append(f"q ≥ 2p - 1 required for fiber mode when 2 ≤ p < 3 (got p={p:g}, q={q:g})")
        return out

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "gamma": self.gamma, "b": self.b, "a": self.a.to_json()}


@dataclass(frozen=True)
class EnergyReport:
    I: float
    nehari: float
    P: float
    J1: float
    J2: float
    vsplit: VSplit
    h1_sq: float
    lp_p: float
    lq_q: float
    a_l2: float
    variable_a: bool = False

    @property
    def grad_sq(self) -> float:
        return self.h1_sq - self.a_l2

    def J(self, k: int) -> float:
        return self.J1 if k == 1 else self.J2

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("vsplit")
        d.update(self.vsplit.to_json())
        return d

    @classmethod
    def from_json(cls, d: dict) -> "EnergyReport":
        d = dict(d)
        vs = VSplit(d.pop("v0"), d.pop("v1"), d.pop("v2"))
        return cls(vsplit=vs, **d)


def _check(u: Field, kernel: LogKernel) -> None:
    if u.spec != kernel.spec:
        raise GridMismatch("field and kernel are on different grids")


@dataclass
class _Scalars:
    """Raw integrals of one field; ``conv`` is ``log * |u|^p`` kept for the gradient."""

    grad_sq: float
    a_l2: float
    v0: float
    lp_p: float
    lq_q: float
    conv: np.ndarray
    up: np.ndarray


def _scalars(v: np.ndarray, params: Params, kernel: LogKernel) -> _Scalars:
    h2 = kernel.spec.spacing ** 2
    av = np.abs(v)
    up = av ** params.p
    conv = kernel.convolve(up)
    a_vals = params.a.values_on(kernel.spec)
    return _Scalars(
        grad_sq=grad_sq_sum(v),
        a_l2=float(h2 * np.sum(a_vals * v * v)),
        v0=float(h2 * np.sum(up * conv)),
        lp_p=float(h2 * np.sum(up)),
        lq_q=float(h2 * np.sum(av ** params.q)),
        conv=conv,
        up=up,
    )


def _energy(s: _Scalars, params: Params) -> float:
    p, q, g, b = params.p, params.q, params.gamma, params.b
    return 0.5 * (s.grad_sq + s.a_l2) + g / (4 * p * np.pi) * s.v0 - b / q * s.lq_q


def _nehari(s: _Scalars, params: Params) -> float:
    return s.grad_sq + s.a_l2 + params.gamma / (2 * np.pi) * s.v0 - params.b * s.lq_q


def _pohozaev(s: _Scalars, params: Params) -> float:
    p, q, g, b = params.p, params.q, params.gamma, params.b
    return g / (4 * np.pi * p) * s.lp_p**2 + g / (np.pi * p) * s.v0 - 2 * b / q * s.lq_q + s.a_l2


def _jk(s: _Scalars, params: Params, k: int) -> float:
    p, q, g, b = params.p, params.q, params.gamma, params.b
    return (
        k * s.grad_sq
        + (k - 1) * s.a_l2
        - (k * q - 2) * b / q * s.lq_q
        - g / (4 * np.pi * p) * s.lp_p**2
        + g * (k * p - 2) / (2 * p * np.pi) * s.v0
    )


def _pow_diff(x: np.ndarray, dx: np.ndarray, r: float) -> np.ndarray:
    """``|x + dx|^r - |x|^r`` without cancellation when ``dx`` is small."""
    out = np.abs(x + dx) ** r - np.abs(x) ** r
    small = np.abs(dx) < 0.5 * np.abs(x)
    xs = x[small]
    out[small] = np.abs(xs) ** r * np.expm1(r * np.log1p(dx[small] / xs))
    return out


def _energy_change(v_old: np.ndarray, s_old: _Scalars, v_new: np.ndarray, s_new: _Scalars,
                   params: Params, kernel: LogKernel) -> float:
    """``I(v_new) - I(v_old)`` accurate to rounding of the difference, not of ``I``.

    Each term is written through ``dv = v_new - v_old`` (and the kernel's
    symmetry for the logarithmic term), so line searches keep working once the
    energy decrease drops below ``eps * |I|``.
    """
    p, q, g, b = params.p, params.q, params.gamma, params.b
    h2 = kernel.spec.spacing ** 2
    dv = v_new - v_old
    sv = v_new + v_old
    a_vals = params.a.values_on(kernel.spec)
    d1, d2 = _forward_diffs(dv)
    e1, e2 = _forward_diffs(sv)
    d_h1 = float(np.sum(d1 * e1) + np.sum(d2 * e2)) + h2 * float(np.sum(a_vals * dv * sv))
    d_up = _pow_diff(v_old, dv, p)
    d_v0 = h2 * float(np.sum(d_up * (s_new.conv + s_old.conv)))
    d_lq = h2 * float(np.sum(_pow_diff(v_old, dv, q))) if b else 0.0
    return 0.5 * d_h1 + g / (4 * p * np.pi) * d_v0 - b / q * d_lq


def _gradient(v: np.ndarray, s: _Scalars, params: Params, kernel: LogKernel) -> np.ndarray:
    h = kernel.spec.spacing
    a_vals = params.a.values_on(kernel.spec)
    av = np.abs(v)
    # |u|^(r-2) u written as sign(u)|u|^(r-1) so that r = 2 needs no special case
    sgn = np.sign(v)
    out = -_laplacian(v, h) + a_vals * v
    out += params.gamma / (2 * np.pi) * s.conv * sgn * av ** (params.p - 1)
    if params.b:
        out -= params.b * sgn * av ** (params.q - 1)
    return out


def energy_report(u: Field, params: Params, kernel: LogKernel, split: bool = True) -> EnergyReport:
    """All energy-type scalars of ``u`` from one pass.

    With ``split=False`` the V1/V2 parts are skipped (reported as NaN), which
    saves two convolutions.  For a sampled ``a`` the J_k values use
    ``int a u^2`` in place of the constant-a term and are flagged
    ``variable_a``; they are a heuristic in that case.
    """
    _check(u, kernel)
    s = _scalars(u.values, params, kernel)
    if split:
        h2 = kernel.spec.spacing ** 2
        v1 = float(h2 * np.sum(s.up * kernel.convolve(s.up, "log1p")))
        v2 = float(h2 * np.sum(s.up * kernel.convolve(s.up, "log1p_inv")))
    else:
        v1 = v2 = float("nan")
    return EnergyReport(
        I=_energy(s, params),
        nehari=_nehari(s, params),
        P=_pohozaev(s, params),
        J1=_jk(s, params, 1),
        J2=_jk(s, params, 2),
        vsplit=VSplit(s.v0, v1, v2),
        h1_sq=s.grad_sq + s.a_l2,
        lp_p=s.lp_p,
        lq_q=s.lq_q,
        a_l2=s.a_l2,
        variable_a=not params.a.is_constant,
    )


def gradient(u: Field, params: Params, kernel: LogKernel) -> Field:
    """Exact gradient of the discrete energy w.r.t. the ``h^2``-weighted inner product.

    ``d/de I(u + e v) = h^2 sum(gradient * v)``.  The density is
    ``-Delta_h u + a u + (gamma/2pi)(log * |u|^p)|u|^(p-2)u - b|u|^(q-2)u``.
    """
    _check(u, kernel)
    s = _scalars(u.values, params, kernel)
    return Field(u.spec, _gradient(u.values, s, params, kernel))


def _eigs(n: int, h: float) -> np.ndarray:
    k = np.arange(1, n + 1)
    lam = (2.0 - 2.0 * np.cos(np.pi * k / (n + 1))) / (h * h)
    return lam[:, None] + lam[None, :]


def _precondition(r: np.ndarray, h: float, abar: float) -> np.ndarray:
    # DST-I diagonalises the 5-point Laplacian with zero exterior values
    rhat = sfft.dstn(r, type=1)
    return sfft.idstn(rhat / (_eigs(r.shape[0], h) + abar), type=1)


def precondition(r: Field, a: CoefficientLike) -> Field:
    """Solve ``(-Delta_h + abar) g = r`` with ``abar`` the constant (or mean) of ``a``."""
    return Field(r.spec, _precondition(r.values, r.spec.spacing, as_coefficient(a).mean))


def h1_norm_sq(v: np.ndarray, a_vals, h: float) -> float:
    return grad_sq_sum(v) + float(h * h * np.sum(a_vals * v * v))


def residual_norm(u: Field, params: Params, kernel: LogKernel) -> float:
    """``||precondition(gradient(u))||_{H^1} / max(1, ||u||_{H^1})``."""
    _check(u, kernel)
    h = u.spec.spacing
    s = _scalars(u.values, params, kernel)
    g = _gradient(u.values, s, params, kernel)
    G = _precondition(g, h, params.a.mean)
    a_vals = params.a.values_on(u.spec)
    return float(np.sqrt(h1_norm_sq(G, a_vals, h)) / max(1.0, np.sqrt(s.grad_sq + s.a_l2)))
