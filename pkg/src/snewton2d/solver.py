"""Ground states by projected, preconditioned gradient descent.

Each iterate lies on the constraint set (the Nehari set, or ``M_k`` in fiber
mode).  A step moves against the preconditioned gradient, re-projects, and is
accepted by an Armijo test on the energy of the projected trial point.  Since
``<I'(u), u> = 0`` on the Nehari set and ``psi'_{u,k}(1) = J_k(u) = 0`` on
``M_k``, the projection does not change the energy to first order and the usual
Armijo slope ``<I'(u), d>`` applies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .energy import (
    EnergyReport,
    Params,
    _Scalars,
    _energy,
    _energy_change,
    _gradient,
    _precondition,
    _scalars,
    energy_report,
    h1_norm_sq,
)
from .errors import Diverged, NoNehariRoot, NoSignChange, RegimeViolation, Unbounded, ZeroInit
from .grid import Field, GridSpec, read_field
from .logpotential import LogKernel, build_kernel
from .manifolds import (
    FiberScalars,
    fiber_project,
    jk_gradient,
    nehari_project,
    nehari_root,
    phi,
    psi_eval,
    psi_root,
)

__all__ = [
    "GaussianInit",
    "RandomInit",
    "FileInit",
    "SolverConfig",
    "GroundStateResult",
    "init_field",
    "solve_ground_state",
    "minimax_level",
]

log = logging.getLogger(__name__)

NEHARI = "nehari"
FIBER = "fiber"
MODES = (NEHARI, FIBER)
DIVERGENCE_STREAK = 50


@dataclass(frozen=True)
class GaussianInit:
    amplitude: float = 1.0
    width: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class RandomInit:
    seed: int = 0
    modes: int = 4
    radius: float = 1.5


@dataclass(frozen=True)
class FileInit:
    path: str


InitSpec = Union[GaussianInit, RandomInit, FileInit]


@dataclass(frozen=True)
class SolverConfig:
    mode: str = NEHARI
    max_iters: int = 2000
    tol: float = 1e-6
    step0: float = 1.0
    armijo_c: float = 1e-4
    backtrack_ratio: float = 0.5
    init: InitSpec = GaussianInit()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.backtrack_ratio < 1:
            raise ValueError("backtrack_ratio must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not self.step0 > 0:
            raise ValueError("step0 must be > 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


@dataclass
class GroundStateResult:
    field: Field
    report: EnergyReport
    level: float
    residual: float
    nehari_residual: float
    pohozaev_residual: float
    constraint_residual: float
    full_residual: float
    iters: int
    converged: bool
    mode: str
    params: Params
    sign_ok: bool
    history: list[tuple[float, float]] = field(default_factory=list)
    message: str = ""

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "level": self.level,
            "residual": self.residual,
            "full_residual": self.full_residual,
            "nehari_residual": self.nehari_residual,
            "pohozaev_residual": self.pohozaev_residual,
            "constraint_residual": self.constraint_residual,
            "iters": self.iters,
            "converged": self.converged,
            "sign_ok": self.sign_ok,
            "message": self.message,
        }


def init_field(spec: GridSpec, init: InitSpec, params: Optional[Params] = None) -> Field:
    """Initial guess: Gaussian, saved field, or a seeded smooth random bump.

    The random bump is a sum of the lowest ``modes x modes`` Dirichlet sine
    modes of the square ``[-radius, radius]^2`` (clipped to the grid), with the
    fundamental mode weighted 1 and the others drawn uniformly from
    ``[-1/2, 1/2] / (k1 k2)``.  It is zero outside that square.  A bump as
    wide as the whole box usually has no Nehari projection, because the
    logarithmic term outgrows the local nonlinearity at large scales.
    """
    if isinstance(init, GaussianInit):
        if init.amplitude == 0:
            raise ZeroInit("Gaussian amplitude must be nonzero")
        if not init.width > 0:
            raise ValueError("Gaussian width must be positive")
        x1, x2 = spec.coords()
        c1, c2 = init.center
        r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
        return Field(spec, init.amplitude * np.exp(-r2 / init.width**2))
    if isinstance(init, RandomInit):
        rng = np.random.default_rng(init.seed)
        m = init.modes
        coef = rng.uniform(-0.5, 0.5, size=(m, m))
        k = np.arange(1, m + 1)
        coef /= k[:, None] * k[None, :]
        coef[0, 0] = 1.0
        R = min(init.radius, spec.half_width)
        arg = (spec.axis + R) / (2 * R)
        S = np.sin(np.pi * np.outer(arg, k))  # (n, m)
        S[(arg <= 0) | (arg >= 1)] = 0.0
        return Field(spec, S @ coef @ S.T)
    if isinstance(init, FileInit):
        u = read_field(init.path)
        if u.spec != spec:
            raise ValueError(f"field in {init.path} is on {u.spec}, expected {spec}")
        return u
    raise TypeError(f"unknown init {init!r}")


@dataclass
class _State:
    u: np.ndarray
    s: _Scalars
    I: float
    g: np.ndarray
    d: np.ndarray  # preconditioned (and, in fiber mode, tangential) direction
    slope: float
    residual: float
    full_residual: float


class _Problem:
    def __init__(self, params: Params, kernel: LogKernel, mode: str):
        self.params = params
        self.kernel = kernel
        self.mode = mode
        self.spec = kernel.spec
        self.h = self.spec.spacing
        self.h2 = self.h**2
        self.a_vals = params.a.values_on(self.spec)
        self.abar = params.a.mean

    def project(self, v: np.ndarray) -> np.ndarray:
        u = Field(self.spec, v)
        if self.mode == NEHARI:
            _, u = nehari_project(u, self.params, self.kernel)
        else:
            _, u = fiber_project(u, self.params, self.kernel)
        return u.values

    def scalars(self, v: np.ndarray) -> _Scalars:
        return _scalars(v, self.params, self.kernel)

    def energy_change(self, st: _State, v: np.ndarray, s: _Scalars) -> float:
        return _energy_change(st.u, st.s, v, s, self.params, self.kernel)

    def state(self, v: np.ndarray, s: Optional[_Scalars] = None) -> _State:
        if s is None:
            s = _scalars(v, self.params, self.kernel)
        g = _gradient(v, s, self.params, self.kernel)
        G = _precondition(g, self.h, self.abar)
        unorm = np.sqrt(s.grad_sq + s.a_l2)
        full = np.sqrt(h1_norm_sq(G, self.a_vals, self.h)) / max(1.0, unorm)
        if self.mode == FIBER:
            gj = jk_gradient(v, s, self.params, self.kernel, self.params.fiber_k)
            Pj = _precondition(gj, self.h, self.abar)
            beta = np.sum(gj * G) / np.sum(gj * Pj)
            d = G - beta * Pj
            res = np.sqrt(h1_norm_sq(d, self.a_vals, self.h)) / max(1.0, unorm)
        else:
            d, res = G, full
        slope = self.h2 * float(np.sum(g * d))
        return _State(v, s, _energy(s, self.params), g, d, slope, float(res), float(full))


def _check_regime(params: Params, mode: str) -> None:
    if mode == NEHARI and not params.nehari_ok:
        raise RegimeViolation(params.nehari_violations()[0])
    if mode == FIBER and not params.fiber_ok:
        raise RegimeViolation("; ".join(params.fiber_violations()))


def solve_ground_state(
    params: Params,
    config: SolverConfig,
    spec: GridSpec,
    kernel: Optional[LogKernel] = None,
    u0: Optional[Field] = None,
) -> GroundStateResult:
    """Minimise the energy over the constraint set selected by ``config.mode``.

    Stops when the residual reaches ``config.tol`` or after ``config.max_iters``
    iterations, or when the line search can no longer make progress.  In fiber
    mode the residual is that of the tangential (constrained) gradient; the
    full residual is reported separately.
    """
    _check_regime(params, config.mode)
    kernel = kernel if kernel is not None else build_kernel(spec)
    if kernel.spec != spec:
        raise ValueError("kernel was built for a different grid")
    prob = _Problem(params, kernel, config.mode)

    u = u0 if u0 is not None else init_field(spec, config.init, params)
    try:
        v = prob.project(u.values)
    except NoNehariRoot as exc:
        raise NoNehariRoot(f"initial guess cannot be projected: {exc}") from None
    st = prob.state(v)
    history: list[tuple[float, float]] = []
    tau = config.step0
    converged = False
    message = ""
    rising = 0
    it = 0
    while True:
        history.append((st.I, st.residual))
        if st.residual <= config.tol:
            converged = True
            break
        if it >= config.max_iters:
            message = "max_iters reached"
            break
        it += 1
        tau = min(config.step0, tau / config.backtrack_ratio)
        accepted = None
        while tau > 1e-14:
            try:
                trial = prob.project(st.u - tau * st.d)
            except (NoNehariRoot, NoSignChange):
                tau *= config.backtrack_ratio
                continue
            s_trial = prob.scalars(trial)
            dI = prob.energy_change(st, trial, s_trial)
            if dI <= -config.armijo_c * tau * st.slope:
                accepted = (trial, s_trial, dI)
                break
            tau *= config.backtrack_ratio
        if accepted is None:
            message = "line search stalled"
            log.info("line search stalled at iteration %d (residual %.3e)", it, st.residual)
            break
        trial, s_trial, dI = accepted
        st = prob.state(trial, s_trial)
        rising = rising + 1 if dI > 0 else 0
        if rising >= DIVERGENCE_STREAK:
            raise Diverged(f"energy increased on {rising} consecutive accepted steps; grid too small?")

    v = st.u
    imax = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if v[imax] < 0:
        v = -v
    out = Field(spec, v)
    rep = energy_report(out, params, kernel)
    h1 = rep.h1_sq
    if config.mode == NEHARI:
        constraint = abs(rep.nehari) / h1
    else:
        constraint = abs(rep.J(params.fiber_k)) / h1
    sign_ok = bool(v.min() >= -1e-10 * v.max())
    if converged and constraint > 1e-8:
        converged = False
        message = f"constraint residual {constraint:.2e} above 1e-8"
    return GroundStateResult(
        field=out,
        report=rep,
        level=rep.I,
        residual=st.residual,
        nehari_residual=abs(rep.nehari) / h1,
        pohozaev_residual=abs(rep.P) / h1,
        constraint_residual=constraint,
        full_residual=st.full_residual,
        iters=it,
        converged=converged,
        mode=config.mode,
        params=params,
        sign_ok=sign_ok,
        history=history,
        message=message or ("converged" if converged else ""),
    )


def minimax_level(u: Field, params: Params, kernel: LogKernel, mode: str = NEHARI) -> float:
    """``sup_t I(t u)`` (Nehari mode) or ``sup_t psi_{u,k}(t)`` (fiber mode)."""
    s = FiberScalars.of(u, params, kernel)
    if mode == NEHARI:
        try:
            t = nehari_root(s, params)
        except NoNehariRoot:
            raise Unbounded("t -> I(tu) has no finite maximum") from None
        return phi(s, t, params)
    if mode == FIBER:
        k = params.fiber_k
        try:
            t = psi_root(s, k, params)
        except NoSignChange:
            raise Unbounded("psi_{u,k} has no interior maximum") from None
        return psi_eval(s, k, t, params)[0]
    raise ValueError(f"unknown mode {mode!r}")
