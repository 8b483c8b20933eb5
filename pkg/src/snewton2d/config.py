"""Plain-text run configuration: one ``key = value`` per line, ``#`` comments.

Run keys (defaults in brackets)::

    p [2]  q [4]  gamma [1]  b [1]  a [1]
    n [256]  L [12]
    mode [nehari]        nehari | fiber
    tol [1e-6]  max_iters [2000]  step0 [1.0]  armijo_c [1e-4]  backtrack_ratio [0.5]
    init [gaussian]      gaussian | random | file
    amplitude [1]  width [1]  center [0, 0]   (gaussian)
    seed [0]                                  (random)
    init_file                                 (file; relative to the config file)
    diagnostics [true]
    output [out]         relative to the config file

A sweep file uses the same keys; ``n``, ``L`` and ``seed`` may hold
comma-separated lists, and ``workers`` sets the thread count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

from .energy import Params
from .errors import BadExponent, ConfigError, InvalidGrid
from .grid import GridSpec
from .solver import FIBER, MODES, NEHARI, FileInit, GaussianInit, RandomInit, SolverConfig

__all__ = ["RunConfig", "parse_kv", "load_run_config", "load_sweep_config", "run_config_from_kv"]

RUN_KEYS = {
    "p", "q", "gamma", "b", "a", "n", "L", "mode", "tol", "max_iters", "step0", "armijo_c",
    "backtrack_ratio", "init", "amplitude", "width", "center", "seed", "init_file",
    "diagnostics", "output",
}
SWEEP_KEYS = RUN_KEYS | {"workers"}


@dataclass(frozen=True)
class RunConfig:
    params: Params
    grid: GridSpec
    solver: SolverConfig
    diagnostics: bool = True
    output: Path = field(default_factory=lambda: Path("out"))
    seed: int | None = None

    def to_json(self) -> dict:
        init = self.solver.init
        if isinstance(init, GaussianInit):
            init_d = {"kind": "gaussian", "amplitude": init.amplitude, "width": init.width, "center": list(init.center)}
        elif isinstance(init, RandomInit):
            init_d = {"kind": "random", "seed": init.seed, "modes": init.modes, "radius": init.radius}
        else:
            init_d = {"kind": "file", "path": str(init.path)}
        return {
            "params": self.params.to_json(),
            "grid": {"n": self.grid.n, "L": self.grid.half_width},
            "solver": {
                "mode": self.solver.mode,
                "tol": self.solver.tol,
                "max_iters": self.solver.max_iters,
                "step0": self.solver.step0,
                "armijo_c": self.solver.armijo_c,
                "backtrack_ratio": self.solver.backtrack_ratio,
                "init": init_d,
            },
            "diagnostics": self.diagnostics,
        }


def parse_kv(text: str, allowed: set[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _num(kv, key, default, cast=float):
    if key not in kv:
        return default
    try:
        return cast(kv[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {kv[key]!r} as {cast.__name__}") from None


def _bool(kv, key, default):
    if key not in kv:
        return default
    v = kv[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {kv[key]!r}")


def run_config_from_kv(kv: dict[str, str], base: Path) -> RunConfig:
    try:
        params = Params(
            p=_num(kv, "p", 2.0),
            q=_num(kv, "q", 4.0),
            gamma=_num(kv, "gamma", 1.0),
            b=_num(kv, "b", 1.0),
            a=_num(kv, "a", 1.0),
        )
    except (BadExponent, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    try:
        grid = GridSpec(_num(kv, "n", 256, int), _num(kv, "L", 12.0))
    except InvalidGrid as exc:
        raise ConfigError(str(exc)) from None

    mode = kv.get("mode", NEHARI).lower()
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    if mode == NEHARI and not params.nehari_ok:
        raise ConfigError(params.nehari_violations()[0])
    if mode == FIBER and not params.fiber_ok:
        raise ConfigError("; ".join(params.fiber_violations()))

    kind = kv.get("init", "gaussian").lower()
    seed = None
    if kind == "gaussian":
        center = kv.get("center", "0, 0").split(",")
        if len(center) != 2:
            raise ConfigError("center: expected two comma-separated numbers")
        try:
            c = (float(center[0]), float(center[1]))
        except ValueError:
            raise ConfigError(f"center: cannot parse {kv['center']!r}") from None
        init = GaussianInit(_num(kv, "amplitude", 1.0), _num(kv, "width", 1.0), c)
        if init.amplitude == 0:
            raise ConfigError("amplitude must be nonzero")
    elif kind == "random":
        seed = _num(kv, "seed", 0, int)
        init = RandomInit(seed)
    elif kind == "file":
        if "init_file" not in kv:
            raise ConfigError("init = file needs init_file")
        init = FileInit(str(base / kv["init_file"]))
    else:
        raise ConfigError(f"init must be gaussian, random or file, got {kind!r}")

    try:
        solver = SolverConfig(
            mode=mode,
            max_iters=_num(kv, "max_iters", 2000, int),
            tol=_num(kv, "tol", 1e-6),
            step0=_num(kv, "step0", 1.0),
            armijo_c=_num(kv, "armijo_c", 1e-4),
            backtrack_ratio=_num(kv, "backtrack_ratio", 0.5),
            init=init,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        params=params,
        grid=grid,
        solver=solver,
        diagnostics=_bool(kv, "diagnostics", True),
        output=base / kv.get("output", "out"),
        seed=seed,
    )


def _read(path) -> str:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        return path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def load_run_config(path) -> tuple[RunConfig, str]:
    """Parse a run config; returns it with the verbatim text for archiving."""
    text = _read(path)
    kv = parse_kv(text, RUN_KEYS)
    return run_config_from_kv(kv, Path(path).resolve().parent), text


def _list(kv, key, cast):
    raw = kv.get(key)
    if raw is None:
        return None
    items = [s.strip() for s in raw.split(",") if s.strip()]
    try:
        return [cast(s) for s in items]
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def load_sweep_config(path) -> tuple[list[RunConfig], int, Path]:
    """Expand a sweep file into its runs (cartesian product over n, L, seed)."""
    text = _read(path)
    kv = parse_kv(text, SWEEP_KEYS)
    base = Path(path).resolve().parent
    ns = _list(kv, "n", int)
    Ls = _list(kv, "L", float)
    seeds = _list(kv, "seed", int)
    for key, vals in (("n", ns), ("L", Ls), ("seed", seeds)):
        if vals is not None and not vals:
            raise ConfigError(f"empty sweep list for {key}")
    workers = _num(kv, "workers", 1, int)
    runs = []
    for n, L, seed in itertools.product(ns or [256], Ls or [12.0], seeds or [None]):
        sub = {k: v for k, v in kv.items() if k not in ("n", "L", "seed", "workers")}
        sub["n"], sub["L"] = str(n), repr(L)
        if seed is not None:
            sub["seed"] = str(seed)
            sub.setdefault("init", "random")
        runs.append(run_config_from_kv(sub, base))
    if not runs:
        raise ConfigError("sweep is empty")
    return runs, max(1, workers), base / kv.get("output", "sweep_out")
