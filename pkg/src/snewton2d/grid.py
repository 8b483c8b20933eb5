"""Uniform cell-centred grids on [-L, L]^2 and the fields that live on them.

Every integral in the package uses the same rectangle rule ``h^2 * sum``, and the
H^1 seminorm is built from forward differences with zero extension outside the
grid.  With that pairing, summation by parts against the 5-point Laplacian is
exact, which is what makes the discrete energy gradient exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import BadExponent, CorruptField, GridMismatch, InvalidGrid, ZeroField

__all__ = [
    "GridSpec",
    "Field",
    "Coefficient",
    "NormReport",
    "make_grid",
    "integrate",
    "norms",
    "laplacian_apply",
    "recenter",
    "grad_sq_sum",
    "write_field",
    "read_field",
    "field_to_csv",
]


@dataclass(frozen=True)
class GridSpec:
    n: int
    half_width: float

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise InvalidGrid(f"n must be an integer, got {n!r}")
        if n < 8 or n & (n - 1):
            raise InvalidGrid(f"n must be a power of two >= 8, got {n}")
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise InvalidGrid(f"L must be positive, got {self.half_width!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def L(self) -> float:
        return self.half_width

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    h = spacing

    @property
    def axis(self) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        return -self.half_width + (np.arange(self.n) + 0.5) * self.spacing

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(x1, x2)`` arrays of shape ``(n, n)``; index ``[i, j]`` is cell ``(i, j)``."""
        ax = self.axis
        return np.meshgrid(ax, ax, indexing="ij")

    def radius(self, center=(0.0, 0.0)) -> np.ndarray:
        x1, x2 = self.coords()
        return np.hypot(x1 - center[0], x2 - center[1])

    def zeros(self) -> "Field":
        return Field(self, np.zeros((self.n, self.n)))

    def from_function(self, func) -> "Field":
        x1, x2 = self.coords()
        return Field(self, np.asarray(func(x1, x2), dtype=float) * np.ones((self.n, self.n)))


def make_grid(n: int, L: float) -> GridSpec:
    return GridSpec(n, L)


class Field:
    """Immutable real function sampled at the cell centres of a :class:`GridSpec`."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.shape != (spec.n, spec.n):
            raise GridMismatch(f"values have shape {arr.shape}, grid expects {(spec.n, spec.n)}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __repr__(self):
        return f"Field(n={self.spec.n}, L={self.spec.half_width}, max|u|={np.abs(self.values).max():.3g})"

    def _check(self, other: "Field") -> None:
        if self.spec != other.spec:
            raise GridMismatch(f"cannot combine fields on {self.spec} and {other.spec}")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.spec, self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.spec, self.values - other.values)
        return NotImplemented

    def __mul__(self, alpha):
        if isinstance(alpha, (int, float, np.floating, np.integer)):
            return Field(self.spec, float(alpha) * self.values)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.spec, -self.values)

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.values, other.values)

    __hash__ = None

    def with_values(self, values) -> "Field":
        return Field(self.spec, values)


class Coefficient:
    """Strictly positive coefficient ``a(x)``, either constant or sampled on a grid.

    Use :meth:`constant` or :meth:`sampled`; a bare positive float passed where a
    coefficient is expected is promoted by :func:`as_coefficient`.
    """

    __slots__ = ("_const", "_field")

    def __init__(self, const: float | None = None, field: Field | None = None):
        if (const is None) == (field is None):
            raise ValueError("give exactly one of const or field")
        if const is not None:
            const = float(const)
            if not np.isfinite(const) or const <= 0:
                raise ValueError(f"constant coefficient must be > 0, got {const}")
        else:
            if np.min(field.values) <= 0:
                raise ValueError("sampled coefficient must be strictly positive")
        self._const = const
        self._field = field

    @classmethod
    def constant(cls, a0: float) -> "Coefficient":
        return cls(const=a0)

    @classmethod
    def sampled(cls, field: Field) -> "Coefficient":
        return cls(field=field)

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    @property
    def mean(self) -> float:
        if self._const is not None:
            return self._const
        return float(np.mean(self._field.values))

    @property
    def minimum(self) -> float:
        if self._const is not None:
            return self._const
        return float(np.min(self._field.values))

    def values_on(self, spec: GridSpec):
        """Scalar for a constant coefficient, otherwise the sampled array."""
        if self._const is not None:
            return self._const
        if self._field.spec != spec:
            raise GridMismatch("sampled coefficient lives on a different grid")
        return self._field.values

    def __eq__(self, other):
        if not isinstance(other, Coefficient):
            return NotImplemented
        if self.is_constant or other.is_constant:
            return self._const == other._const
        return self._field == other._field

    def __hash__(self):
        if self.is_constant:
            return hash(self._const)
        return hash((self._field.spec, self._field.values.tobytes()))

    def to_json(self):
        if self._const is not None:
            return self._const
        return {"sampled": True, "mean": self.mean, "min": self.minimum}

    def __repr__(self):
        if self._const is not None:
            return f"Coefficient.constant({self._const})"
        return f"Coefficient.sampled(min={self.minimum:.3g})"


CoefficientLike = Union[Coefficient, float, int]


def as_coefficient(a: CoefficientLike) -> Coefficient:
    if isinstance(a, Coefficient):
        return a
    if isinstance(a, Field):
        return Coefficient.sampled(a)
    return Coefficient.constant(a)


def integrate(f: Field) -> float:
    h = f.spec.spacing
    return float(h * h * np.sum(f.values))


def _forward_diffs(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # zero padding on both ends gives n + 1 differences per line
    d1 = np.diff(u, axis=0, prepend=0.0, append=0.0)
    d2 = np.diff(u, axis=1, prepend=0.0, append=0.0)
    return d1, d2


def grad_sq_sum(u: np.ndarray) -> float:
    """``integral |grad u|^2`` for raw values: the h^2 from quadrature cancels 1/h^2."""
    d1, d2 = _forward_diffs(u)
    return float(np.sum(d1 * d1) + np.sum(d2 * d2))


@dataclass(frozen=True)
class NormReport:
    l2: float
    lp: float
    lq: float
    weighted: float
    h1_sq: float
    grad_sq: float
    a_l2: float

    @property
    def h1(self) -> float:
        return float(np.sqrt(self.h1_sq))


def norms(u: Field, p: float, q: float, a: CoefficientLike = 1.0) -> NormReport:
    """All norms used by the variational setting in one sweep.

    ``weighted`` is ``(integral log(1 + |x|) |u|^p)^(1/p)``, the extra norm that
    makes the logarithmic energy finite.
    """
    if p < 2 or q < 2:
        raise BadExponent(f"need p >= 2 and q >= 2, got p={p}, q={q}")
    spec = u.spec
    h2 = spec.spacing**2
    v = u.values
    av = np.abs(v)
    a_vals = as_coefficient(a).values_on(spec)
    r = spec.radius()
    lp_p = h2 * np.sum(av**p)
    grad_sq = grad_sq_sum(v)
    a_l2 = float(h2 * np.sum(a_vals * v * v))
    return NormReport(
        l2=float(np.sqrt(h2 * np.sum(v * v))),
        lp=float(lp_p ** (1.0 / p)),
        lq=float((h2 * np.sum(av**q)) ** (1.0 / q)),
        weighted=float((h2 * np.sum(np.log1p(r) * av**p)) ** (1.0 / p)),
        h1_sq=grad_sq + a_l2,
        grad_sq=grad_sq,
        a_l2=a_l2,
    )


def _laplacian(v: np.ndarray, h: float) -> np.ndarray:
    out = -4.0 * v
    out[1:, :] += v[:-1, :]
    out[:-1, :] += v[1:, :]
    out[:, 1:] += v[:, :-1]
    out[:, :-1] += v[:, 1:]
    return out / (h * h)


def laplacian_apply(u: Field) -> Field:
    """5-point Laplacian with zero values outside the grid.

    Returns ``Delta_h u`` (not its negative).
    """
    return Field(u.spec, _laplacian(u.values, u.spec.spacing))


def _shift(v: np.ndarray, s1: int, s2: int) -> np.ndarray:
    n = v.shape[0]
    out = np.zeros_like(v)
    if abs(s1) >= n or abs(s2) >= n:
        return out
    src1 = slice(max(0, -s1), n - max(0, s1))
    dst1 = slice(max(0, s1), n - max(0, -s1))
    src2 = slice(max(0, -s2), n - max(0, s2))
    dst2 = slice(max(0, s2), n - max(0, -s2))
    out[dst1, dst2] = v[src1, src2]
    return out


def mass_center(u: Field, power: float = 2.0) -> tuple[float, float]:
    w = np.abs(u.values) ** power
    total = w.sum()
    if total <= 0:
        raise ZeroField("field is identically zero")
    x1, x2 = u.spec.coords()
    return float((w * x1).sum() / total), float((w * x2).sum() / total)


def recenter(u: Field) -> tuple[Field, tuple[float, float], tuple[int, int]]:
    """Translate ``u`` by whole cells so the centre of mass of ``u^2`` is near the origin.

    Returns the shifted field, the residual (sub-cell) centre after the shift, and
    the applied shift in cells.  Cells uncovered by the shift are zero filled.
    """
    c1, c2 = mass_center(u, 2.0)
    h = u.spec.spacing
    s1, s2 = -int(np.rint(c1 / h)), -int(np.rint(c2 / h))
    shifted = Field(u.spec, _shift(u.values, s1, s2))
    return shifted, (c1 + s1 * h, c2 + s2 * h), (s1, s2)


# -- serialization ---------------------------------------------------------

_HEADER = struct.Struct("<qd")


def write_field(path, u: Field) -> None:
    """Write ``(n, L)`` as little-endian int64/float64, then row-major float64 values."""
    data = _HEADER.pack(u.spec.n, u.spec.half_width) + u.values.astype("<f8").tobytes(order="C")
    Path(path).write_bytes(data)


def read_field(path) -> Field:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptField(f"corrupt field: {path} is shorter than its header")
    n, L = _HEADER.unpack_from(raw)
    try:
        spec = GridSpec(int(n), float(L))
    except InvalidGrid as exc:
        raise CorruptField(f"corrupt field: bad header in {path} ({exc})") from None
    body = raw[_HEADER.size:]
    if len(body) != 8 * spec.n * spec.n:
        raise CorruptField(
            f"corrupt field: {path} holds {len(body)} value bytes, expected {8 * spec.n * spec.n}"
        )
    values = np.frombuffer(body, dtype="<f8").reshape(spec.n, spec.n)
    try:
        return Field(spec, values)
    except ValueError as exc:
        raise CorruptField(f"corrupt field: {exc}") from None


def field_to_csv(path, u: Field) -> None:
    x1, x2 = u.spec.coords()
    table = np.column_stack([x1.ravel(), x2.ravel(), u.values.ravel()])
    np.savetxt(path, table, delimiter=",", header="x1,x2,value", comments="", fmt="%.17g")
