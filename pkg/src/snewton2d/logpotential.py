"""Free-space convolution with the logarithmic kernel and the V0/V1/V2 functionals.

The kernel ``log|x - y|`` is sampled at every cell offset.  At offset zero the
sample is replaced by the cell average of ``log|x|`` over one cell, which is
finite because the singularity is integrable in two dimensions.  The same is
done for the two pieces of the split ``log|d| = log(1 + |d|) - log(1 + 1/|d|)``
so that ``V0 = V1 - V2`` also holds on the grid.

Convolutions are linear (zero padded to ``2n x 2n``) and evaluated with real
FFTs; the kernel transforms are computed once per grid and never mutated, so a
single :class:`LogKernel` can be shared between threads.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import integrate as sint

from .errors import BadExponent, GridMismatch, GridTooLarge
from .grid import Field, GridSpec

__all__ = [
    "LogKernel",
    "VSplit",
    "cell_average",
    "build_kernel",
    "conv_log",
    "potential_w",
    "v_split",
    "direct_v0_oracle",
]

# radial antiderivatives  R -> int_0^R f(r) r dr
_ANTIDERIV = {
    "log": lambda R: 0.5 * R * R * np.log(R) - 0.25 * R * R,
    "log1p": lambda R: 0.5 * (R * R - 1.0) * np.log1p(R) - 0.25 * R * R + 0.5 * R,
}


def cell_average(kind: str, h: float) -> float:
    """Average of a radial kernel over the square cell ``[-h/2, h/2]^2``.

    ``kind`` is ``"log"`` (log r), ``"log1p"`` (log(1 + r)) or ``"log1p_inv"``
    (log(1 + 1/r)).  The radial integral is done in closed form and the angular
    one by adaptive quadrature over the eighth of the square with
    ``0 <= theta <= pi/4``.
    """
    if kind == "log1p_inv":
        return cell_average("log1p", h) - cell_average("log", h)
    F = _ANTIDERIV[kind]
    half = 0.5 * h
    val, _ = sint.quad(lambda th: F(half / np.cos(th)), 0.0, np.pi / 4, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(8.0 * val / (h * h))


@dataclass(frozen=True)
class VSplit:
    v0: float
    v1: float
    v2: float

    def to_json(self) -> dict:
        return {"v0": self.v0, "v1": self.v1, "v2": self.v2}


def _offsets(n: int, h: float) -> np.ndarray:
    """|delta| for every offset in circular (FFT) layout of a 2n x 2n array."""
    idx = np.fft.fftfreq(2 * n, d=1.0 / (2 * n))
    i, j = np.meshgrid(idx, idx, indexing="ij")
    return h * np.hypot(i, j)


class LogKernel:
    """Sampled ``log|delta|`` on a grid's offset lattice, with cached transforms.

    ``samples[i % 2n, j % 2n]`` is the kernel at offset ``(i h, j h)``.
    ``k0`` overrides the zero-offset value; the V1/V2 zero-offset values are
    shifted together so that the split identity keeps holding.
    """

    def __init__(self, spec: GridSpec, k0: float | None = None):
        n, h = spec.n, spec.spacing
        r = _offsets(n, h)
        with np.errstate(divide="ignore"):
            k = np.log(r)
            k2 = np.log1p(1.0 / r)
        k1 = np.log1p(r)
        k0_default = cell_average("log", h)
        k1[0, 0] = cell_average("log1p", h)
        k2[0, 0] = k1[0, 0] - k0_default
        if k0 is None:
            k0 = k0_default
        else:
            # keep V0 = V1 - V2 by moving the override into the singular part
            k2[0, 0] = k1[0, 0] - float(k0)
        k[0, 0] = float(k0)

        self.spec = spec
        self.k0 = float(k0)
        self.samples = k
        self.samples_far = k1
        self.samples_near = k2
        shape = (2 * n, 2 * n)
        self._hat = {
            "log": sfft.rfft2(k, s=shape),
            "log1p": sfft.rfft2(k1, s=shape),
            "log1p_inv": sfft.rfft2(k2, s=shape),
        }
        for arr in (k, k1, k2, *self._hat.values()):
            arr.setflags(write=False)

    def value(self, i: int, j: int) -> float:
        """Kernel sample at the offset of ``i`` and ``j`` cells."""
        m = 2 * self.spec.n
        return float(self.samples[i % m, j % m])

    def convolve(self, f: np.ndarray, which: str = "log") -> np.ndarray:
        """``h^2 * sum_y K(x - y) f(y)`` for a raw ``n x n`` array."""
        n, h = self.spec.n, self.spec.spacing
        fhat = sfft.rfft2(f, s=(2 * n, 2 * n))
        g = sfft.irfft2(fhat * self._hat[which], s=(2 * n, 2 * n))
        return (h * h) * g[:n, :n]


@functools.lru_cache(maxsize=16)
def _cached_kernel(spec: GridSpec) -> LogKernel:
    return LogKernel(spec)


def build_kernel(spec: GridSpec, k0: float | None = None) -> LogKernel:
    """Kernel for ``spec``.  Default kernels are cached per grid."""
    if k0 is None:
        return _cached_kernel(spec)
    return LogKernel(spec, k0)


def _check(f: Field, kernel: LogKernel) -> None:
    if f.spec != kernel.spec:
        raise GridMismatch("field and kernel are on different grids")


def _check_p(p: float) -> None:
    if p < 2:
        raise BadExponent(f"need p >= 2, got {p}")


def conv_log(f: Field, kernel: LogKernel) -> Field:
    _check(f, kernel)
    return Field(f.spec, kernel.convolve(f.values))


def potential_w(u: Field, p: float, kernel: LogKernel) -> Field:
    """``w = (1/2 pi) log|.| * |u|^p``."""
    _check_p(p)
    _check(u, kernel)
    return Field(u.spec, kernel.convolve(np.abs(u.values) ** p) / (2.0 * np.pi))


def v_split(u: Field, p: float, kernel: LogKernel) -> VSplit:
    _check_p(p)
    _check(u, kernel)
    h2 = u.spec.spacing ** 2
    f = np.abs(u.values) ** p
    v0, v1, v2 = (float(h2 * np.sum(f * kernel.convolve(f, w))) for w in ("log", "log1p", "log1p_inv"))
    return VSplit(v0, v1, v2)


def direct_v0_oracle(u: Field, p: float) -> VSplit:
    """Brute-force double sums over all cell pairs (``n <= 32`` only).

    Uses the same cell-averaged zero-offset convention as :class:`LogKernel` but
    none of its FFT machinery.
    """
    _check_p(p)
    spec = u.spec
    if spec.n > 32:
        raise GridTooLarge(f"direct oracle is O(n^4); n={spec.n} > 32")
    h = spec.spacing
    x1, x2 = (c.ravel() for c in spec.coords())
    d = np.hypot(x1[:, None] - x1[None, :], x2[:, None] - x2[None, :])
    diag = np.eye(d.shape[0], dtype=bool)
    d_safe = np.where(diag, 1.0, d)
    k1 = np.where(diag, cell_average("log1p", h), np.log1p(d_safe))
    k2 = np.where(diag, cell_average("log1p_inv", h), np.log1p(1.0 / d_safe))
    k0 = np.where(diag, cell_average("log", h), np.log(d_safe))
    f = np.abs(u.values.ravel()) ** p
    h4 = h**4
    return VSplit(float(h4 * f @ k0 @ f), float(h4 * f @ k1 @ f), float(h4 * f @ k2 @ f))
