import numpy as np
import pytest

from snewton2d.grid import Field, make_grid
from snewton2d.logpotential import build_kernel


def random_field(spec, rng, smooth=True, decay=True):
    """Random test field; smooth ones are Gaussian mixtures, rough ones are noise."""
    if not smooth:
        return Field(spec, rng.standard_normal((spec.n, spec.n)))
    x1, x2 = spec.coords()
    L = spec.half_width
    v = np.zeros_like(x1)
    for _ in range(rng.integers(1, 4)):
        c = rng.uniform(-0.3 * L, 0.3 * L, 2)
        w = rng.uniform(0.15, 0.35) * L
        v += rng.uniform(0.3, 1.5) * np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / w**2)
    if not decay:
        v += 0.1 * rng.standard_normal(v.shape)
    return Field(spec, v)


def gaussian(spec, sigma=1.0, center=(0.0, 0.0), amp=1.0):
    return spec.from_function(lambda x1, x2: amp * np.exp(-((x1 - center[0]) ** 2 + (x2 - center[1]) ** 2) / sigma**2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16, 4.0)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32, 6.0)


@pytest.fixture(scope="session")
def kernel16(grid16):
    return build_kernel(grid16)


@pytest.fixture(scope="session")
def kernel32(grid32):
    return build_kernel(grid32)


@pytest.fixture(scope="session")
def grid256():
    return make_grid(256, 12.0)


@pytest.fixture(scope="session")
def kernel256(grid256):
    return build_kernel(grid256)


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record(tag: str, ok: bool, detail: str) -> bool:
    """Log one acceptance line; it is printed again in the terminal summary."""
    line = f"{tag:<4} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
