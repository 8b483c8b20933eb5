import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snewton2d.errors import BadExponent, CorruptField, GridMismatch, InvalidGrid, ZeroField
from snewton2d.grid import (
    Coefficient,
    Field,
    field_to_csv,
    integrate,
    laplacian_apply,
    make_grid,
    norms,
    read_field,
    recenter,
    write_field,
)

from conftest import gaussian, random_field


def test_make_grid_basic():
    g = make_grid(8, 4.0)
    assert g.spacing == 1.0
    x1, x2 = g.coords()
    assert (x1[0, 0], x2[0, 0]) == (-3.5, -3.5)
    assert make_grid(256, 12).spacing == 0.09375


@pytest.mark.parametrize("n, L", [(7, 4.0), (4, 1.0), (12, 1.0), (8, 0.0), (8, -1.0), (8, float("nan"))])
def test_make_grid_rejects(n, L):
    with pytest.raises(InvalidGrid):
        make_grid(n, L)


def test_cell_centres_inside():
    g = make_grid(16, 3.0)
    assert g.axis.min() > -3.0 and g.axis.max() < 3.0


def test_field_is_immutable_and_finite(grid16):
    u = grid16.zeros()
    with pytest.raises(ValueError):
        u.values[0, 0] = 1.0
    with pytest.raises(AttributeError):
        u.spec = None
    bad = np.zeros((16, 16))
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        Field(grid16, bad)


def test_field_grid_mismatch(grid16, grid32):
    with pytest.raises(GridMismatch):
        grid16.zeros() + grid32.zeros()
    with pytest.raises(GridMismatch):
        Field(grid16, np.zeros((8, 8)))


def test_integrate_examples(grid256):
    g = make_grid(8, 4.0)
    assert integrate(g.from_function(lambda x, y: 1.0)) == 64.0
    assert integrate(g.zeros()) == 0.0
    u = grid256.from_function(lambda x, y: np.exp(-2 * (x * x + y * y)))
    assert abs(integrate(u) - np.pi / 2) <= 1e-10


def test_integrate_linear(grid16, rng):
    f, g = random_field(grid16, rng, smooth=False), random_field(grid16, rng, smooth=False)
    a, b = 1.7, -0.3
    lhs = integrate(a * f + b * g)
    rhs = a * integrate(f) + b * integrate(g)
    assert abs(lhs - rhs) <= 1e-13 * (abs(a * integrate(f)) + abs(b * integrate(g)) + 1)


def test_norms_zero(grid16):
    r = norms(grid16.zeros(), 2, 4)
    assert r.l2 == r.lp == r.lq == r.weighted == r.h1_sq == 0.0


def test_norms_single_cell():
    g = make_grid(8, 4.0)
    v = np.zeros((8, 8))
    v[4, 4] = 3.0
    x1, x2 = g.coords()
    r = norms(Field(g, v), 3, 4)
    expect = g.spacing**2 * np.log1p(np.hypot(x1[4, 4], x2[4, 4])) * 3.0**3
    assert r.weighted**3 == pytest.approx(expect, rel=1e-14)


def test_norms_gaussian_l2(grid256):
    r = norms(gaussian(grid256), 2, 4, a=1.0)
    assert abs(r.l2**2 - np.pi / 2) <= 1e-6


def test_norms_bad_exponent(grid16):
    with pytest.raises(BadExponent):
        norms(grid16.zeros(), 1.5, 4)
    with pytest.raises(BadExponent):
        norms(grid16.zeros(), 2, 1.0)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(min_value=-20, max_value=20).filter(lambda a: abs(a) > 1e-3), seed=st.integers(0, 2**31))
def test_norms_homogeneous(alpha, seed):
    g = make_grid(16, 4.0)
    u = random_field(g, np.random.default_rng(seed), smooth=False)
    r0, r1 = norms(u, 3, 5), norms(alpha * u, 3, 5)
    for name in ("l2", "lp", "lq", "weighted"):
        assert getattr(r1, name) == pytest.approx(abs(alpha) * getattr(r0, name), rel=1e-12)
    assert r1.h1_sq == pytest.approx(alpha**2 * r0.h1_sq, rel=1e-12)


def test_laplacian_interior_examples():
    g = make_grid(16, 4.0)
    inner = (slice(1, -1), slice(1, -1))
    for f in (lambda x, y: 2.5 + 0 * x, lambda x, y: x, lambda x, y: 3 * x - 2 * y + 1):
        lap = laplacian_apply(g.from_function(f)).values
        assert np.max(np.abs(lap[inner])) <= 1e-12
    lap = laplacian_apply(g.from_function(lambda x, y: (x * x + y * y) / 4)).values
    assert np.max(np.abs(lap[inner] - 1.0)) <= 1e-12


def test_summation_by_parts(grid32, rng):
    u = random_field(grid32, rng, smooth=False)
    r = norms(u, 2, 2)
    lhs = -integrate(Field(grid32, laplacian_apply(u).values * u.values))
    assert lhs == pytest.approx(r.grad_sq, rel=1e-12)


def test_recenter_examples(grid32):
    h = grid32.spacing
    shifted, c, s = recenter(gaussian(grid32))
    assert s == (0, 0)
    u = gaussian(grid32, center=(3 * h, -2 * h))
    shifted, c, s = recenter(u)
    assert s == (-3, 2)
    assert np.hypot(*c) <= h
    # exposed boundary cells are zero filled; the Gaussian is ~1e-10 there
    np.testing.assert_allclose(shifted.values, gaussian(grid32).values, atol=1e-9)
    with pytest.raises(ZeroField):
        recenter(grid32.zeros())


def test_shift_preserves_norms(grid32):
    h = grid32.spacing
    u = gaussian(grid32, sigma=0.6, center=(1.5 * h + 0.3, -0.7))
    shifted, _, s = recenter(u)
    assert s != (0, 0)
    a, b = norms(u, 2, 4), norms(shifted, 2, 4)
    for name in ("l2", "lp", "lq", "h1_sq", "grad_sq"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-12)


def test_coefficient():
    g = make_grid(8, 1.0)
    c = Coefficient.constant(2.0)
    assert c.is_constant and c.mean == 2.0
    s = Coefficient.sampled(g.from_function(lambda x, y: 1.5 + np.cos(x) ** 2))
    assert not s.is_constant and s.minimum >= 1.5
    assert s == Coefficient.sampled(g.from_function(lambda x, y: 1.5 + np.cos(x) ** 2))
    with pytest.raises(ValueError):
        Coefficient.constant(0.0)
    with pytest.raises(ValueError):
        Coefficient.sampled(g.from_function(lambda x, y: x))


def test_field_io_roundtrip(tmp_path, grid16, rng):
    u = random_field(grid16, rng, smooth=False)
    write_field(tmp_path / "u.bin", u)
    assert read_field(tmp_path / "u.bin") == u
    raw = (tmp_path / "u.bin").read_bytes()
    (tmp_path / "cut.bin").write_bytes(raw[:-5])
    with pytest.raises(CorruptField, match="corrupt field"):
        read_field(tmp_path / "cut.bin")
    (tmp_path / "tiny.bin").write_bytes(raw[:6])
    with pytest.raises(CorruptField):
        read_field(tmp_path / "tiny.bin")
    field_to_csv(tmp_path / "u.csv", u)
    table = np.loadtxt(tmp_path / "u.csv", delimiter=",", skiprows=1)
    assert table.shape == (256, 3)
    np.testing.assert_array_equal(table[:, 2], u.values.ravel())
