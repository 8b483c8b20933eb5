import csv
import json

import numpy as np
import pytest

from snewton2d.diagnostics import (
    consistency_suite,
    decay_fit,
    diagnostics_summary,
    far_field_check,
    sign_check,
    symmetry_report,
    write_profile_csv,
)
from snewton2d.energy import Params
from snewton2d.errors import NotConverged, RegimeMismatch, WindowEmpty, ZeroField
from snewton2d.grid import Field, make_grid
from snewton2d.logpotential import build_kernel
from snewton2d.solver import FIBER, SolverConfig, solve_ground_state

from conftest import gaussian


@pytest.fixture(scope="module")
def spec():
    return make_grid(128, 12.0)


@pytest.fixture(scope="module")
def kern(spec):
    return build_kernel(spec)


def test_symmetry_gaussian(spec):
    rep = symmetry_report(gaussian(spec))
    assert rep.angular_rel_dev <= 1e-2
    assert rep.monotone_violations == 0
    assert rep.shift == (0, 0)
    assert rep.radial_profile[0][0] < spec.spacing
    assert rep.radial_profile[-1][0] <= 0.8 * spec.half_width


def test_symmetry_detects_dipole(spec):
    u = spec.from_function(lambda x, y: np.exp(-(x * x + y * y)) * (1 + 0.5 * x))
    rep = symmetry_report(u)
    assert rep.monotone_violations > 0 or rep.angular_rel_dev > 0.1


def test_symmetry_translation(spec):
    h = spec.spacing
    a = symmetry_report(gaussian(spec))
    b = symmetry_report(gaussian(spec, center=(4 * h, -7 * h)))
    assert b.shift == (-4, 7)
    assert b.angular_rel_dev == pytest.approx(a.angular_rel_dev, rel=1e-10, abs=1e-12)
    np.testing.assert_allclose(np.array(b.radial_profile), np.array(a.radial_profile), rtol=1e-10, atol=1e-14)


def test_symmetry_zero(spec):
    with pytest.raises(ZeroField):
        symmetry_report(spec.zeros())


def test_decay_exponential(spec):
    u = spec.from_function(lambda x, y: np.exp(-2 * np.hypot(x, y)))
    fit = decay_fit(u)
    assert fit.A == pytest.approx(2.0, abs=1e-3)
    assert fit.r2 >= 0.9999
    assert fit.window == (0.3 * 12, 0.7 * 12)


def test_decay_gaussian_positive(spec):
    fit = decay_fit(spec.from_function(lambda x, y: np.exp(-0.05 * (x * x + y * y))))
    assert fit.A > 0


def test_decay_window_empty(spec):
    with pytest.raises(WindowEmpty):
        decay_fit(gaussian(spec, sigma=0.3))


def test_far_field_point_mass(spec, kern):
    h = spec.spacing
    v = np.zeros((128, 128))
    v[64, 64] = 1.0 / h  # |u|^2 has unit mass in one cell
    assert far_field_check(Field(spec, v), 2, kern) <= 1e-12


def test_far_field_zero_and_gaussian(spec, kern):
    assert far_field_check(spec.zeros(), 2, kern) == 0.0
    assert far_field_check(gaussian(make_grid(256, 12.0)), 2, build_kernel(make_grid(256, 12.0))) <= 1e-3


def test_far_field_shrinks_with_L():
    # same cell size, larger box: the annulus moves outward
    devs = []
    for n, L in ((64, 3.0), (128, 6.0)):
        s = make_grid(n, L)
        devs.append(far_field_check(gaussian(s, sigma=1.0), 2, build_kernel(s)))
    assert devs[1] < devs[0]


def test_sign_check(spec):
    u = gaussian(spec)
    assert sign_check(u)
    assert not sign_check(u - 1e-6 * gaussian(spec, center=(5.0, 5.0), sigma=0.3) * 1e3)


@pytest.fixture(scope="module")
def pair():
    s = make_grid(64, 12.0)
    k = build_kernel(s)
    a = solve_ground_state(Params(), SolverConfig(tol=1e-9), s, k)
    b = solve_ground_state(Params(), SolverConfig(mode=FIBER, tol=1e-9), s, k)
    return a, b


def test_consistency_suite(pair):
    a, b = pair
    rep = consistency_suite(a, b)
    assert rep["relative_gap"] <= 1e-2
    assert rep["sign_ok_nehari"] and rep["sign_ok_fiber"]
    assert consistency_suite(a, a)["relative_gap"] == 0.0


def test_consistency_refusals(pair):
    a, b = pair
    from dataclasses import replace

    with pytest.raises(NotConverged):
        consistency_suite(replace(a, converged=False), b)
    with pytest.raises(RegimeMismatch):
        consistency_suite(a, replace(b, params=Params(b=2.0)))


def test_summary_and_csv(tmp_path, pair, spec):
    a, _ = pair
    d = diagnostics_summary(a.field, 2, build_kernel(a.field.spec))
    json.dumps(d)
    assert set(d) == {"sign_ok", "min_over_max", "symmetry", "decay", "far_field"}
    write_profile_csv(tmp_path / "p.csv", symmetry_report(a.field))
    rows = list(csv.reader(open(tmp_path / "p.csv")))
    assert rows[0] == ["radius", "mean", "max_deviation"]
    assert len(rows) > 10
