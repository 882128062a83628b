import math
import zlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reflect_kernel.characters import enumerate_characters, find_character, sgn_character, trivial_character
from reflect_kernel.errors import InvalidArgumentError
from reflect_kernel.ibvp import (BoundaryPartition, HeatQuadrature, boundary_check, chapman_kolmogorov,
                                 heat_residual, initial_datum, mass, outside_ball_mass, solution_boundary_check, solve_heat,
                                 solve_heat_unfolded)
from reflect_kernel.suites import sample_chamber


def test_constant_datum_is_preserved(groups):
    for name, x in (("half", [0.7]), ("orthant2", [0.4, 1.1]), ("D3", [1.0, 0.1]), ("D4", [1.0, 0.2])):
        g = groups[name]
        one = initial_datum("one", g.dimension)
        assert solve_heat(g, trivial_character(g), one, 0.5, x) == pytest.approx(1.0, abs=1e-10), name


def test_half_line_dirichlet_mass_is_erf():
    from reflect_kernel.suites import named_group
    g = named_group("half")
    assert mass(g, sgn_character(g), 1.0, [1.0]) == pytest.approx(math.erf(0.5), abs=1e-12)


def test_short_time_solution_approaches_datum(groups):
    g = groups["D4"]
    f = initial_datum("gauss", 2, c=[1.5, 0.4], w=0.5)
    x = np.array([1.4, 0.5])
    for chi in enumerate_characters(g):
        assert abs(solve_heat(g, chi, f, 1e-4, x) - f(x)) < 1e-3


@pytest.mark.parametrize("name", ["half", "orthant2", "D3", "D4", "D6"])
@pytest.mark.parametrize("datum", ["gauss", "poly_gauss", "smooth_ball"])
def test_unfolded_solution_matches(groups, name, datum):
    g = groups[name]
    # the default panels resolve features of width about 0.3 at t = 0.3
    f = initial_datum(datum, g.dimension, c=0.8, w=0.3)
    rng = np.random.default_rng(zlib.crc32(f"{name}/{datum}".encode()))
    (x,) = sample_chamber(g, 1, rng, r_range=(0.3, 1.5), margin=0.0)
    t = 0.3
    for chi in enumerate_characters(g):
        a = solve_heat(g, chi, f, t, x)
        b = solve_heat_unfolded(g, chi, f, t, x)
        assert abs(a - b) < 1e-8, chi.name


def test_unfolded_solution_for_orthant3(groups):
    g = groups["orthant3"]
    f = initial_datum("gauss", 3, c=0.8)
    x = np.array([0.5, 0.9, 0.3])
    q = HeatQuadrature(radius_scale=9.0, panel_scale=3.0)
    for chi in (trivial_character(g), sgn_character(g)):
        assert abs(solve_heat(g, chi, f, 0.2, x, q) - solve_heat_unfolded(g, chi, f, 0.2, x, q)) < 1e-8


def test_maximum_principle(groups):
    g = groups["D3"]
    f = initial_datum("smooth_ball", 2, c=[1.0, 0.0], r=0.5)
    rng = np.random.default_rng(2)
    pts = sample_chamber(g, 10, rng, r_range=(0.1, 2.5), margin=0.0)
    for chi in enumerate_characters(g):
        vals = [solve_heat(g, chi, f, 0.2, x) for x in pts]
        assert max(vals) <= 1 + 1e-10 and min(vals) >= -1e-10


def test_mass_decreases_with_dirichlet_walls(groups):
    g = groups["D4"]
    x = [0.8, 0.15]
    for chi in enumerate_characters(g):
        ms = [mass(g, chi, t, x) for t in (0.05, 0.2, 0.8)]
        if chi.name == "trivial":
            assert np.allclose(ms, 1.0, atol=1e-10)
        else:
            assert ms[0] > ms[1] > ms[2] > 0


def test_outside_ball_mass_and_semigroup(groups):
    g = groups["orthant2"]
    x = np.array([1.5, 2.0])
    # delta = 0.75 and t = 0.001 leave a tail of about exp(-140)
    small = outside_ball_mass(g, trivial_character(g), 0.001, x)
    assert abs(small) < 1e-12
    assert outside_ball_mass(g, trivial_character(g), 0.01, x) == pytest.approx(math.exp(-0.5625 / 0.04), rel=1e-6)
    assert outside_ball_mass(g, trivial_character(g), 0.5, x) > 0.1
    with pytest.raises(InvalidArgumentError):
        outside_ball_mass(g, trivial_character(g), 0.5, x, delta=-1.0)
    assert chapman_kolmogorov(g, sgn_character(g), 0.3, 0.4, [0.5, 1.0], [0.8, 0.2]) < 1e-10


def test_boundary_partition_flags(groups):
    g = groups["D4"]
    for chi in enumerate_characters(g):
        part = BoundaryPartition(g, chi)
        assert part.flags == tuple("N" if v == 1 else "D" for v in chi.simple_values)
        assert sorted(part.neumann + part.dirichlet) == [0, 1]
    assert BoundaryPartition(g, trivial_character(g)).flags == ("N", "N")
    assert BoundaryPartition(g, sgn_character(g)).flags == ("D", "D")
    mixed = {BoundaryPartition(g, find_character(g, n)).flags for n in ("eta1", "eta2")}
    assert mixed == {("N", "D"), ("D", "N")}


def test_outward_normal_points_out(groups):
    g = groups["D3"]
    part = BoundaryPartition(g, trivial_character(g))
    for k in range(2):
        x = part.facet_samples(k, 1, seed=k)[0]
        assert not np.all(g.root_system.simple_roots @ (x + 1e-3 * part.outward_normal(k)) > 0)


def test_facet_sample_validation(groups):
    g = groups["orthant2"]
    part = BoundaryPartition(g, sgn_character(g))
    assert part.validate_sample(0, [0.0, 1.0]).tolist() == [0.0, 1.0]
    with pytest.raises(InvalidArgumentError):
        part.validate_sample(0, [0.1, 1.0])
    with pytest.raises(InvalidArgumentError):
        part.validate_sample(0, [0.0, 0.0])
    with pytest.raises(InvalidArgumentError):
        part.facet_samples(2, 1)
    with pytest.raises(InvalidArgumentError):
        boundary_check(g, sgn_character(g), 0.5, [1.0, 1.0], samples={0: [[0.2, 1.0]]})


def test_boundary_check_step_range(groups):
    g = groups["D4"]
    for h in (1e-7, 1e-2):
        with pytest.raises(InvalidArgumentError):
            boundary_check(g, trivial_character(g), 0.5, [1.0, 0.2], h=h)


def test_boundary_check_reports_both_kinds(groups):
    g = groups["D6"]
    for chi in enumerate_characters(g):
        rep = boundary_check(g, chi, 0.4, [1.0, 0.25])
        assert len(rep.results) == 10
        assert rep.max_statistic("D") < 1e-12
        assert rep.max_statistic("N") < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 1.0), st.floats(1.0, 2.5), st.floats(0.25, 0.75), st.sampled_from(["N", "D"]))
def test_residual_small_on_dihedral_chamber(t, r, frac, kind):
    from reflect_kernel.suites import named_group
    g = named_group("D5")
    th = -math.pi / 10 + frac * math.pi / 5
    x = r * np.array([math.cos(th), math.sin(th)])
    chi = trivial_character(g) if kind == "N" else sgn_character(g)
    assert heat_residual(g, chi, t, x, [1.2, 0.05]) < 1e-5


def test_residual_rejects_large_time_step(groups):
    g = groups["half"]
    with pytest.raises(InvalidArgumentError):
        heat_residual(g, trivial_character(g), 0.1, [1.0], [0.5], ht=0.2)


def test_solve_input_validation(groups):
    g = groups["D4"]
    one = initial_datum("one", 2)
    with pytest.raises(InvalidArgumentError):
        solve_heat(g, trivial_character(g), one, 0.0, [1.0, 0.2])
    with pytest.raises(InvalidArgumentError):
        solve_heat(g, trivial_character(g), one, 0.5, [0.2, 1.0])
    with pytest.raises(InvalidArgumentError):
        initial_datum("box", 2)
    with pytest.raises(InvalidArgumentError):
        initial_datum("gauss", 2, c=[1.0, 2.0, 3.0])


def test_solution_boundary_values(groups):
    g = groups["D6"]
    f = initial_datum("gauss", 2, c=[1.0, 0.3], w=0.4)
    for chi in enumerate_characters(g):
        rep = solution_boundary_check(g, chi, f, 0.2)
        assert len(rep.results) == 4
        assert rep.max_statistic("D") < 1e-10
        assert rep.max_statistic("N") < 1e-5
    with pytest.raises(InvalidArgumentError):
        solution_boundary_check(g, trivial_character(g), f, 0.2, h=0.5)
