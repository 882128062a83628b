import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reflect_kernel.characters import enumerate_characters, find_character, sgn_character, trivial_character
from reflect_kernel.errors import (InvalidArgumentError, OnWallError, SingularityError,
                                   UnsupportedCharacterError)
from reflect_kernel.kernels import (BaseKernel, GridField, SymmetrizedKernel, dihedral_heat, extend_function,
                                    fill_grid, heat_1d, heat_base, heat_symmetrized, orthant_heat_product,
                                    polar_grid, resolvent_kernel, symmetrize_function, symmetrized_eval,
                                    tensor_grid, weight_values)
from reflect_kernel.oracles import carslaw_jaeger
from reflect_kernel.quadrature import composite_gauss_legendre
from reflect_kernel.suites import dihedral_kind, sample_chamber

seeds = st.integers(0, 2**32 - 1)


def test_heat_base_values():
    assert heat_base(1 / (4 * math.pi), 1, [0.0]) == pytest.approx(1.0, rel=1e-15)
    assert heat_base(1.0, 2, [2.0, 0.0]) == pytest.approx(math.exp(-1) / (4 * math.pi), rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        heat_base(0.0, 1, [0.0])


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_heat_base_has_unit_mass(t):
    L = 14 * math.sqrt(t)
    x, w = composite_gauss_legendre(-L, L, 28, 12)
    assert abs(np.dot(w, heat_base(t, 1, x[:, None])) - 1.0) < 1e-10


def test_heat_base_is_radially_decreasing():
    r = np.linspace(0, 5, 50)
    v = heat_base(0.7, 3, np.column_stack([r, 0 * r, 0 * r]))
    assert np.all(np.diff(v) < 0)


def test_resolvent_kernel():
    K = resolvent_kernel(4.0)
    assert K([1.0, 0.0, 0.0]) == pytest.approx(math.exp(-2.0) / (4 * math.pi))
    with pytest.raises(SingularityError):
        K([0.0, 0.0, 0.0])
    with pytest.raises(InvalidArgumentError):
        BaseKernel("resolvent3d", 2, 1.0)


def test_resolvent_singularity_in_group_sum(groups):
    g = groups["orthant3"]
    K = SymmetrizedKernel(resolvent_kernel(1.0), g, trivial_character(g))
    assert K([1.0, 1.0, 1.0], [1.0, 2.0, 1.0]) > 0
    with pytest.raises(SingularityError):
        K([1.0, 1.0, 1.0], [1.0, 1.0, 1.0])


def test_half_line_reflection_principle(groups):
    g = groups["half"]
    t, x, y = 0.3, 0.7, 1.1
    N = heat_symmetrized(g, trivial_character(g), t)
    D = heat_symmetrized(g, sgn_character(g), t)
    assert N([x], [y]) == pytest.approx(heat_1d(t, x - y) + heat_1d(t, x + y), rel=1e-14)
    assert D([x], [x]) == pytest.approx(heat_1d(t, 0.0) - heat_1d(t, 2 * x), rel=1e-14)
    assert D([x], [x]) > 0


def test_orthant_product_example():
    p = lambda u: heat_1d(1.0, u)
    assert orthant_heat_product([1, 1], 1.0, [1.0, 1.0], [1.0, 1.0]) == pytest.approx((p(0) - p(2)) ** 2, rel=1e-14)
    assert orthant_heat_product([0], 0.5, [0.3], [0.9]) == pytest.approx(p_half(0.3, 0.9), rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        orthant_heat_product([0], -1.0, [0.3], [0.9])


def p_half(x, y, t=0.5):
    return heat_1d(t, x - y) + heat_1d(t, x + y)


@settings(max_examples=25)
@given(st.sampled_from(["half", "orthant2", "orthant3"]), seeds)
def test_orthant_product_equals_group_sum(groups, name, seed):
    g = groups[name]
    rng = np.random.default_rng(seed)
    for chi in enumerate_characters(g):
        t = rng.uniform(0.05, 2.0)
        x, y = sample_chamber(g, 2, rng)
        a = orthant_heat_product(chi.bits, t, x, y)
        b = symmetrized_eval(heat_symmetrized(g, chi, t), x, y)
        assert abs(a - b) <= 1e-12 * abs(b)


@settings(max_examples=20)
@given(st.sampled_from([3, 4, 5, 6]), seeds)
def test_dihedral_closed_forms_equal_group_sums(groups, n, seed):
    g = groups[f"D{n}"]
    rng = np.random.default_rng(seed)
    triv = heat_symmetrized(g, trivial_character(g), 1.0)
    for chi in enumerate_characters(g):
        t = rng.uniform(0.1, 1.0)
        x, y = sample_chamber(g, 2, rng)
        a = dihedral_heat(dihedral_kind(chi), n, t, x, y)
        b = symmetrized_eval(heat_symmetrized(g, chi, t), x, y)
        assert abs(a - b) <= 1e-12 * symmetrized_eval(triv.at_time(t), x, y)


def test_dihedral_heat_errors():
    with pytest.raises(UnsupportedCharacterError):
        dihedral_heat("eta1", 5, 1.0, [1.0, 0.0], [1.0, 0.0])
    with pytest.raises(InvalidArgumentError):
        dihedral_heat("X", 4, 1.0, [1.0, 0.1], [1.0, 0.1])


def test_dirichlet_vanishes_on_walls():
    for n in (3, 4, 6):
        y = np.array([1.0, 0.2]) if n % 2 == 0 else np.array([1.0, 0.1])
        start = 0.0 if n % 2 == 0 else -math.pi / (2 * n)
        for phi in (start, start + math.pi / n):
            x = 1.3 * np.array([math.cos(phi), math.sin(phi)])
            scale = dihedral_heat("N", n, 0.5, x, y)
            assert abs(dihedral_heat("D", n, 0.5, x, y)) <= 1e-12 * scale


def test_dirichlet_d4_matches_bessel_series():
    x = np.array([0.5, 0.2])
    frozen = 0.03806748577720509  # closed form and Bessel series agree to 2e-17
    assert dihedral_heat("D", 4, 0.1, x, x) == pytest.approx(frozen, rel=1e-12)
    assert carslaw_jaeger("D", 4, 0.1, x, x).value == pytest.approx(frozen, rel=1e-8)


def test_sgn_on_bisector_matches_bessel_series(groups):
    g = groups["D3"]
    x = np.array([0.8, 0.0])  # the bisector of the D3 chamber is the positive x-axis
    v = symmetrized_eval(heat_symmetrized(g, sgn_character(g), 0.4), x, x)
    assert abs(v - carslaw_jaeger("D", 3, 0.4, x, x).value) < 1e-8


@settings(max_examples=20)
@given(st.sampled_from(["orthant2", "orthant3", "D3", "D4", "D5", "D6"]), seeds)
def test_kernel_symmetry_equivariance_domination(groups, name, seed):
    g = groups[name]
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.1, 2.0)
    x, y = sample_chamber(g, 2, rng)
    triv = symmetrized_eval(heat_symmetrized(g, trivial_character(g), t), x, y)
    assert triv > 0
    for chi in enumerate_characters(g):
        K = heat_symmetrized(g, chi, t)
        v = symmetrized_eval(K, x, y)
        assert abs(v - symmetrized_eval(K, y, x)) <= 1e-12 * triv
        assert abs(v) <= triv * (1 + 1e-12)
        for h in range(g.order):
            hx = g.matrices[h] @ x
            assert abs(symmetrized_eval(K, hx, y) - chi.values[h] * v) <= 1e-12 * triv


@pytest.mark.parametrize("name", ["orthant2", "D3", "D4", "D5", "D6"])
def test_dirichlet_kernel_positive(groups, name):
    g = groups[name]
    rng = np.random.default_rng(1)
    D = heat_symmetrized(g, sgn_character(g), 0.5)
    pts = sample_chamber(g, 200, rng, r_range=(0.3, 2.5), margin=0.05)
    assert np.all(symmetrized_eval(D, pts[:100], pts[100:]) > 0)


def test_symmetrize_examples(groups):
    g = groups["orthant2"]
    assert symmetrize_function(g, 1.0 * np.ones(4), lambda p: np.full(p.shape[:-1], 3.5), [0.2, 0.7]) == pytest.approx(3.5)
    even = lambda p: np.exp(-np.sum(p * p, -1))
    assert symmetrize_function(g, sgn_character(g), even, [0.4, 1.2]) == pytest.approx(0.0, abs=1e-17)
    chi = find_character(g, "1,0")
    rng = np.random.default_rng(7)
    y = rng.normal(size=(100, 2))
    F = lambda p: p[..., 0]
    once = symmetrize_function(g, chi, F, y)
    assert np.allclose(once, y[:, 0], atol=1e-15)
    twice = symmetrize_function(g, chi, lambda p: symmetrize_function(g, chi, F, p), y)
    assert np.max(np.abs(twice - once)) < 1e-12


@pytest.mark.parametrize("name", ["D4", "D5", "orthant3"])
def test_idempotence_and_extension(groups, name):
    g = groups[name]
    rng = np.random.default_rng(2)
    y = rng.normal(size=(100, g.dimension))
    F = lambda p: (1 + p[..., 0] + p[..., -1] ** 3) * np.exp(-np.sum((p - 0.3) ** 2, -1))
    f = lambda p: np.cos(p[..., 0]) + p[..., -1]
    for chi in enumerate_characters(g):
        A = lambda p: symmetrize_function(g, chi, F, p)
        assert np.max(np.abs(symmetrize_function(g, chi, A, y) - A(y))) < 1e-12
        E = lambda p: extend_function(g, chi, f, p)
        assert np.max(np.abs(symmetrize_function(g, chi, E, y) - E(y))) < 1e-12


def test_extension_examples(groups):
    g = groups["half"]
    f = lambda p: p[..., 0] ** 2
    assert extend_function(g, trivial_character(g), f, np.array([-2.0])) == pytest.approx(4.0)
    assert extend_function(g, sgn_character(g), f, np.array([-2.0])) == pytest.approx(-4.0)
    assert extend_function(g, sgn_character(g), f, np.array([3.0])) == pytest.approx(9.0)
    with pytest.raises(OnWallError):
        extend_function(g, sgn_character(g), f, np.array([0.0]))
    assert np.isnan(extend_function(g, sgn_character(g), f, np.array([0.0]), on_wall="nan"))


def test_weight_values(groups):
    g = groups["D3"]
    assert np.array_equal(weight_values(g, lambda k: k), np.arange(6))
    with pytest.raises(InvalidArgumentError):
        weight_values(g, np.ones(5))


def test_grid_field_round_trip(groups):
    g = groups["D4"]
    nodes = polar_grid(g.root_system, [0.5, 1.0, 2.0], 3)
    K = heat_symmetrized(g, find_character(g, "eta2"), 0.3)
    field = fill_grid(nodes, lambda p: symmetrized_eval(K, p, np.array([1.0, 0.2])), {"t": "0.3"})
    text = field.to_csv()
    again = GridField.from_csv(text)
    assert again.to_csv() == text
    assert np.array_equal(again.values, field.values)
    assert field.to_json()["metadata"] == {"t": "0.3"}


def test_grid_fill_is_schedule_independent(groups):
    g = groups["orthant2"]
    nodes = tensor_grid(g.root_system, [np.linspace(0, 2, 31)] * 2)
    assert len(nodes) == 30 * 30
    K = heat_symmetrized(g, sgn_character(g), 0.4)
    f = lambda p: symmetrized_eval(K, p, np.array([0.5, 1.0]))
    a = fill_grid(nodes, f, threads=1, chunk=64)
    b = fill_grid(nodes, f, threads=4, chunk=50)
    assert np.array_equal(a.values, b.values)


def test_grid_field_validation():
    with pytest.raises(InvalidArgumentError):
        GridField(np.zeros((3, 2)), np.zeros(2))
