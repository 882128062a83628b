"""Mixed Neumann/Dirichlet heat problem on the positive chamber.

The solution of ``u_t = Delta u`` on ``C_+`` with ``u(0) = f`` and the
boundary behaviour encoded by a character ``eta`` is

    u(t, x) = int_{C+} p_t^eta(x, y) f(y) dy,

evaluated here by quadrature.  The module also provides numerical checks of
the kernel's PDE, boundary, mass and semigroup properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characters import trivial_character
from .coxeter import boundary_distance, chamber_contains, fold_points
from .errors import InvalidArgumentError
from .kernels import extend_function, heat_base, heat_symmetrized, symmetrized_eval
from .quadrature import ball_rule, chamber_rule, full_space_rule

FACET_TOL = 1e-12


@dataclass(frozen=True)
class HeatQuadrature:
    """Truncation and resolution of the kernel integrals.

    The truncation radius is ``radius_scale * sqrt(t)`` around the relevant
    centre and panels are at most ``panel_scale * sqrt(t)`` (and at most
    ``max_panel``) wide.
    """

    radius_scale: float = 12.0
    panel_scale: float = 4.0
    max_panel: float = 1.0
    order: int = 12

    def radius(self, t):
        return self.radius_scale * math.sqrt(t)

    def panel(self, t):
        return min(self.panel_scale * math.sqrt(t), self.max_panel)


DEFAULT_QUAD = HeatQuadrature()


def _check_time(t, what="t"):
    if not (isinstance(t, (int, float, np.floating)) and t > 0 and math.isfinite(t)):
        raise InvalidArgumentError(f"need {what} > 0, got {t!r}")


def _point(group, x, what="x", closed=True):
    x = np.asarray(x, dtype=float)
    if x.shape != (group.dimension,):
        raise InvalidArgumentError(f"{what} must have shape ({group.dimension},)")
    tol = -1e-12 if closed else 1e-12
    if not chamber_contains(group.root_system, x, tol):
        raise InvalidArgumentError(f"{what} = {x.tolist()} is outside the chamber")
    return x


# --- boundary structure ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryPartition:
    """Neumann/Dirichlet flag per simple facet of the chamber.

    Facet ``k`` lies in the mirror of the ``k``-th simple root; it is
    Neumann when ``eta(s_k) = +1`` and Dirichlet when ``eta(s_k) = -1``.
    """

    group: object
    character: object
    flags: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple("N" if v == 1 else "D" for v in self.character.simple_values))

    @property
    def neumann(self):
        return [k for k, f in enumerate(self.flags) if f == "N"]

    @property
    def dirichlet(self):
        return [k for k, f in enumerate(self.flags) if f == "D"]

    def outward_normal(self, k):
        return -self.group.root_system.simple_roots[k]

    def validate_sample(self, k, x, margin=0.0):
        S = self.group.root_system.simple_roots
        x = np.asarray(x, dtype=float)
        ips = S @ x
        others = np.delete(ips, k)
        if abs(ips[k]) > FACET_TOL * max(1.0, float(np.linalg.norm(x))) or np.any(others <= margin):
            raise InvalidArgumentError(f"{x.tolist()} is not an interior point of facet {k}")
        return x

    def facet_samples(self, k, count, seed=0, margin=0.1, scale=1.5, max_tries=10000):
        """``count`` points on facet ``k`` at distance > ``margin`` from the other facets."""
        rs = self.group.root_system
        if not 0 <= k < rs.rank:
            raise InvalidArgumentError(f"facet index {k} out of range")
        alpha = rs.simple_roots[k]
        rng = np.random.default_rng(seed)
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > max_tries:
                raise InvalidArgumentError("could not place facet samples; lower the margin")
            _, p = fold_points(self.group, scale * rng.standard_normal((1, rs.dimension)))
            x = p[0] - (p[0] @ alpha) * alpha
            ips = rs.simple_roots @ x
            if np.all(np.delete(ips, k) > margin):
                out.append(x)
        return np.array(out).reshape(count, rs.dimension)


@dataclass(frozen=True)
class FacetResult:
    facet: int
    flag: str
    point: tuple
    statistic: float


@dataclass(frozen=True)
class BoundaryReport:
    results: tuple

    def max_statistic(self, flag):
        vals = [r.statistic for r in self.results if r.flag == flag]
        return max(vals) if vals else 0.0


def boundary_check(group, character, t, y, samples=None, h=1e-4, n_per_facet=5, seed=0):
    """Kernel-level boundary behaviour on the facets.

    Dirichlet facets report ``|K_eta(x, y)| / K_1(x, y)``; Neumann facets
    report the central difference of ``K_eta`` along the outward normal,
    divided by ``K_1(x, y)``.  ``samples`` maps a facet index to an array
    of facet points; missing facets are sampled.
    """
    _check_time(t)
    if not 1e-6 <= h <= 1e-3:
        raise InvalidArgumentError("finite-difference step must lie in [1e-6, 1e-3]")
    y = _point(group, y, "y", closed=False)
    part = BoundaryPartition(group, character)
    K = heat_symmetrized(group, character, t)
    K1 = heat_symmetrized(group, trivial_character(group), t)
    samples = dict(samples or {})
    results = []
    for k, flag in enumerate(part.flags):
        pts = samples.get(k)
        if pts is None:
            pts = part.facet_samples(k, n_per_facet, seed=seed + k)
        nu = part.outward_normal(k)
        for x in np.atleast_2d(pts):
            x = part.validate_sample(k, x)
            scale = symmetrized_eval(K1, x, y)
            if flag == "D":
                stat = abs(symmetrized_eval(K, x, y)) / scale
            else:
                dn = (symmetrized_eval(K, x + h * nu, y) - symmetrized_eval(K, x - h * nu, y)) / (2 * h)
                stat = abs(dn) / scale
            results.append(FacetResult(k, flag, tuple(float(c) for c in x), float(stat)))
    return BoundaryReport(tuple(results))


def solution_boundary_check(group, character, f, t, h=1e-3, n_per_facet=2, seed=0, quad=None):
    """Boundary behaviour of ``u(t, .)`` for initial datum ``f``.

    Dirichlet facets report ``|u| / |u_1|`` and Neumann facets the normal
    derivative times ``sqrt(t)`` over ``|u_1|``, where ``u_1`` solves the
    all-Neumann problem.  The derivative is a one-sided second-order
    difference pointing into the chamber.
    """
    quad = DEFAULT_QUAD if quad is None else quad
    _check_time(t)
    if not 1e-5 <= h <= 1e-2:
        raise InvalidArgumentError("finite-difference step must lie in [1e-5, 1e-2]")
    part = BoundaryPartition(group, character)
    triv = trivial_character(group)
    tiny = np.finfo(float).tiny
    results = []
    for k, flag in enumerate(part.flags):
        nu = part.outward_normal(k)
        for x in part.facet_samples(k, n_per_facet, seed=seed + k, margin=3 * h + 0.1):
            scale = max(abs(solve_heat(group, triv, f, t, x, quad)), tiny)
            if flag == "D":
                stat = abs(solve_heat(group, character, f, t, x, quad)) / scale
            else:
                u0, u1, u2 = (solve_heat(group, character, f, t, x - j * h * nu, quad) for j in range(3))
                stat = abs(-3.0 * u0 + 4.0 * u1 - u2) / (2 * h) * math.sqrt(t) / scale
            results.append(FacetResult(k, flag, tuple(float(c) for c in x), float(stat)))
    return BoundaryReport(tuple(results))


def heat_residual(group, character, t, x, y, ht=None, hx=None):
    """Normalised finite-difference residual of ``(d_t - Delta) p_t^eta(., y)`` at ``x``.

    Central differences with ``ht = 1e-5 max(1, t)`` and ``hx = 1e-3 sqrt(t)``
    by default; returns ``|v_t - Delta v| / (|v_t| + |Delta v| + tiny)``.
    The Laplacian uses the fourth-order five-point stencil per axis, since
    ``v_t`` can be small compared with ``v / t`` and the second-order
    truncation error then dominates the ratio.
    """
    _check_time(t)
    ht = 1e-5 * max(1.0, t) if ht is None else ht
    hx = 1e-3 * math.sqrt(t) if hx is None else hx
    if ht >= t:
        raise InvalidArgumentError("time step must be smaller than t")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    K = heat_symmetrized(group, character, t)
    vt = (symmetrized_eval(K.at_time(t + ht), x, y) - symmetrized_eval(K.at_time(t - ht), x, y)) / (2 * ht)
    d = group.dimension
    E = hx * np.eye(d)
    pts = np.concatenate([x + E, x - E, x + 2 * E, x - 2 * E, x[None, :]])
    vals = symmetrized_eval(K, pts, y)
    near = math.fsum(vals[:2 * d])
    far = math.fsum(vals[2 * d:4 * d])
    lap = (16.0 * near - far - 30.0 * d * vals[-1]) / (12.0 * hx**2)
    floor = np.finfo(float).tiny
    return abs(vt - lap) / (abs(vt) + abs(lap) + floor)


# --- solution operator -------------------------------------------------------


def solve_heat(group, character, f, t, x, quad=DEFAULT_QUAD):
    """``u(t, x) = int_{C+} p_t^eta(x, y) f(y) dy`` by chamber quadrature.

    The chamber is truncated to the ball ``B(x, R)``; off-identity images
    ``g x`` are no closer than ``x`` to any chamber point, so the neglected
    part is bounded by the free Gaussian tail beyond ``R``.
    """
    _check_time(t)
    x = _point(group, x)
    K = heat_symmetrized(group, character, t)
    rule = chamber_rule(group.root_system, x, quad.radius(t), quad.panel(t), quad.order)
    return rule.integrate(lambda y: symmetrized_eval(K, x, y) * np.asarray(f(y), dtype=float))


def solve_heat_unfolded(group, character, f, t, x, quad=DEFAULT_QUAD):
    """Same value as :func:`solve_heat` from ``int_{R^d} p_t(x - z) (E^eta f)(z) dz``."""
    _check_time(t)
    x = _point(group, x)
    d = group.dimension
    rule = full_space_rule(group.root_system, x, quad.radius(t), quad.panel(t), quad.order, group=group)
    near = np.linalg.norm(rule.nodes - x, axis=1) <= quad.radius(t)
    rule = rule.restrict(near)

    def integrand(z):
        return heat_base(t, d, x - z) * extend_function(group, character, f, z)

    return rule.integrate(integrand)


def mass(group, character, t, x, quad=DEFAULT_QUAD):
    """``int_{C+} p_t^eta(x, y) dy``."""
    return solve_heat(group, character, lambda y: np.ones(len(y)), t, x, quad)


def outside_ball_mass(group, character, t, x, delta=None, quad=DEFAULT_QUAD):
    """Kernel mass outside ``B(x, delta)``; ``delta`` defaults to half the wall distance.

    Computed as the total mass minus the mass of the ball, which lies in the
    chamber, so both integrands are smooth on their domains.
    """
    _check_time(t)
    x = _point(group, x, closed=False)
    if delta is None:
        dist = float(boundary_distance(group.root_system, x))
        delta = 0.5 * dist if math.isfinite(dist) else 1.0
    if not 0 < delta:
        raise InvalidArgumentError("delta must be positive")
    K = heat_symmetrized(group, character, t)
    total = mass(group, character, t, x, quad)
    ball = ball_rule(x, delta, quad.panel(t), quad.order)
    ball = ball.restrict(np.atleast_1d(chamber_contains(group.root_system, ball.nodes, 0.0)))
    inner = ball.integrate(lambda y: symmetrized_eval(K, x, y))
    return total - inner


def chapman_kolmogorov(group, character, s, t, x, y, quad=DEFAULT_QUAD):
    """Relative residual of ``int_{C+} p_s(x, z) p_t(z, y) dz = p_{s+t}(x, y)``."""
    _check_time(s, "s")
    _check_time(t)
    x = _point(group, x)
    y = _point(group, y, "y")
    Ks = heat_symmetrized(group, character, s)
    Kt = heat_symmetrized(group, character, t)
    R = max(np.linalg.norm(x), np.linalg.norm(y)) + quad.radius(max(s, t))
    tau = s * t / (s + t)
    rule = chamber_rule(group.root_system, np.zeros(group.dimension), R, quad.panel(tau), quad.order)
    lhs = rule.integrate(lambda z: symmetrized_eval(Ks, x, z) * symmetrized_eval(Kt, z, y))
    rhs = symmetrized_eval(Ks.at_time(s + t), x, y)
    return abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)


# --- initial data --------------------------------------------------------------


def _vec(v, d, default):
    if v is None:
        return np.full(d, default, dtype=float)
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.size == 1:
        a = np.full(d, float(a[0]))
    if a.size != d:
        raise InvalidArgumentError(f"parameter needs {d} components")
    return a


def initial_datum(name, d, **params):
    """Named initial data.

    ``one``
        ``f = 1``.
    ``gauss``
        ``exp(-|y - c|^2 / (2 w^2))`` with centre ``c`` (default all ones)
        and width ``w`` (default 0.5).
    ``poly_gauss``
        ``(1 + a . y) exp(-|y - c|^2 / (2 w^2))``; ``a`` defaults to ones.
    ``smooth_ball``
        ``1 / (1 + exp((|y - c|^2 - r^2) / (2 r w)))``, a smoothed indicator
        of ``B(c, r)`` with edge width about ``w`` (defaults ``r = 1``,
        ``w = 0.1``).  Squaring the distance keeps it smooth at ``c``.
    """
    c = _vec(params.get("c"), d, 1.0)
    w = float(params.get("w", 0.5 if name != "smooth_ball" else 0.1))
    if name == "one":
        return lambda y: np.ones(np.shape(y)[:-1])
    if name == "gauss":
        return lambda y: np.exp(-np.sum((np.asarray(y) - c) ** 2, axis=-1) / (2 * w * w))
    if name == "poly_gauss":
        a = _vec(params.get("a"), d, 1.0)
        return lambda y: (1.0 + np.asarray(y) @ a) * np.exp(-np.sum((np.asarray(y) - c) ** 2, axis=-1) / (2 * w * w))
    if name == "smooth_ball":
        r = float(params.get("r", 1.0))
        return lambda y: 0.5 * (1.0 - np.tanh((np.sum((np.asarray(y) - c) ** 2, axis=-1) - r * r) / (4 * r * w)))
    raise InvalidArgumentError(f"unknown initial datum {name!r}; choose one, gauss, poly_gauss, smooth_ball")


INITIAL_DATA = ("one", "gauss", "poly_gauss", "smooth_ball")
