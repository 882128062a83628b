"""Named verification suites producing JSON-ready report entries.

Each suite returns a list of entries
``{"check", "config", "statistic", "tolerance", "pass"}``.  All randomness
comes from ``numpy.random.default_rng(seed)`` (or seeded Monte-Carlo
streams), so reports are reproducible for a fixed seed and thread count.
"""
from __future__ import annotations

import math

import numpy as np

from .characters import enumerate_characters, trivial_character
from .coxeter import (axis_constraints, boundary_distance, chamber_contains, chamber_sector,
                      dihedral_roots, fold_points, generate_group, orthogonal_roots, trivial_roots)
from .errors import InvalidArgumentError
from .ibvp import (boundary_check, chapman_kolmogorov, heat_residual, initial_datum, mass, outside_ball_mass,
                   solution_boundary_check)
from .kernels import dihedral_heat, heat_symmetrized, orthant_heat_product, symmetrized_eval
from .oracles import (PolarBins, TensorBins, bessel_I, carslaw_jaeger, check_derivative_intertwining,
                      check_extension_pairing, mc_folded_density, mc_killed_mass)


def system_label(rs):
    fam = rs.family
    if not fam:
        return f"custom(d={rs.dimension},roots={len(rs.roots)})"
    if fam[0] == "dihedral":
        return f"dihedral(n={fam[1]})"
    if fam[0] == "orthogonal":
        return f"orthogonal(d={fam[1]},J={','.join(map(str, fam[2]))})"
    return f"trivial(d={fam[1]})"


def named_group(name):
    """Groups by short name: ``free<d>``, ``half``, ``orthant<d>``, ``D<n>``."""
    if name == "half":
        rs = orthogonal_roots(1, (1,))
    elif name.startswith("orthant"):
        d = int(name[7:])
        rs = orthogonal_roots(d, tuple(range(1, d + 1)))
    elif name.startswith("free"):
        rs = trivial_roots(int(name[4:]))
    elif name.startswith("D"):
        rs = dihedral_roots(int(name[1:]))
    else:
        raise InvalidArgumentError(f"unknown system name {name!r}")
    return generate_group(rs)


def _group(item):
    return named_group(item) if isinstance(item, str) else item


def _groups(items):
    return [_group(i) for i in items]


def dihedral_kind(chi):
    return {"trivial": "N", "sgn": "D"}.get(chi.name, chi.name)


def sample_chamber(group, count, rng, r_range=(0.5, 3.0), margin=0.1):
    """Random chamber points kept away from the walls.

    Coordinate chambers: constrained coordinates uniform in ``r_range`` and
    free ones uniform in ``[-r_max, r_max]``.  Planar chambers: radius
    uniform in ``r_range`` and angle in the inner ``1 - 2 margin`` part of
    the aperture.  Otherwise folded Gaussian points with wall distance at
    least ``margin`` times their norm.
    """
    rs = group.root_system
    lo, hi = r_range
    signs = axis_constraints(rs) if rs.rank else [0] * rs.dimension
    if signs is not None:
        pts = rng.uniform(lo, hi, (count, rs.dimension))
        free = rng.uniform(-hi, hi, (count, rs.dimension))
        s = np.asarray(signs)
        return np.where(s == 0, free, pts * np.where(s == 0, 1, s))
    if rs.dimension == 2:
        start, ap = chamber_sector(rs)
        r = rng.uniform(lo, hi, count)
        th = start + ap * rng.uniform(margin, 1 - margin, count)
        return np.column_stack([r * np.cos(th), r * np.sin(th)])
    out = []
    while len(out) < count:
        _, p = fold_points(group, rng.standard_normal((1, rs.dimension)))
        p = p[0] * rng.uniform(lo, hi) / max(np.linalg.norm(p[0]), 1e-300)
        if boundary_distance(rs, p) >= margin * np.linalg.norm(p):
            out.append(p)
    return np.array(out)


def entry(check, config, statistic, tolerance, passed):
    """One report row; ``tolerance=None`` marks a reported, unasserted statistic."""
    return {"check": check, "config": config, "statistic": float(statistic),
            "tolerance": None if tolerance is None else float(tolerance), "pass": bool(passed)}


def _rel_to_trivial(group, t, x, y, a, b):
    scale = symmetrized_eval(heat_symmetrized(group, trivial_character(group), t), x, y)
    return abs(a - b) / scale


# --- kernel identities --------------------------------------------------------


def suite_product(seed=0, dims=(1, 2, 3), count=100):
    """Orthant product formula against the group sum."""
    rng = np.random.default_rng(seed)
    out = []
    for d in dims:
        g = named_group(f"orthant{d}")
        for chi in enumerate_characters(g):
            worst = 0.0
            for _ in range(count):
                t = rng.uniform(0.1, 1.0)
                x, y = sample_chamber(g, 2, rng)
                a = orthant_heat_product(chi.bits, t, x, y)
                b = symmetrized_eval(heat_symmetrized(g, chi, t), x, y)
                worst = max(worst, _rel_to_trivial(g, t, x, y, a, b))
            out.append(entry("product", {"system": system_label(g.root_system), "character": chi.name,
                                         "samples": count}, worst, 1e-12, worst <= 1e-12))
    return out


def suite_dihedral(seed=0, orders=(3, 4, 5, 6), count=100):
    """Dihedral closed forms against the group sum."""
    rng = np.random.default_rng(seed)
    out = []
    for n in orders:
        g = named_group(f"D{n}")
        for chi in enumerate_characters(g):
            kind = dihedral_kind(chi)
            worst = 0.0
            for _ in range(count):
                t = rng.uniform(0.1, 1.0)
                x, y = sample_chamber(g, 2, rng)
                a = dihedral_heat(kind, n, t, x, y)
                b = symmetrized_eval(heat_symmetrized(g, chi, t), x, y)
                worst = max(worst, _rel_to_trivial(g, t, x, y, a, b))
            out.append(entry("dihedral-closed-form", {"n": n, "kind": kind, "samples": count},
                             worst, 1e-12, worst <= 1e-12))
    return out


# --- oracle suites ----------------------------------------------------------------


PAIRING_TOL = 1e-7
INTERTWINING_TOL = 1e-11


def _pairing_corpus(d):
    def one(y):
        return np.ones(len(y))

    def gauss(z):
        return np.exp(-0.5 * np.sum(z * z, axis=1))

    shift = np.linspace(0.4, 0.9, d)

    def shifted(z):
        return np.exp(-0.5 * np.sum((z - shift) ** 2, axis=1))

    def poly_phi(y):
        return (1.0 + y[:, 0] - 0.5 * y[:, -1] ** 2) * np.exp(-0.5 * np.sum(y * y, axis=1))

    def poly_Phi(z):
        return (0.3 + z[:, 0] * z[:, -1] + z[:, 0]) * np.exp(-np.sum((z - 0.2) ** 2, axis=1))

    return [("one*gauss", one, gauss), ("one*shifted", one, shifted), ("poly*poly", poly_phi, poly_Phi)]


def suite_pairing(seed=0, systems=("half", "orthant2", "orthant3", "D3", "D4", "D5", "D6")):
    """Pairing identity of the weighted extension and averaging operators."""
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        weights = [(c.name, c) for c in enumerate_characters(g)]
        weights.append(("random", rng.uniform(-1.0, 1.0, g.order)))
        for wname, omega in weights:
            for fname, phi, Phi in _pairing_corpus(g.dimension):
                if fname == "one*gauss" and wname != "trivial":
                    continue  # radial Phi: both sides vanish for nontrivial weights
                r = check_extension_pairing(g, omega, phi, Phi)
                out.append(entry("pairing", {"system": system_label(g.root_system), "weight": wname,
                                             "functions": fname}, r, PAIRING_TOL, r <= PAIRING_TOL))
    return out


def _intertwining_corpus(d):
    c = np.full(d, 0.3)

    def radial(p):
        return np.exp(-np.sum(p * p, -1))

    def radial_grad(p):
        return -2.0 * p * radial(p)[..., None]

    def x1g(p):
        return p[..., 0] * radial(p)

    def x1g_grad(p):
        e = radial(p)
        g = -2.0 * p * (p[..., 0] * e)[..., None]
        g[..., 0] += e
        return g

    def mono(p):
        q = p - c
        return (0.5 + p[..., 0] * p[..., -1] ** 2) * np.exp(-np.sum(q * q, -1))

    def mono_grad(p):
        q = p - c
        e = np.exp(-np.sum(q * q, -1))
        poly = 0.5 + p[..., 0] * p[..., -1] ** 2
        g = -2.0 * q * (poly * e)[..., None]
        dpoly = np.zeros_like(p)
        dpoly[..., 0] += p[..., -1] ** 2
        dpoly[..., -1] += 2.0 * p[..., 0] * p[..., -1]
        return g + dpoly * e[..., None]

    def const(p):
        return np.full(p.shape[:-1], 2.5)

    def const_grad(p):
        return np.zeros_like(p)

    return [("const", const, const_grad), ("radial", radial, radial_grad),
            ("x1*gauss", x1g, x1g_grad), ("poly*gauss", mono, mono_grad)]


def suite_intertwining(seed=0, systems=("half", "orthant2", "orthant3", "D3", "D4", "D5", "D6"), points=50):
    """Derivative identities of the averaging operator at random points."""
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        y = rng.normal(size=(points, g.dimension))
        weights = [(c.name, c) for c in enumerate_characters(g)]
        weights.append(("random", rng.uniform(-1.0, 1.0, g.order)))
        for wname, omega in weights:
            for fname, F, dF in _intertwining_corpus(g.dimension):
                h2, h3 = check_derivative_intertwining(g, omega, F, dF, y)
                r = max(h2, h3)
                out.append(entry("intertwining", {"system": system_label(g.root_system), "weight": wname,
                                                  "function": fname, "points": points},
                                 r, INTERTWINING_TOL, r <= INTERTWINING_TOL))
    return out


def suite_bessel(seed=0):
    """Recurrence ``I_{v-1} - I_{v+1} = (2v/z) I_v`` and values at zero."""
    out = [entry("bessel-zero", {"nu": 0}, abs(bessel_I(0, 0.0) - 1.0), 0.0, bessel_I(0, 0.0) == 1.0),
           entry("bessel-zero", {"nu": 2.5}, abs(bessel_I(2.5, 0.0)), 0.0, bessel_I(2.5, 0.0) == 0.0)]
    worst = 0.0
    for nu in (1, 2, 3.5, 5, 10, 20, 35, 50):
        for z in (0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 30.0):
            lhs = bessel_I(nu - 1, z) - bessel_I(nu + 1, z)
            rhs = 2.0 * nu / z * bessel_I(nu, z)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    out.append(entry("bessel-recurrence", {"nu": "1..50", "z": "0.1..30"}, worst, 1e-11, worst <= 1e-11))
    return out


def suite_cj_cross(seed=0, orders=(3, 4, 6), count=50, zmax=30.0):
    """Bessel series against the closed-form dihedral kernels."""
    rng = np.random.default_rng(seed)
    out = []
    for n in orders:
        g = named_group(f"D{n}")
        for kind in ("N", "D"):
            worst = 0.0
            all_conv = True
            done = 0
            while done < count:
                t = rng.uniform(0.05, 1.0)
                x, y = sample_chamber(g, 2, rng, r_range=(0.05, 3.0), margin=0.0)
                if np.linalg.norm(x) * np.linalg.norm(y) / (2 * t) > zmax:
                    continue
                res = carslaw_jaeger(kind, n, t, x, y)
                closed = dihedral_heat(kind, n, t, x, y)
                worst = max(worst, _rel_to_trivial(g, t, x, y, res.value, closed))
                all_conv &= res.converged
                done += 1
            out.append(entry("cj-cross", {"n": n, "kind": kind, "samples": count, "converged": all_conv},
                             worst, 1e-8, worst <= 1e-8 and all_conv))
    return out


def neumann_setup(name):
    """Start point, time and bins for the Monte-Carlo density check of a system."""
    g = _group(name)
    rs = g.root_system
    t = 0.5
    if rs.rank and axis_constraints(rs) is None:
        start, ap = chamber_sector(rs)
        mid = start + 0.5 * ap
        x = np.array([math.cos(mid), math.sin(mid)])
        bins = PolarBins(np.linspace(0.0, 3.0, 13), np.linspace(start, start + ap, 9))
    else:
        signs = axis_constraints(rs) if rs.rank else [0] * rs.dimension
        x = np.ones(rs.dimension)
        bins = TensorBins(tuple(np.linspace(0.0, 3.0, 16) if s else np.linspace(-2.0, 4.0, 25)
                                for s in signs))
    return g, x, t, bins


def suite_mc_neumann(seed=0, systems=("orthant2", "D3"), samples=10**6, threads=1):
    """Folded Brownian endpoints against the trivial-character kernel."""
    out = []
    for name in systems:
        g, x, t, bins = neumann_setup(name)
        K = heat_symmetrized(g, trivial_character(g), t)
        est = mc_folded_density(g, x, t, samples, bins, seed, threads)
        expected = bins.bin_average(lambda y: symmetrized_eval(K, x, y))
        frac = est.agreement(expected, 4.0)
        out.append(entry("mc-neumann", {"system": system_label(g.root_system), "x": x.tolist(), "t": t,
                                        "samples": samples, "seed": seed, "threads": threads,
                                        "bins": int(bins.size)}, frac, 0.95, frac >= 0.95))
    return out


def suite_mc_dirichlet(seed=0, systems=("half", "orthant2"), samples=10**5, steps=10**4, threads=1):
    """Killed Brownian motion survival against the Dirichlet-kernel mass."""
    out = []
    for name in systems:
        g = _group(name)
        chi = [c for c in enumerate_characters(g) if c.name == "sgn"][0]
        x = np.ones(g.dimension)
        t = 1.0
        km = mc_killed_mass(g, x, t, samples, steps, seed, threads)
        q = mass(g, chi, t, x)
        tol = 3.0 * km.stderr + 0.01
        dev = abs(km.estimate - q)
        out.append(entry("mc-dirichlet", {"system": system_label(g.root_system), "x": x.tolist(), "t": t,
                                          "samples": samples, "steps": steps, "seed": seed,
                                          "threads": threads, "estimate": km.estimate,
                                          "stderr": km.stderr, "quadrature": q}, dev, tol, dev <= tol))
    return out


# --- initial-boundary value checks ----------------------------------------------


BOUNDARY_SYSTEMS = ("orthant2", "D3", "D4", "D5", "D6")
PDE_SYSTEMS = ("free1", "half", "orthant2", "D3", "D4", "D5", "D6")


def suite_boundary(seed=0, systems=BOUNDARY_SYSTEMS, t=0.5, h=1e-4):
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        for chi in enumerate_characters(g):
            y = sample_chamber(g, 1, rng)[0]
            rep = boundary_check(g, chi, t, y, h=h, seed=seed)
            cfg = {"system": system_label(g.root_system), "character": chi.name, "t": t, "h": h}
            d, nm = rep.max_statistic("D"), rep.max_statistic("N")
            out.append(entry("boundary-dirichlet", cfg, d, 1e-12, d <= 1e-12))
            out.append(entry("boundary-neumann", cfg, nm, 1e-6, nm <= 1e-6))
    return out


def suite_solution_boundary(seed=0, systems=("orthant2", "D4"), t=0.2, h=1e-3):
    """Boundary values of heat solutions.

    Dirichlet walls are asserted; the Neumann normal derivative of ``u`` is
    only reported, since its size depends on the finite-difference step.
    """
    out = []
    for g in _groups(systems):
        c = sample_chamber(g, 1, np.random.default_rng(seed), r_range=(0.5, 1.0))[0]
        f = initial_datum("gauss", g.dimension, c=c, w=0.4)
        for chi in enumerate_characters(g):
            rep = solution_boundary_check(g, chi, f, t, h=h, seed=seed)
            cfg = {"system": system_label(g.root_system), "character": chi.name, "t": t, "h": h}
            d = rep.max_statistic("D")
            if any(r.flag == "D" for r in rep.results):
                out.append(entry("solution-dirichlet", cfg, d, 1e-10, d <= 1e-10))
            if any(r.flag == "N" for r in rep.results):
                out.append(entry("solution-neumann", cfg, rep.max_statistic("N"), None, True))
    return out


def suite_residual(seed=0, systems=PDE_SYSTEMS, count=50):
    """Finite-difference heat residual of every kernel.

    Points stay clear of the walls: close to a mirror the Dirichlet-type
    sums are many orders below their individual terms and the difference
    quotients are dominated by rounding.
    """
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        for chi in enumerate_characters(g):
            worst = 0.0
            for _ in range(count):
                t = rng.uniform(0.2, 1.0)
                x, y = sample_chamber(g, 2, rng, r_range=(1.0, 2.5), margin=0.25)
                worst = max(worst, heat_residual(g, chi, t, x, y))
            out.append(entry("heat-residual", {"system": system_label(g.root_system), "character": chi.name,
                                               "samples": count}, worst, 1e-5, worst <= 1e-5))
    return out


def suite_mass(seed=0, systems=PDE_SYSTEMS, times=(1.0, 0.1, 0.01)):
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        # close enough to the walls that 1 - mass stays resolvable at t = 0.01
        x = sample_chamber(g, 1, rng, r_range=(0.3, 0.8))[0]
        for chi in enumerate_characters(g):
            cfg = {"system": system_label(g.root_system), "character": chi.name, "x": x.tolist()}
            ms = [mass(g, chi, t, x) for t in times]
            if chi.name == "trivial":
                dev = max(abs(m - 1.0) for m in ms)
                out.append(entry("mass-trivial", cfg, dev, 1e-8, dev <= 1e-8))
                continue
            inside = all(0.0 < m < 1.0 - 1e-10 for m in ms)
            out.append(entry("mass-range", cfg, max(ms), 1.0 - 1e-10, inside))
            steps = [b - a for a, b in zip(ms[:-1], ms[1:])]
            out.append(entry("mass-increasing", dict(cfg, t=list(times)), min(steps), 0.0, min(steps) > 0.0))
    g = named_group("half")
    chi = [c for c in enumerate_characters(g) if c.name == "sgn"][0]
    for x0, t in ((1.0, 1.0), (0.5, 0.1), (2.0, 3.0)):
        dev = abs(mass(g, chi, t, np.array([x0])) - math.erf(x0 / math.sqrt(4 * t)))
        out.append(entry("mass-erf", {"x": x0, "t": t}, dev, 1e-8, dev <= 1e-8))
    return out


def suite_localization(seed=0, systems=("half", "orthant2", "D3", "D4", "D5", "D6"), count=10, t=1e-3):
    """Outside-ball mass at small time with ``delta`` half the wall distance.

    Points have wall distance at least 0.5 so that ``delta^2 / 4t`` is
    large enough for the Gaussian tail to fall below the tolerance.
    """
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        rs = g.root_system
        pts = []
        while len(pts) < count:
            p = sample_chamber(g, 1, rng, r_range=(0.5, 4.0))[0]
            if boundary_distance(rs, p) >= 0.5:
                pts.append(p)
        for chi in enumerate_characters(g):
            worst = max(abs(outside_ball_mass(g, chi, t, p)) for p in pts)
            out.append(entry("localization", {"system": system_label(rs), "character": chi.name,
                                              "t": t, "points": count}, worst, 1e-6, worst <= 1e-6))
    return out


def suite_ck(seed=0, systems=("half", "orthant2", "D3", "D4"), s=0.5, t=0.5):
    rng = np.random.default_rng(seed)
    out = []
    for g in _groups(systems):
        x, y = sample_chamber(g, 2, rng, r_range=(0.3, 2.0))
        for chi in enumerate_characters(g):
            r = chapman_kolmogorov(g, chi, s, t, x, y)
            out.append(entry("chapman-kolmogorov", {"system": system_label(g.root_system), "character": chi.name,
                                                    "s": s, "t": t}, r, 1e-7, r <= 1e-7))
    return out


VERIFY_SUITES = {
    "pairing": suite_pairing,
    "intertwining": suite_intertwining,
    "bessel": suite_bessel,
    "cj-cross": suite_cj_cross,
    "mc-neumann": suite_mc_neumann,
    "mc-dirichlet": suite_mc_dirichlet,
    "product": suite_product,
    "dihedral": suite_dihedral,
}

CHECK_SUITES = {
    "boundary": suite_boundary,
    "solution-boundary": suite_solution_boundary,
    "residual": suite_residual,
    "mass": suite_mass,
    "localization": suite_localization,
    "ck": suite_ck,
}
