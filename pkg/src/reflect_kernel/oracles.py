"""Independent numerical oracles for the chamber heat kernels.

* modified Bessel functions by their power series and the Bessel-series
  (Carslaw-Jaeger) representation of the planar cone kernels;
* Monte-Carlo densities of folded and of killed Brownian motion run at the
  speed of the heat semigroup ``exp(t Delta)`` (variance ``2t`` per axis);
* quadrature and analytic checks of the pairing and derivative identities of
  the weighted extension and averaging operators.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coxeter import chamber_contains, fold_points
from .errors import InvalidArgumentError, SeriesConvergenceWarning
from .kernels import extend_function, symmetrize_function, weight_values
from .quadrature import chamber_rule, composite_gauss_legendre, full_space_rule

BESSEL_REL_STOP = 1e-18


def _check_bessel_args(nu, z):
    if not (nu >= 0 and z >= 0) or not (math.isfinite(nu) and math.isfinite(z)):
        raise InvalidArgumentError(f"bessel_I needs nu >= 0 and z >= 0, got nu={nu!r}, z={z!r}")


def _series_ratio_sum(nu, z):
    """``sum_m term_m / term_0`` for the power series of ``I_nu(z)``."""
    q = 0.25 * z * z
    terms = [1.0]
    term = 1.0
    m = 0
    total = 1.0
    while True:
        m += 1
        denom = m * (nu + m)
        term *= q / denom
        terms.append(term)
        total += term
        if term < BESSEL_REL_STOP * total and q < denom:
            break
    return math.fsum(terms)


def _log_leading(nu, z):
    """``log((z/2)^nu / Gamma(nu + 1))``."""
    if float(nu).is_integer():
        k = int(nu)
        return math.fsum(math.log(0.5 * z / j) for j in range(1, k + 1))
    return nu * math.log(0.5 * z) - math.lgamma(nu + 1.0)


def bessel_I(nu, z):
    """Modified Bessel function of the first kind by its power series.

    Summed until the relative term size drops below 1e-18 past the peak
    term.  Targets relative accuracy 1e-13 for ``z <= 50``, ``nu <= 200``.
    """
    nu = float(nu)
    z = float(z)
    _check_bessel_args(nu, z)
    if z == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    lead = None
    if nu.is_integer() and z <= 200.0:
        lead = 1.0
        h = 0.5 * z
        for j in range(1, int(nu) + 1):
            lead *= h / j
        if lead == 0.0 or not math.isfinite(lead):
            lead = None
    if lead is None:
        ll = _log_leading(nu, z)
        if ll < -745.0:
            return 0.0
        return math.exp(ll + math.log(_series_ratio_sum(nu, z)))
    return lead * _series_ratio_sum(nu, z)


def log_bessel_I(nu, z):
    nu = float(nu)
    z = float(z)
    _check_bessel_args(nu, z)
    if z == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    return _log_leading(nu, z) + math.log(_series_ratio_sum(nu, z))


@dataclass(frozen=True)
class SeriesSpec:
    n: int
    max_terms: int = 1000
    tail_tolerance: float = 1e-18

    def __post_init__(self):
        if self.max_terms < 1:
            raise InvalidArgumentError("max_terms must be >= 1")
        if not self.tail_tolerance > 0:
            raise InvalidArgumentError("tail_tolerance must be > 0")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms: int
    converged: bool
    error_bound: float


def _cone_polar(n, p, what):
    p = np.asarray(p, dtype=float)
    if p.shape != (2,):
        raise InvalidArgumentError(f"{what} must be a planar point")
    rho = float(np.hypot(p[0], p[1]))
    theta = float(np.arctan2(p[1], p[0])) if rho > 0 else 0.0
    if n % 2:
        theta += math.pi / (2 * n)
    if rho > 0 and not (-1e-12 <= theta <= math.pi / n + 1e-12):
        raise InvalidArgumentError(f"{what} = {p.tolist()} is not in the closed chamber of D_{n}")
    return rho, theta


def carslaw_jaeger(kind, n, t, x, y, spec=None):
    """Bessel-series form of the Dirichlet (``D``) or Neumann (``N``) cone kernel.

    For even ``n`` with ``x = rho e^{i theta}``, ``y = r e^{i xi}``::

        D: n/(2 pi t) e^{-(rho^2+r^2)/4t} sum_{j>=1} I_{jn}(rho r/2t) 2 sin(jn theta) sin(jn xi)
        N: same prefactor, I_0 + sum_{j>=1} I_{jn} 2 cos(jn theta) cos(jn xi)

    For odd ``n`` both angles are shifted by ``pi/(2n)``.  Summation stops
    once the term bound (sines/cosines replaced by 1) drops below
    ``spec.tail_tolerance``; ``error_bound`` bounds the neglected tail using
    the decreasing ratio of consecutive bounds.
    """
    if kind not in ("N", "D"):
        raise InvalidArgumentError(f"kind must be 'N' or 'D', got {kind!r}")
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidArgumentError(f"dihedral order must be an integer >= 3, got {n!r}")
    if not t > 0:
        raise InvalidArgumentError(f"need t > 0, got t={t!r}")
    n = int(n)
    spec = spec or SeriesSpec(n)
    rho, theta = _cone_polar(n, x, "x")
    r, xi = _cone_polar(n, y, "y")
    log_pre = math.log(n / (2 * math.pi * t)) - (rho * rho + r * r) / (4 * t)
    z = rho * r / (2 * t)
    trig = math.sin if kind == "D" else math.cos

    j = 0 if kind == "N" else 1
    parts = []
    prev_bound = math.inf
    bound = math.inf
    used = 0
    converged = False
    while used < spec.max_terms:
        weight = 1.0 if j == 0 else 2.0
        lb = log_bessel_I(j * n, z)
        bound = weight * math.exp(log_pre + lb) if lb > -math.inf else 0.0
        if j == 0:
            parts.append(bound)
        else:
            parts.append(bound * trig(j * n * theta) * trig(j * n * xi))
        used += 1
        if bound < spec.tail_tolerance and j >= 1 and bound <= prev_bound:
            converged = True
            break
        prev_bound = bound
        j += 1

    if bound == 0.0:
        err = 0.0
    else:
        q = bound / prev_bound if prev_bound > 0 else math.inf
        err = bound * q / (1.0 - q) if q < 1.0 else math.inf
    if not converged:
        warnings.warn(f"Bessel series for D_{n} not converged after {used} terms",
                      SeriesConvergenceWarning, stacklevel=2)
    return SeriesResult(math.fsum(parts), used, converged, err)


# --- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorBins:
    """Rectangular bins given by per-axis edge arrays."""

    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(np.asarray(e, dtype=float) for e in self.edges))

    @property
    def shape(self):
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def locate(self, pts):
        pts = np.asarray(pts, dtype=float)
        idx = np.zeros(len(pts), dtype=np.int64)
        ok = np.ones(len(pts), dtype=bool)
        for k, e in enumerate(self.edges):
            i = np.searchsorted(e, pts[:, k], side="right") - 1
            ok &= (i >= 0) & (i < len(e) - 1)
            idx = idx * (len(e) - 1) + np.clip(i, 0, len(e) - 2)
        return np.where(ok, idx, -1)

    def volumes(self):
        v = np.ones(self.shape)
        for k, e in enumerate(self.edges):
            s = [1] * len(self.edges)
            s[k] = -1
            v = v * np.diff(e).reshape(s)
        return v.ravel()

    def bin_average(self, f, order=4):
        out = np.empty(self.size)
        grids = []
        for e in self.edges:
            nodes, w = [], []
            for a, b in zip(e[:-1], e[1:]):
                x, wx = composite_gauss_legendre(a, b, 1, order)
                nodes.append(x)
                w.append(wx / (b - a))
            grids.append((np.array(nodes), np.array(w)))
        for flat, multi in enumerate(np.ndindex(*self.shape)):
            pts = np.stack(np.meshgrid(*[g[0][i] for g, i in zip(grids, multi)], indexing="ij"), -1)
            wts = np.ones(pts.shape[:-1])
            for k, (g, i) in enumerate(zip(grids, multi)):
                s = [1] * len(multi)
                s[k] = -1
                wts = wts * g[1][i].reshape(s)
            out[flat] = float(np.sum(wts * f(pts.reshape(-1, len(multi))).reshape(wts.shape)))
        return out


@dataclass(frozen=True, eq=False)
class PolarBins:
    """Annular-sector bins in the plane (absolute polar angles)."""

    r_edges: np.ndarray
    theta_edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r_edges", np.asarray(self.r_edges, dtype=float))
        object.__setattr__(self, "theta_edges", np.asarray(self.theta_edges, dtype=float))

    @property
    def shape(self):
        return (len(self.r_edges) - 1, len(self.theta_edges) - 1)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def locate(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[:, 0], pts[:, 1])
        th = np.arctan2(pts[:, 1], pts[:, 0])
        t0 = self.theta_edges[0]
        th = t0 + np.mod(th - t0, 2 * np.pi)
        i = np.searchsorted(self.r_edges, r, side="right") - 1
        j = np.searchsorted(self.theta_edges, th, side="right") - 1
        ok = (i >= 0) & (i < self.shape[0]) & (j >= 0) & (j < self.shape[1])
        return np.where(ok, i * self.shape[1] + j, -1)

    def volumes(self):
        r2 = np.diff(self.r_edges**2) / 2.0
        return (r2[:, None] * np.diff(self.theta_edges)[None, :]).ravel()

    def bin_average(self, f, order=4):
        out = np.empty(self.size)
        vol = self.volumes()
        for flat, (i, j) in enumerate(np.ndindex(*self.shape)):
            rr, wr = composite_gauss_legendre(self.r_edges[i], self.r_edges[i + 1], 1, order)
            tt, wt = composite_gauss_legendre(self.theta_edges[j], self.theta_edges[j + 1], 1, order)
            R, T = np.meshgrid(rr, tt, indexing="ij")
            W = (wr * rr)[:, None] * wt[None, :]
            pts = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
            out[flat] = float(np.sum(W.ravel() * f(pts))) / vol[flat]
        return out


@dataclass(eq=False)
class McEstimate:
    """Histogram of Monte-Carlo samples over fixed bins.

    ``density = count / (N * volume)``;
    ``stderr = sqrt(p (1 - p) / N) / volume`` with ``p = count / N``.
    """

    bins: object
    counts: np.ndarray
    n_samples: int
    seed: int
    streams: int = 1
    discarded: int = 0

    @property
    def probabilities(self):
        return self.counts / self.n_samples

    @property
    def density(self):
        return self.probabilities / self.bins.volumes()

    @property
    def stderr(self):
        p = self.probabilities
        return np.sqrt(p * (1.0 - p) / self.n_samples) / self.bins.volumes()

    def agreement(self, expected_density, n_sigma=4.0):
        """Fraction of occupied bins whose density is within ``n_sigma`` standard errors."""
        occ = self.counts > 0
        dev = np.abs(self.density - expected_density)
        ok = dev[occ] <= n_sigma * self.stderr[occ]
        return float(np.mean(ok)) if ok.size else 0.0


def _streams(seed, n_samples, streams):
    seqs = np.random.SeedSequence(int(seed)).spawn(int(streams))
    base, extra = divmod(int(n_samples), int(streams))
    sizes = [base + (1 if k < extra else 0) for k in range(int(streams))]
    return [(np.random.Generator(np.random.Philox(s)), n) for s, n in zip(seqs, sizes)]


def _run_streams(work, jobs, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda a: work(*a), jobs))
    return [work(*a) for a in jobs]


def mc_folded_density(group, x, t, n_samples, bins, seed, threads=1, chunk=1 << 17):
    """Histogram of ``x + sqrt(2t) xi`` folded into the positive chamber.

    The expected bin density is the bin average of the trivial-character
    heat kernel ``sum_g p_t(g x - y)``.  Samples that land on a mirror are
    discarded.  Results are reproducible for fixed ``(seed, threads)``.
    """
    if not t > 0 or int(n_samples) <= 0:
        raise InvalidArgumentError("need t > 0 and a positive sample count")
    x = np.asarray(x, dtype=float)
    rs = group.root_system
    if not chamber_contains(rs, x):
        raise InvalidArgumentError("start point must lie in the open chamber")
    sd = math.sqrt(2.0 * t)

    def work(rng, n):
        counts = np.zeros(bins.size, dtype=np.int64)
        dropped = 0
        done = 0
        while done < n:
            k = min(chunk, n - done)
            z = x + sd * rng.standard_normal((k, rs.dimension))
            g, zp = fold_points(group, z)
            keep = g >= 0
            dropped += int(np.count_nonzero(~keep))
            idx = bins.locate(zp[keep])
            idx = idx[idx >= 0]
            counts += np.bincount(idx, minlength=bins.size)
            done += k
        return counts, dropped

    res = _run_streams(work, _streams(seed, n_samples, threads), threads)
    counts = np.sum([c for c, _ in res], axis=0)
    dropped = sum(d for _, d in res)
    return McEstimate(bins, counts, int(n_samples), int(seed), int(threads), dropped)


@dataclass(frozen=True)
class KilledMass:
    estimate: float
    stderr: float
    n_samples: int
    steps: int
    seed: int


def mc_killed_mass(group, x, t, n_samples, steps, seed, threads=1, block=16):
    """Survival probability of Brownian motion killed on leaving ``C_+``.

    Euler-Maruyama with step ``t/steps`` and increments of variance
    ``2 dt``; a path survives if every discrete position is in the open
    chamber.  Discrete monitoring biases the estimate upward by
    ``O(sqrt(t/steps))``.
    """
    if not t > 0 or int(n_samples) <= 0 or int(steps) < 100:
        raise InvalidArgumentError("need t > 0, n_samples > 0 and steps >= 100")
    x = np.asarray(x, dtype=float)
    rs = group.root_system
    if not chamber_contains(rs, x):
        raise InvalidArgumentError("start point must lie in the open chamber")
    steps = int(steps)
    sd = math.sqrt(2.0 * t / steps)
    S = rs.simple_roots

    def work(rng, n):
        pos = np.tile(x, (n, 1))
        left = steps
        while left and len(pos):
            b = min(block, left)
            path = pos + np.cumsum(sd * rng.standard_normal((b, len(pos), rs.dimension)), axis=0)
            if rs.rank:
                alive = np.all(path @ S.T > 0.0, axis=(0, 2))
            else:
                alive = np.ones(len(pos), dtype=bool)
            pos = path[-1][alive]
            left -= b
        return len(pos)

    survivors = sum(_run_streams(work, _streams(seed, n_samples, threads), threads))
    p = survivors / int(n_samples)
    return KilledMass(p, math.sqrt(p * (1 - p) / int(n_samples)), int(n_samples), steps, int(seed))


# --- operator identities -----------------------------------------------------


@dataclass(frozen=True)
class PairingQuadrature:
    radius: float = 8.0
    panel_width: float = 2.0
    order: int = 12


def extension_pairing_sides(group, omega, phi, Phi, quad=None):
    """Both sides of ``int E^omega phi . Phi = |W| int_{C+} phi . A_omega Phi``.

    The left side uses a mirror-aligned rule over ``R^d`` and evaluates the
    extension by folding; the right side integrates over the chamber with
    the averaged function.
    """
    quad = quad or PairingQuadrature()
    rs = group.root_system
    origin = np.zeros(rs.dimension)
    full = full_space_rule(rs, origin, quad.radius, quad.panel_width, quad.order, group=group)
    half = chamber_rule(rs, origin, quad.radius, quad.panel_width, quad.order)
    lhs = full.integrate(lambda z: extend_function(group, omega, phi, z) * Phi(z))
    rhs = group.order * half.integrate(lambda y: phi(y) * symmetrize_function(group, omega, Phi, y))
    return lhs, rhs


def check_extension_pairing(group, omega, phi, Phi, quad=None, eps=1e-300):
    lhs, rhs = extension_pairing_sides(group, omega, phi, Phi, quad)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + eps)


def check_derivative_intertwining(group, omega, F, grad_F, y):
    """Max discrepancies of the two derivative identities at points ``y``.

    With ``A_w`` the weighted average and ``g_ji`` the matrix entries:
    ``A_w(d_j F) = sum_i d_i(A_{w g_ji} F)`` and
    ``d_i(A_w F) = sum_j A_{w g_ji}(d_j F)``.  Derivatives of averaged
    functions are formed by the chain rule ``d_i F(g y) = sum_m (d_m F)(g y) g_mi``.
    Returns ``(h2, h3)``.
    """
    w = weight_values(group, omega)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    M = group.matrices
    order = group.order
    G = np.stack([np.asarray(grad_F(y @ Mg.T)) for Mg in M])  # (|W|, N, d): (grad F)(g y)
    chain = np.einsum("gnm,gmi->gni", G, M)  # d_i [F(g y)]

    lhs2 = np.einsum("g,gnj->nj", w, G) / order
    rhs2 = np.einsum("g,gji,gni->nj", w, M, chain) / order

    lhs3 = np.einsum("g,gni->ni", w, chain) / order
    rhs3 = np.zeros_like(lhs3)
    for i in range(group.dimension):
        for j in range(group.dimension):
            rhs3[:, i] += symmetrize_function(
                group, w * M[:, j, i], lambda p, j=j: np.asarray(grad_F(p))[..., j], y)
    return float(np.max(np.abs(lhs2 - rhs2))), float(np.max(np.abs(lhs3 - rhs3)))
