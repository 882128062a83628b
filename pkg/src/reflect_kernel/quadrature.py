"""Composite Gauss-Legendre rules on boxes, sectors, balls and chambers.

Rules are plain node/weight arrays.  Integrands are called on chunks of
nodes of shape ``(k, d)`` and must return ``(k,)`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .coxeter import axis_constraints, chamber_contains, chamber_sector
from .errors import InvalidArgumentError

DEFAULT_ORDER = 12
CHUNK = 1 << 16


@lru_cache(maxsize=64)
def _leggauss(m):
    x, w = leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(m, a, b):
    """``m``-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(int(m))
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


def composite_gauss_legendre(a, b, panels, m=DEFAULT_ORDER):
    if b < a:
        raise InvalidArgumentError("composite rule needs a <= b")
    panels = max(1, int(panels))
    edges = np.linspace(a, b, panels + 1)
    x, w = _leggauss(int(m))
    h = 0.5 * np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * (x[None, :] + 1.0)).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _interval(a, b, width, m, breaks=()):
    """Composite rule on ``[a, b]`` with panel width <= ``width``, split at ``breaks``."""
    pts = [a] + sorted(p for p in breaks if a < p < b) + [b]
    xs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        x, w = composite_gauss_legendre(lo, hi, math.ceil((hi - lo) / width), m)
        xs.append(x)
        ws.append(w)
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def _tensor(axes):
    nodes = np.stack(np.meshgrid(*[a[0] for a in axes], indexing="ij"), axis=-1)
    weights = np.ones(nodes.shape[:-1])
    for k, (_, w) in enumerate(axes):
        shape = [1] * len(axes)
        shape[k] = -1
        weights = weights * w.reshape(shape)
    return nodes.reshape(-1, len(axes)), weights.ravel()


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for integrating over a (truncated) region.

    ``radius`` is the truncation radius used to build the rule.
    """

    nodes: np.ndarray
    weights: np.ndarray
    radius: float = math.inf

    def __len__(self):
        return len(self.weights)

    def integrate(self, f, chunk=CHUNK):
        parts = []
        for s in range(0, len(self.weights), chunk):
            vals = np.asarray(f(self.nodes[s:s + chunk]), dtype=float)
            parts.append(float(np.dot(self.weights[s:s + chunk], vals)))
        return math.fsum(parts)

    def restrict(self, mask):
        return QuadratureRule(self.nodes[mask], self.weights[mask], self.radius)

    def mapped(self, matrix):
        """The image of the rule under an orthogonal map."""
        return QuadratureRule(self.nodes @ np.asarray(matrix).T, self.weights, self.radius)


def box_rule(lows, highs, panel_width, order=DEFAULT_ORDER, breaks=None):
    """Tensor composite rule on a box, optionally split at ``breaks[j]`` on axis ``j``."""
    lows = np.atleast_1d(np.asarray(lows, dtype=float))
    highs = np.atleast_1d(np.asarray(highs, dtype=float))
    breaks = breaks or [()] * len(lows)
    axes = [_interval(a, b, panel_width, order, br) for a, b, br in zip(lows, highs, breaks)]
    n, w = _tensor(axes)
    return QuadratureRule(n, w)


def sector_rule(r0, r1, theta0, theta1, panel_width, order=DEFAULT_ORDER):
    """Polar rule on ``{r0 < r < r1, theta0 < theta < theta1}`` including the Jacobian ``r``."""
    rr, wr = _interval(r0, r1, panel_width, order)
    arc = max(r1, panel_width) * (theta1 - theta0)
    tt, wt = composite_gauss_legendre(theta0, theta1, math.ceil(arc / panel_width), order)
    R, T = np.meshgrid(rr, tt, indexing="ij")
    W = (wr * rr)[:, None] * wt[None, :]
    nodes = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
    return QuadratureRule(nodes, W.ravel())


def ball_rule(center, radius, panel_width, order=DEFAULT_ORDER):
    """Rule on the Euclidean ball ``B(center, radius)`` in dimension 1, 2 or 3."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    d = c.size
    if d == 1:
        x, w = _interval(c[0] - radius, c[0] + radius, panel_width, order)
        return QuadratureRule(x[:, None], w, radius)
    if d == 2:
        q = sector_rule(0.0, radius, 0.0, 2 * np.pi, panel_width, order)
        return QuadratureRule(q.nodes + c, q.weights, radius)
    if d == 3:
        rr, wr = _interval(0.0, radius, panel_width, order)
        n_ang = math.ceil(2 * np.pi * radius / panel_width)
        uu, wu = composite_gauss_legendre(-1.0, 1.0, max(1, n_ang // 2), order)
        pp, wp = composite_gauss_legendre(0.0, 2 * np.pi, n_ang, order)
        R, U, P = np.meshgrid(rr, uu, pp, indexing="ij")
        S = np.sqrt(1.0 - U**2)
        nodes = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * U], axis=-1).reshape(-1, 3)
        W = (wr * rr**2)[:, None, None] * wu[None, :, None] * wp[None, None, :]
        return QuadratureRule(nodes + c, W.ravel(), radius)
    raise InvalidArgumentError("ball_rule supports dimensions 1 to 3")


def chamber_rule(rs, center, radius, panel_width, order=DEFAULT_ORDER):
    """Rule covering ``C_+`` intersected with ``B(center, radius)``.

    Coordinate-aligned chambers get a clipped box, planar chambers a polar
    sector; any other chamber falls back to a box whose nodes outside the
    chamber get weight zero (and are dropped).
    """
    c = np.asarray(center, dtype=float)
    d = rs.dimension
    if rs.rank == 0:
        q = box_rule(c - radius, c + radius, panel_width, order)
        return QuadratureRule(q.nodes, q.weights, radius)
    signs = axis_constraints(rs)
    if signs is not None:
        lo = c - radius
        hi = c + radius
        for j, s in enumerate(signs):
            if s > 0:
                lo[j] = max(lo[j], 0.0)
            elif s < 0:
                hi[j] = min(hi[j], 0.0)
        q = box_rule(lo, hi, panel_width, order)
        return QuadratureRule(q.nodes, q.weights, radius)
    if d == 2:
        start, aperture = chamber_sector(rs)
        rc = float(np.linalg.norm(c))
        q = sector_rule(max(0.0, rc - radius), rc + radius, start, start + aperture, panel_width, order)
        return QuadratureRule(q.nodes, q.weights, radius)
    q = box_rule(c - radius, c + radius, panel_width, order)
    inside = chamber_contains(rs, q.nodes, 0.0)
    return QuadratureRule(q.nodes[inside], q.weights[inside], radius)


def mirror_angles(rs):
    """Sorted polar angles in ``[0, 2 pi)`` of all planar mirror rays."""
    ang = []
    for a in rs.roots:
        phi = math.atan2(a[1], a[0]) + math.pi / 2
        ang.extend([phi % (2 * math.pi), (phi + math.pi) % (2 * math.pi)])
    ang = np.sort(np.array(ang))
    keep = [ang[0]]
    for a in ang[1:]:
        if a - keep[-1] > 1e-9 and keep[0] + 2 * math.pi - a > 1e-9:
            keep.append(a)
    return np.array(keep)


def full_space_rule(rs, center, radius, panel_width, order=DEFAULT_ORDER, group=None):
    """Rule covering ``B(center, radius)`` in ``R^d`` with pieces aligned to the mirrors.

    Every piece lies inside a single closed Weyl chamber so piecewise smooth
    integrands (extensions of chamber functions) integrate at full order.
    """
    c = np.asarray(center, dtype=float)
    if rs.rank == 0:
        return chamber_rule(rs, c, radius, panel_width, order)
    signs = axis_constraints(rs)
    if signs is not None:
        brk = [(0.0,) if s else () for s in signs]
        q = box_rule(c - radius, c + radius, panel_width, order, brk)
        return QuadratureRule(q.nodes, q.weights, radius)
    if rs.dimension == 2:
        rc = float(np.linalg.norm(c))
        r0, r1 = max(0.0, rc - radius), rc + radius
        ang = list(mirror_angles(rs)) + [mirror_angles(rs)[0] + 2 * math.pi]
        parts = [sector_rule(r0, r1, a, b, panel_width, order) for a, b in zip(ang[:-1], ang[1:])]
        return QuadratureRule(np.vstack([p.nodes for p in parts]),
                              np.concatenate([p.weights for p in parts]), radius)
    if group is None:
        raise InvalidArgumentError("full_space_rule needs the group for this root system")
    base = chamber_rule(rs, np.zeros_like(c), float(np.linalg.norm(c)) + radius, panel_width, order)
    return QuadratureRule(np.vstack([base.nodes @ M.T for M in group.matrices]),
                          np.tile(base.weights, group.order), radius)
