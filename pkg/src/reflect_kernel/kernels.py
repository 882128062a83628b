"""Free-space kernels and their eta-symmetrizations over a reflection group.

For a base kernel ``K(w)`` on ``R^d`` and a character ``eta`` of ``W`` the
symmetrized kernel on the positive chamber is

    K_eta(x, y) = sum_{g in W} eta(g) K(g x - y).

With the Gauss-Weierstrass kernel this is the heat kernel of the chamber
with Neumann conditions on facets whose reflection has ``eta = +1`` and
Dirichlet conditions where ``eta = -1``.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characters import TwoCharacter
from .coxeter import chamber_contains, chamber_sector, fold_points
from .errors import InvalidArgumentError, OnWallError, SingularityError, UnsupportedCharacterError

SINGULAR_TOL = 1e-14
COMPENSATE_ABOVE = 16


def heat_base(t, d, w):
    """Gauss-Weierstrass kernel ``(4 pi t)^(-d/2) exp(-|w|^2 / 4t)`` on ``(..., d)`` arrays."""
    if not t > 0:
        raise InvalidArgumentError(f"heat kernel needs t > 0, got t={t!r}")
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != d:
        raise InvalidArgumentError(f"expected points of dimension {d}, got shape {w.shape}")
    r2 = np.einsum("...i,...i->...", w, w)
    return (4.0 * math.pi * t) ** (-0.5 * d) * np.exp(-r2 / (4.0 * t))


def heat_1d(t, u):
    return np.exp(-np.square(u) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)


@dataclass(frozen=True)
class BaseKernel:
    """Translation-invariant kernel on ``R^d``.

    ``kind`` is ``"heat"`` (parameter ``t``) or ``"resolvent3d"``
    (parameter ``lambda``, ``d = 3``): ``exp(-sqrt(lambda) |w|) / (4 pi |w|)``.
    """

    kind: str
    dimension: int
    parameter: float

    def __post_init__(self):
        if self.kind not in ("heat", "resolvent3d"):
            raise InvalidArgumentError(f"unknown base kernel {self.kind!r}")
        if not self.parameter > 0:
            raise InvalidArgumentError(f"{self.kind} kernel parameter must be > 0")
        if self.kind == "resolvent3d" and self.dimension != 3:
            raise InvalidArgumentError("resolvent3d is defined for d = 3 only")

    def __call__(self, w):
        if self.kind == "heat":
            return heat_base(self.parameter, self.dimension, w)
        w = np.asarray(w, dtype=float)
        r = np.sqrt(np.einsum("...i,...i->...", w, w))
        if np.any(r < SINGULAR_TOL):
            raise SingularityError("resolvent kernel evaluated at its singularity w = 0")
        return np.exp(-math.sqrt(self.parameter) * r) / (4.0 * math.pi * r)


def heat_kernel(t, d):
    return BaseKernel("heat", int(d), float(t))


def resolvent_kernel(lam):
    return BaseKernel("resolvent3d", 3, float(lam))


@dataclass(frozen=True, eq=False)
class SymmetrizedKernel:
    base: BaseKernel
    group: object
    character: TwoCharacter

    def __post_init__(self):
        if self.base.dimension != self.group.dimension:
            raise InvalidArgumentError("base kernel and group dimensions differ")
        if self.character.group is not self.group:
            raise InvalidArgumentError("character belongs to a different group")

    def __call__(self, x, y):
        return symmetrized_eval(self, x, y)

    def at_time(self, t):
        """Same group and character with a heat base at time ``t``."""
        return SymmetrizedKernel(heat_kernel(t, self.group.dimension), self.group, self.character)


def heat_symmetrized(group, character, t):
    return SymmetrizedKernel(heat_kernel(t, group.dimension), group, character)


def group_sum(base, matrices, weights, x, y):
    """``sum_g weights[g] * base(M_g x - y)`` in element order.

    Neumaier-compensated accumulation is used for more than
    ``COMPENSATE_ABOVE`` terms.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    compensate = len(matrices) > COMPENSATE_ABOVE
    acc = None
    comp = None
    for M, wgt in zip(matrices, weights):
        if wgt == 0:
            continue
        term = wgt * base(x @ M.T - y)
        if acc is None:
            acc = np.array(term, dtype=float, copy=True)
            comp = np.zeros_like(acc)
            continue
        if compensate:
            s = acc + term
            big = np.abs(acc) >= np.abs(term)
            comp += np.where(big, (acc - s) + term, (term - s) + acc)
            acc = s
        else:
            acc = acc + term
    if acc is None:
        return np.zeros(np.broadcast_shapes(x.shape, y.shape)[:-1])
    out = acc + comp
    return float(out) if out.ndim == 0 else out


def symmetrized_eval(kernel, x, y):
    """Evaluate ``sum_g eta(g) K(g x - y)``.

    ``x`` and ``y`` broadcast over leading dimensions.  The formula is
    evaluated as written for any points in ``R^d`` (callers probing
    boundary derivatives rely on this); no normalization is applied.
    """
    g = kernel.group
    return group_sum(kernel.base, g.matrices, kernel.character.values, x, y)


def orthant_heat_product(eta, t, x, y):
    """Heat kernel of the orthant ``(0, inf)^d`` for the character with bit vector ``eta``.

    ``prod_j (p_t(x_j - y_j) + (-1)^eta_j p_t(x_j + y_j))`` with the 1-D
    Gauss-Weierstrass kernel ``p_t``.
    """
    if not t > 0:
        raise InvalidArgumentError(f"heat kernel needs t > 0, got t={t!r}")
    eta = np.asarray(eta, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != eta.size or y.shape[-1] != eta.size:
        raise InvalidArgumentError("eta, x and y must share the dimension")
    sign = np.where(eta % 2 == 0, 1.0, -1.0)
    factors = heat_1d(t, x - y) + sign * heat_1d(t, x + y)
    out = np.prod(factors, axis=-1)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _dihedral_matrices(n):
    ang = 2.0 * np.pi * np.arange(n) / n
    c, s = np.cos(ang), np.sin(ang)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], axis=-2)
    sigma = np.diag([-1.0, 1.0])
    refl = rot @ sigma
    rot.setflags(write=False)
    refl.setflags(write=False)
    return rot, refl


DIHEDRAL_KINDS = ("N", "D", "eta1", "eta2")


def dihedral_heat(kind, n, t, x, y):
    """Closed-form heat kernels of the planar cone with aperture ``pi / n``.

    Explicit sums over the rotations ``r^m`` (by ``2 pi m / n``) and the
    reflections ``r^m sigma``, ``sigma(x1, x2) = (-x1, x2)``:

    * ``N``: all ``2n`` terms with sign ``+``;
    * ``D``: rotations ``+``, reflections ``-``;
    * ``eta1`` (n even): ``+`` on ``r^(2m)``, ``r^(2m) sigma``;
    * ``eta2`` (n even): ``+`` on ``r^(2m)``, ``r^(2m+1) sigma``.
    """
    if kind not in DIHEDRAL_KINDS:
        raise InvalidArgumentError(f"kind must be one of {DIHEDRAL_KINDS}, got {kind!r}")
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidArgumentError(f"dihedral order must be an integer >= 3, got {n!r}")
    if kind in ("eta1", "eta2") and n % 2:
        raise UnsupportedCharacterError(f"{kind} exists only for even n (got n={n})")
    if not t > 0:
        raise InvalidArgumentError(f"heat kernel needs t > 0, got t={t!r}")
    rot, refl = _dihedral_matrices(int(n))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def p(M):
        return heat_base(t, 2, x @ M.T - y)

    total = 0.0
    if kind in ("N", "D"):
        s = 1.0 if kind == "N" else -1.0
        for m in range(n):
            total = total + (p(rot[m]) + s * p(refl[m]))
    else:
        for m in range(n // 2):
            even_rot = p(rot[2 * m]) - p(rot[2 * m + 1])
            if kind == "eta1":
                refl_part = p(refl[2 * m]) - p(refl[2 * m + 1])
            else:
                refl_part = p(refl[2 * m + 1]) - p(refl[2 * m])
            total = total + (even_rot + refl_part)
    return float(total) if np.ndim(total) == 0 else total


def weight_values(group, omega):
    """Per-element weights from a character, an array or a callable ``g -> value``."""
    if isinstance(omega, TwoCharacter):
        return omega.values.astype(float)
    if callable(omega):
        return np.array([omega(g) for g in range(group.order)])
    w = np.asarray(omega)
    if w.shape != (group.order,):
        raise InvalidArgumentError(f"weight needs one value per group element ({group.order})")
    return w


def symmetrize_function(group, omega, F, y):
    """Weighted average ``(1/|W|) sum_g omega(g) F(g y)``.

    ``F`` maps ``(..., d)`` arrays to ``(...)`` arrays.
    """
    w = weight_values(group, omega)
    y = np.asarray(y, dtype=float)
    acc = 0.0
    for M, wg in zip(group.matrices, w):
        acc = acc + wg * np.asarray(F(y @ M.T))
    out = acc / group.order
    return out.item() if np.ndim(out) == 0 else out


def extend_function(group, omega, f, x, on_wall="raise"):
    """Weighted extension: ``E f(g x+) = omega(g) f(x+)`` for ``x+`` in the chamber.

    Points on a mirror raise :class:`OnWallError`, or give NaN with
    ``on_wall="nan"``.
    """
    w = weight_values(group, omega)
    x = np.asarray(x, dtype=float)
    g, xp = fold_points(group, x)
    bad = g < 0
    if np.any(bad) and on_wall == "raise":
        raise OnWallError("extension is undefined on mirror hyperplanes")
    gi = np.where(bad, 0, g)
    vals = w[gi] * np.asarray(f(xp), dtype=float)
    vals = np.where(bad, np.nan, vals)
    return vals.item() if np.ndim(vals) == 0 else vals


@dataclass(eq=False)
class GridField:
    """Sample nodes in the chamber together with values.

    ``nodes`` has shape ``(N, d)``, ``values`` shape ``(N,)``.  ``metadata``
    holds string labels written as ``# key=value`` lines in CSV output.
    """

    nodes: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    boundary: bool = False

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 2 or self.values.shape != (len(self.nodes),):
            raise InvalidArgumentError("node count must match value count")

    def to_csv(self):
        buf = io.StringIO()
        for k in sorted(self.metadata):
            buf.write(f"# {k}={self.metadata[k]}\n")
        d = self.nodes.shape[1]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(d)] + ["value"])
        for p, v in zip(self.nodes, self.values):
            w.writerow([f"{c:.17g}" for c in p] + [f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        meta = {}
        lines = text.splitlines()
        body = []
        for ln in lines:
            if ln.startswith("# "):
                k, _, v = ln[2:].partition("=")
                meta[k] = v
            elif ln:
                body.append(ln)
        rows = list(csv.reader(body))
        header, data = rows[0], rows[1:]
        d = len(header) - 1
        arr = np.array([[float(c) for c in r] for r in data], dtype=float).reshape(-1, d + 1)
        return cls(arr[:, :d], arr[:, d], meta)

    def to_json(self):
        return {
            "metadata": dict(sorted(self.metadata.items())),
            "nodes": [[float(c) for c in p] for p in self.nodes],
            "values": [float(v) for v in self.values],
        }


def tensor_grid(rs, axes):
    """Tensor grid from per-axis node lists, keeping nodes inside ``C_+``."""
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) != rs.dimension:
        raise InvalidArgumentError(f"need {rs.dimension} axes")
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, rs.dimension)
    return nodes[np.atleast_1d(chamber_contains(rs, nodes))]


def polar_grid(rs, radii, n_angles):
    """Polar grid of the planar chamber at angular midpoints (all strictly inside)."""
    start, aperture = chamber_sector(rs)
    th = start + aperture * (np.arange(n_angles) + 0.5) / n_angles
    r = np.asarray(radii, dtype=float)
    R, T = np.meshgrid(r, th, indexing="ij")
    nodes = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
    return nodes[np.atleast_1d(chamber_contains(rs, nodes))]


def fill_grid(nodes, func, metadata=None, threads=1, chunk=4096):
    """Evaluate ``func`` on node chunks, optionally on a thread pool.

    Chunks are evaluated independently and reassembled in order, so the
    result does not depend on the schedule.
    """
    nodes = np.asarray(nodes, dtype=float)
    pieces = [nodes[s:s + chunk] for s in range(0, len(nodes), chunk)] or [nodes]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(lambda p: np.asarray(func(p), dtype=float), pieces))
    else:
        vals = [np.asarray(func(p), dtype=float) for p in pieces]
    return GridField(nodes, np.concatenate(vals) if vals else np.zeros(0), dict(metadata or {}))
