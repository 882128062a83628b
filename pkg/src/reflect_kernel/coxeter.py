"""Root systems, finite reflection groups and Weyl-chamber geometry.

A root system is stored as an array of unit vectors together with the
positive subset selected by a check vector and the simple roots that cut out
the positive chamber.  The reflection group is generated explicitly as a
list of orthogonal matrices by breadth-first search over words in the simple
reflections.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import nnls
from scipy.spatial import cKDTree

from .errors import (
    ClosureError,
    DegenerateCheckVectorError,
    InconsistentRootSystemError,
    InvalidArgumentError,
    MultiplicityError,
    NonFiniteClosureError,
    OnWallError,
)

UNIT_TOL = 1e-12
CLOSURE_TOL = 1e-10
DEDUP_TOL = 1e-9
WALL_TOL = 1e-12
DECOMP_TOL = 1e-8
MAX_GROUP_ORDER = 10**6


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def reflect(alpha, x):
    """Reflect ``x`` in the hyperplane orthogonal to the unit vector ``alpha``.

    ``x`` may carry leading batch dimensions, ``(..., d)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if abs(np.linalg.norm(alpha) - 1.0) > UNIT_TOL:
        raise InvalidArgumentError(
            f"reflection vector must have unit norm, got |alpha| = {np.linalg.norm(alpha)!r}")
    x = np.asarray(x, dtype=float)
    return x - 2.0 * (x @ alpha)[..., None] * alpha


def reflection_matrix(alpha):
    alpha = np.asarray(alpha, dtype=float)
    return np.eye(alpha.size) - 2.0 * np.outer(alpha, alpha)


@dataclass(frozen=True, eq=False)
class RootSystem:
    """A normalized root system with a chosen positive subset.

    Attributes
    ----------
    dimension : int
        Ambient dimension ``d``.
    roots : ndarray, shape (|R|, d)
        Unit roots.  Roots come in ``+/-`` pairs.
    positive : tuple of int
        Indices into ``roots`` of the positive roots, ``<alpha, check> > 0``.
    simple : tuple of int
        Indices into ``roots`` of the simple roots, in increasing order.
    check_vector : ndarray, shape (d,)
    family : tuple or None
        Provenance tag such as ``("dihedral", 5)`` or
        ``("orthogonal", 3, (1, 2, 3))``; ``None`` for user systems.
    """

    dimension: int
    roots: np.ndarray
    positive: tuple
    simple: tuple
    check_vector: np.ndarray
    family: Optional[tuple] = field(default=None)

    @property
    def positive_roots(self):
        return self.roots[list(self.positive)]

    @property
    def simple_roots(self):
        return self.roots[list(self.simple)].reshape(len(self.simple), self.dimension)

    @property
    def rank(self):
        return len(self.simple)

    def __repr__(self):
        fam = f", family={self.family!r}" if self.family else ""
        return (f"RootSystem(d={self.dimension}, |R|={len(self.roots)}, "
                f"simple={self.simple}{fam})")


def simple_roots(positive_roots, tol=DECOMP_TOL):
    """Indices of the simple roots inside an array of positive roots.

    A positive root is simple when it is not a non-negative combination of
    two or more of the other positive roots.  The result is checked for
    linear independence and for spanning every positive root with
    non-negative coefficients.
    """
    P = np.asarray(positive_roots, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        return ()
    simple = []
    for i in range(len(P)):
        others = np.delete(P, i, axis=0)
        if len(others) < 2:
            simple.append(i)
            continue
        coef, resid = nnls(others.T, P[i])
        if resid > tol or np.count_nonzero(coef > tol) < 2:
            simple.append(i)
    S = P[simple]
    if np.linalg.matrix_rank(S, tol=1e-10) != len(simple):
        raise InconsistentRootSystemError(
            f"extracted simple roots {simple} are linearly dependent")
    for i, beta in enumerate(P):
        coef, resid = nnls(S.T, beta)
        if resid > tol:
            raise InconsistentRootSystemError(
                f"positive root {i} has no non-negative expansion over the simple roots "
                f"(residual {resid:.3g})")
    return tuple(simple)


def _default_check_vector(R, supplied_positive, seed):
    if supplied_positive is not None and len(supplied_positive):
        v = np.sum(supplied_positive, axis=0)
        nv = np.linalg.norm(v)
        if nv > 0:
            v = v / nv
            if np.min(np.abs(R @ v)) > 1e-6:
                return v
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        v = rng.standard_normal(R.shape[1])
        v /= np.linalg.norm(v)
        if np.min(np.abs(R @ v)) > 1e-6:
            return v
    raise DegenerateCheckVectorError("could not find a generic check vector")


def build_root_system(roots, check_vector=None, *, seed=0, family=None):
    """Validate a list of root vectors and build a :class:`RootSystem`.

    Input vectors are normalized; if only one of ``+alpha`` / ``-alpha`` is
    given the pair is completed.  When ``check_vector`` is omitted and the
    input contains no ``+/-`` pairs, the normalized sum of the input is tried
    first (the input is then read as a positive system), otherwise a seeded
    random generic vector is used.
    """
    raw = [np.asarray(r, dtype=float).ravel() for r in roots]
    if not raw:
        raise InvalidArgumentError("root list is empty")
    d = raw[0].size
    if d < 1 or any(r.size != d for r in raw):
        raise InvalidArgumentError("all roots must have the same positive dimension")
    A = np.vstack(raw)
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise InvalidArgumentError("roots must be finite and nonzero")
    A = A / norms[:, None]

    G = A @ A.T
    for i, j in zip(*np.nonzero(np.triu(G > 1 - 1e-12, k=1))):
        raise MultiplicityError(f"roots {i} and {j} are parallel (same direction)")

    had_pairs = bool(np.any(np.triu(G < -1 + 1e-12, k=1)))
    completed = list(A)
    for a in A:
        if not np.any(A @ a < -1 + 1e-12):
            completed.append(-a)
    R = np.vstack(completed)

    tree = cKDTree(R)
    for i, a in enumerate(R):
        images = R - 2.0 * (R @ a)[:, None] * a
        dist, _ = tree.query(images)
        bad = np.nonzero(dist > CLOSURE_TOL)[0]
        if bad.size:
            raise ClosureError(
                f"reflection in root {i} maps root {bad[0]} outside the system "
                f"(distance {dist[bad[0]]:.3g})")

    if check_vector is None:
        cv = _default_check_vector(R, None if had_pairs else A, seed)
    else:
        cv = np.asarray(check_vector, dtype=float).ravel()
        if cv.size != d:
            raise InvalidArgumentError(f"check vector must have dimension {d}")
    ips = R @ cv
    if np.min(np.abs(ips)) <= CLOSURE_TOL:
        k = int(np.argmin(np.abs(ips)))
        raise DegenerateCheckVectorError(f"check vector is orthogonal to root {k}")

    positive = tuple(int(i) for i in np.nonzero(ips > 0)[0])
    simple_local = simple_roots(R[list(positive)])
    simple = tuple(sorted(positive[i] for i in simple_local))
    return RootSystem(d, _frozen(R), positive, simple, _frozen(cv), family)


def dihedral_roots(n):
    """Root system of the dihedral group ``D_n``: ``z_j = exp(i pi j / n)``.

    Root ``j`` of the returned system is ``z_j``.  The check vector is the
    angular bisector of the positive chamber, which is the sector
    ``0 < theta < pi/n`` for even ``n`` and ``|theta| < pi/(2n)`` for odd
    ``n``.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidArgumentError(f"dihedral order must be an integer >= 3, got {n!r}")
    n = int(n)
    j = np.arange(2 * n)
    R = np.column_stack([np.cos(np.pi * j / n), np.sin(np.pi * j / n)])
    bisector = np.pi / (2 * n) if n % 2 == 0 else 0.0
    cv = np.array([np.cos(bisector), np.sin(bisector)])
    rs = build_root_system(R, cv, family=("dihedral", n))

    k = n // 2
    if n % 2 == 0:
        expected_pos = set(range(3 * k + 1, 4 * k)) | set(range(0, k + 1))
        expected_simple = {3 * k + 1, k}
    else:
        expected_pos = set(range(3 * k + 2, 4 * k + 2)) | set(range(0, k + 1))
        expected_simple = {3 * k + 2, k}
    if len(rs.roots) != 2 * n or set(rs.positive) != expected_pos or set(rs.simple) != expected_simple:
        raise InconsistentRootSystemError(f"dihedral positive system for n={n} is not the expected one")
    return rs


def orthogonal_roots(d, J):
    """Orthonormal root system ``{+/- e_j : j in J}`` in ``R^d`` (1-based ``J``)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {d!r}")
    J = tuple(int(j) for j in J)
    if not 1 <= len(J) <= d:
        raise InvalidArgumentError(f"need 1 <= |J| <= d, got J={J}")
    if len(set(J)) != len(J) or any(j < 1 or j > d for j in J):
        raise InvalidArgumentError(f"J must hold distinct indices in 1..{d}, got {J}")
    if list(J) != sorted(J):
        raise InvalidArgumentError(f"J must be strictly increasing, got {J}")
    E = np.eye(d)[[j - 1 for j in J]]
    cv = E.sum(axis=0) / np.sqrt(len(J))
    return build_root_system(np.vstack([E, -E]), cv, family=("orthogonal", int(d), J))


def trivial_roots(d):
    """The empty root system in ``R^d``; its group is ``{identity}``."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    return RootSystem(d, _frozen(np.zeros((0, d))), (), (), _frozen(np.zeros(d)), ("trivial", d))


@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    det: int
    word: tuple

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T


class _MatrixIndex:
    """Tolerant lookup of matrices: hash on rounded entries, exact scan on miss."""

    def __init__(self, d):
        self._keys = {}
        self._buf = np.empty((16, d, d))
        self._n = 0

    @staticmethod
    def _key(M):
        return tuple(np.round(M, 6).ravel() + 0.0)

    def find(self, M):
        hit = self._keys.get(self._key(M))
        if hit is not None and np.max(np.abs(self._buf[hit] - M)) <= DEDUP_TOL:
            return hit
        if self._n == 0:
            return None
        diff = np.abs(self._buf[: self._n] - M).reshape(self._n, -1).max(axis=1)
        j = int(np.argmin(diff))
        return j if diff[j] <= DEDUP_TOL else None

    def add(self, M):
        if self._n == len(self._buf):
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[self._n] = M
        self._keys.setdefault(self._key(M), self._n)
        self._n += 1
        return self._n - 1


class ReflectionGroup:
    """A finite reflection group given by explicit matrices.

    Element 0 is the identity.  ``mul_table[g, h]`` is the index of ``g h``
    and ``generators[k]`` is the element index of the reflection in the
    ``k``-th simple root.
    """

    def __init__(self, root_system, elements, mul_table, inverse, generators):
        self.root_system = root_system
        self.elements = tuple(elements)
        self.mul_table = mul_table
        self.inverse = inverse
        self.generators = tuple(generators)
        self.matrices = _frozen(np.stack([e.matrix for e in self.elements]))
        dets = np.array([e.det for e in self.elements], dtype=np.int64)
        dets.setflags(write=False)
        self.dets = dets

    @property
    def order(self):
        return len(self.elements)

    @property
    def dimension(self):
        return self.root_system.dimension

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"ReflectionGroup(order={self.order}, {self.root_system!r})"

    def mul(self, g, h):
        return int(self.mul_table[g, h])

    def act(self, g, x):
        """Apply element ``g`` to points ``x`` of shape ``(..., d)``."""
        return np.asarray(x, dtype=float) @ self.matrices[g].T

    def index_of(self, matrix, tol=DEDUP_TOL):
        diff = np.abs(self.matrices - np.asarray(matrix)).reshape(self.order, -1).max(axis=1)
        j = int(np.argmin(diff))
        return j if diff[j] <= tol else None


def generate_group(rs, max_elements=MAX_GROUP_ORDER):
    """Generate the reflection group of ``rs`` by BFS over simple-reflection words."""
    d = rs.dimension
    gens = [reflection_matrix(a) for a in rs.simple_roots]
    m = len(gens)
    index = _MatrixIndex(d)
    mats = [np.eye(d)]
    words = [()]
    index.add(mats[0])
    right = []  # right[i][k] = index of mats[i] @ gens[k]

    i = 0
    while i < len(mats):
        row = []
        for k, S in enumerate(gens):
            M = mats[i] @ S
            j = index.find(M)
            if j is None:
                if len(mats) >= max_elements:
                    raise NonFiniteClosureError(
                        f"group generation exceeded {max_elements} elements; "
                        "the root system is probably malformed")
                j = index.add(M)
                mats.append(M)
                words.append(words[i] + (k,))
            row.append(j)
        right.append(row)
        i += 1

    order = len(mats)
    right = np.array(right, dtype=np.int64).reshape(order, m)
    mul = np.empty((order, order), dtype=np.int64)
    cols = np.arange(order)
    for j, w in enumerate(words):
        c = cols
        for k in w:
            c = right[c, k]
        mul[:, j] = c

    M = np.stack(mats)
    if order * order * d * d <= 5 * 10**7:
        prod = np.einsum("aij,bjk->abik", M, M)
        err = np.abs(prod - M[mul]).max()
        if err > CLOSURE_TOL:
            raise InconsistentRootSystemError(f"multiplication table mismatch ({err:.3g})")
    mul.setflags(write=False)

    inverse = np.argmax(mul == 0, axis=1)
    inverse.setflags(write=False)

    elements = []
    for Mi, w in zip(mats, words):
        det = float(np.linalg.det(Mi))
        sgn = 1 if det > 0 else -1
        if abs(det - sgn) > CLOSURE_TOL:
            raise InconsistentRootSystemError(f"group element with determinant {det!r}")
        Mi = _frozen(Mi)
        elements.append(GroupElement(Mi, sgn, tuple(w)))
    generators = [int(right[0, k]) for k in range(m)]
    return ReflectionGroup(rs, elements, mul, inverse, generators)


def wall_distances(rs, x):
    """Signed distances ``<x, alpha_k>`` to the simple-root hyperplanes."""
    x = np.asarray(x, dtype=float)
    return x @ rs.simple_roots.T


def boundary_distance(rs, x):
    """Euclidean distance from an interior point to the chamber boundary."""
    if rs.rank == 0:
        return np.full(np.shape(x)[:-1], np.inf)
    return wall_distances(rs, x).min(axis=-1)


def chamber_contains(rs, x, wall_tolerance=WALL_TOL):
    """True where ``<x, alpha_k> > wall_tolerance`` for every simple root (open chamber)."""
    x = np.asarray(x, dtype=float)
    if rs.rank == 0:
        out = np.ones(x.shape[:-1], dtype=bool)
    else:
        out = np.all(wall_distances(rs, x) > wall_tolerance, axis=-1)
    return bool(out) if out.ndim == 0 else out


def fold_points(group, x, wall_tolerance=WALL_TOL):
    """Vectorized chamber folding.

    Returns ``(g, x_plus)`` with ``g`` an integer array of element indices
    such that ``g . x_plus = x``; points on a mirror get ``g = -1`` and are
    returned unchanged.
    """
    rs = group.root_system
    X = np.array(x, dtype=float, copy=True)
    flat = X.reshape(-1, rs.dimension)
    g = np.zeros(len(flat), dtype=np.int64)
    if rs.rank == 0:
        return g.reshape(X.shape[:-1]), X
    on_wall = np.any(np.abs(flat @ rs.roots.T) <= wall_tolerance, axis=1)
    g[on_wall] = -1
    S = rs.simple_roots
    gen = np.asarray(group.generators)
    active = np.nonzero(~on_wall)[0]
    for _ in range(len(rs.positive) + 1):
        if active.size == 0:
            break
        ips = flat[active] @ S.T
        neg = ips < 0
        moving = neg.any(axis=1)
        active = active[moving]
        if active.size == 0:
            break
        k = np.argmax(neg[moving], axis=1)
        coef = ips[moving, k]
        flat[active] -= 2.0 * coef[:, None] * S[k]
        g[active] = group.mul_table[g[active], gen[k]]
    else:
        raise InconsistentRootSystemError("chamber folding did not terminate")
    return g.reshape(X.shape[:-1]), X


def fold_to_chamber(group, x, wall_tolerance=WALL_TOL):
    """Fold a single point into the positive chamber.

    Returns ``(g, x_plus)`` with ``g . x_plus = x``.  Raises
    :class:`OnWallError` for points on a mirror.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (group.dimension,):
        raise InvalidArgumentError(f"expected a point of shape ({group.dimension},)")
    g, xp = fold_points(group, x[None, :], wall_tolerance)
    if g[0] < 0:
        raise OnWallError(f"point {x.tolist()} lies on a mirror hyperplane")
    return int(g[0]), xp[0]


def chamber_sector(rs):
    """Planar chamber as a sector: ``(start_angle, aperture)``.

    The chamber is ``{r e^{i phi} : start < phi < start + aperture}``.
    """
    if rs.dimension != 2 or rs.rank == 0:
        raise InvalidArgumentError("chamber_sector needs a planar root system of rank >= 1")
    S = rs.simple_roots
    if rs.rank == 1:
        a = S[0]
        u = np.array([a[1], -a[0]])  # a rotated by -pi/2; sweeping +pi from u covers the a side
        return float(np.arctan2(u[1], u[0])), float(np.pi)
    a1, a2 = S
    u1 = np.array([-a1[1], a1[0]])
    if u1 @ a2 < 0:
        u1 = -u1
    u2 = np.array([-a2[1], a2[0]])
    if u2 @ a1 < 0:
        u2 = -u2
    aperture = float(np.arccos(np.clip(u1 @ u2, -1.0, 1.0)))
    cross = u1[0] * u2[1] - u1[1] * u2[0]
    start = u1 if cross > 0 else u2
    return float(np.arctan2(start[1], start[0])), aperture


def axis_constraints(rs):
    """Per-axis sign constraints when every simple root is a signed unit vector.

    Returns a list with ``+1`` / ``-1`` for axes constrained to be
    positive / negative in the chamber and ``0`` for free axes, or ``None``
    when the chamber is not coordinate-aligned.
    """
    signs = [0] * rs.dimension
    for a in rs.simple_roots:
        nz = np.nonzero(np.abs(a) > 1e-14)[0]
        if nz.size != 1 or abs(abs(a[nz[0]]) - 1.0) > 1e-14:
            return None
        signs[int(nz[0])] = 1 if a[nz[0]] > 0 else -1
    return signs


def chamber_images(group, x):
    """All ``|W|`` images ``g . x``, shape ``(|W|, d)``."""
    return np.einsum("gij,j->gi", group.matrices, np.asarray(x, dtype=float))


def load_family(spec):
    """Build a root system from a JSON-style mapping (see CLI docs)."""
    spec = dict(spec)
    fam = spec.get("family")
    if fam == "dihedral":
        return dihedral_roots(int(spec["n"]))
    if fam == "orthogonal":
        d = int(spec["d"])
        return orthogonal_roots(d, spec.get("J", list(range(1, d + 1))))
    if fam == "trivial":
        return trivial_roots(int(spec["d"]))
    if fam is not None:
        raise InvalidArgumentError(f"unknown root-system family {fam!r}")
    if "roots" not in spec:
        raise InvalidArgumentError("root-system document needs 'family' or 'roots'")
    roots = spec["roots"]
    if "dimension" in spec and any(len(r) != int(spec["dimension"]) for r in roots):
        raise InvalidArgumentError("root length does not match 'dimension'")
    return build_root_system(roots, spec.get("check_vector"), seed=int(spec.get("seed", 0)))


def group_csv_rows(group):
    """Rows ``element_index, det, word, m11..mdd`` with 17 significant digits."""
    d = group.dimension
    header = ["element_index", "det", "word"] + [f"m{i + 1}{j + 1}" for i, j in itertools.product(range(d), range(d))]
    rows = [header]
    for idx, e in enumerate(group.elements):
        word = " ".join(str(k) for k in e.word)
        rows.append([str(idx), str(e.det), word] + [f"{v:.17g}" for v in e.matrix.ravel()])
    return rows


__all__: Sequence[str] = [
    "RootSystem", "GroupElement", "ReflectionGroup", "reflect", "reflection_matrix",
    "build_root_system", "dihedral_roots", "orthogonal_roots", "trivial_roots",
    "simple_roots", "generate_group", "chamber_contains", "fold_to_chamber",
    "fold_points", "chamber_images", "chamber_sector", "axis_constraints", "wall_distances", "boundary_distance", "load_family",
    "group_csv_rows",
]
