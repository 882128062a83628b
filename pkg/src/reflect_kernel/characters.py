"""Homomorphisms ``eta: W -> {+1, -1}`` of a finite reflection group."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, UnsupportedCharacterError


@dataclass(frozen=True, eq=False)
class TwoCharacter:
    """A sign character of a reflection group, stored as one value per element."""

    group: object
    values: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        if v.shape != (self.group.order,) or not np.all(np.abs(v) == 1):
            raise InvalidArgumentError("character values must be +/-1, one per group element")
        if v[0] != 1:
            raise InvalidArgumentError("a character must map the identity to +1")
        if not is_homomorphism(self.group, v):
            raise InvalidArgumentError("values do not define a homomorphism")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, g):
        return int(self.values[g])

    @property
    def simple_values(self):
        """Values on the simple reflections, in simple-root order."""
        return tuple(int(self.values[g]) for g in self.group.generators)

    @property
    def bits(self):
        """``eta_j = (1 - chi(s_j)) / 2`` on the simple reflections."""
        return tuple((1 - v) // 2 for v in self.simple_values)

    def same_as(self, other):
        return self.group is other.group and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"TwoCharacter(name={self.name!r}, simple_values={self.simple_values})"


def is_homomorphism(group, values):
    v = np.asarray(values)
    return bool(np.array_equal(v[group.mul_table], np.outer(v, v)))


def trivial_character(group):
    return TwoCharacter(group, np.ones(group.order, dtype=np.int64), "trivial")


def sgn_character(group):
    name = "sgn" if np.any(group.dets < 0) else "trivial"
    return TwoCharacter(group, group.dets.copy(), name)


def _sigma_index(group):
    # reflection in the line orthogonal to z_0, i.e. (x1, x2) -> (-x1, x2)
    return group.index_of(np.diag([-1.0, 1.0]))


def _name_characters(group, chars):
    fam = group.root_system.family
    dets = group.dets
    named = []
    others = []
    for k, vals in enumerate(chars):
        if np.all(vals == 1):
            named.append("trivial")
        elif np.array_equal(vals, dets):
            named.append("sgn")
        else:
            named.append(None)
            others.append(k)
    if fam and fam[0] == "orthogonal":
        for k in others:
            bits = tuple((1 - int(chars[k][g])) // 2 for g in group.generators)
            named[k] = ",".join(str(b) for b in bits)
    elif fam and fam[0] == "dihedral" and others:
        sigma = _sigma_index(group)
        for k in others:
            named[k] = "eta1" if chars[k][sigma] == 1 else "eta2"
    else:
        for k in others:
            named[k] = f"hom{k}"
    return named


def enumerate_characters(group):
    """All homomorphisms ``W -> {+1, -1}``.

    Every sign assignment on the simple reflections (lexicographic, ``+1``
    first) is propagated along the stored words and kept if it respects the
    full multiplication table.
    """
    m = len(group.generators)
    accepted = []
    for signs in itertools.product((1, -1), repeat=m):
        s = np.asarray(signs, dtype=np.int64)
        vals = np.array([int(np.prod(s[list(e.word)])) if e.word else 1 for e in group.elements],
                        dtype=np.int64)
        if not is_homomorphism(group, vals):
            continue
        if any(np.array_equal(vals, a) for a in accepted):
            continue
        accepted.append(vals)
    names = _name_characters(group, accepted)
    return [TwoCharacter(group, v, nm) for v, nm in zip(accepted, names)]


def character_kernel(chi):
    """Indices of the elements with ``chi(g) = +1`` (a normal subgroup)."""
    return np.nonzero(chi.values == 1)[0]


def find_character(group, name):
    """Look up a character by name.

    Accepts ``trivial``, ``sgn``, the dihedral names ``eta1`` / ``eta2``, a
    comma-separated bit vector on the simple reflections (``1`` meaning
    ``-1``), or ``hom<k>`` by enumeration index.
    """
    chars = enumerate_characters(group)
    key = name.strip()
    for c in chars:
        if c.name == key:
            return c
    if key.startswith("hom") and key[3:].isdigit():
        k = int(key[3:])
        if k < len(chars):
            return chars[k]
    if "," in key or key in ("0", "1"):
        try:
            bits = tuple(int(b) for b in key.split(","))
        except ValueError:
            bits = None
        if bits is not None:
            for c in chars:
                if c.bits == bits:
                    return c
    fam = group.root_system.family
    if fam and fam[0] == "dihedral" and key in ("eta1", "eta2"):
        raise UnsupportedCharacterError(
            f"D_{fam[1]} has no character {key}: only n even admits eta1/eta2")
    known = ", ".join(c.name for c in chars)
    raise InvalidArgumentError(f"unknown character {name!r}; available: {known}")
