"""Measurable cylinder sets as vectorized predicates with expression trees.

Every set is determined at some level n: membership of a realization depends
only on its level-n projection, so the same object can be evaluated on trees
of any depth >= n.  Sets are built from a small grammar

    disk-product | halfspace | affine-image | union | intersection |
    complement | acted-image

and each node knows how to evaluate itself on a batch of level-n vectors and
how to serialize itself to a JSON expression tree (complex numbers as
``[re, im]`` pairs).

Boolean combinations of sets at different levels are evaluated at the finest
participating level, feeding each operand the projection of the input to the
operand's own level, which is exactly the cylinder-set semantics.

``acted_set(g, A)`` is the image of ``A`` under a group element: a tree lies
in ``g . A`` iff acting with the conjugate (inverse) element puts it in ``A``.
Evaluation multiplies the level-``max(g.level, A.level)`` vector by the
conjugate phases and projects down to ``A``'s level; this agrees with acting
on the full tree because phases are constant below their own level.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

import numpy as np

from .group import GroupElement, embed
from .tree import (
    ComplexGaussianConvention,
    DepthMismatchError,
    LevelMismatchError,
    LevelVector,
    TreeSample,
    project_vectors,
)

disk_mass = ComplexGaussianConvention.disk_mass


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------


class BorelSet:
    """Base class: a membership predicate determined at a fixed level."""

    __slots__ = ("_level",)

    kind: str = ""

    def __init__(self, level: int) -> None:
        if level < 0:
            raise ValueError("determination level must be non-negative")
        self._level = int(level)

    @property
    def level(self) -> int:
        return self._level

    @property
    def determination_level(self) -> int:
        return self._level

    # -- evaluation ---------------------------------------------------------

    def _member(self, x: np.ndarray) -> np.ndarray:
        """Membership for a batch of vectors at exactly this set's level."""
        raise NotImplementedError

    def indicator_at(self, x: np.ndarray, level: int | None = None) -> np.ndarray:
        """Boolean membership for a batch ``(batch, 2**level)`` of vectors.

        ``level`` defaults to the set's own level; deeper inputs are projected
        down first.
        """
        arr = np.asarray(x, dtype=np.complex128)
        if arr.ndim == 1:
            arr = arr[None, :]
        at = self._level if level is None else int(level)
        if arr.shape[1] != 1 << at:
            raise LevelMismatchError(f"expected {1 << at} columns for level {at}, got {arr.shape[1]}")
        if at < self._level:
            raise DepthMismatchError(f"set is determined at level {self._level}, input is at {at}")
        if at > self._level:
            arr = project_vectors(arr, at, self._level)
        return self._member(arr)

    def indicator(self, levels: Sequence[np.ndarray]) -> np.ndarray:
        """Boolean membership for a batch of realizations given per-level arrays."""
        if len(levels) <= self._level:
            raise DepthMismatchError(
                f"set is determined at level {self._level}, only {len(levels)} levels given"
            )
        return self.indicator_at(levels[self._level])

    def contains(self, z: LevelVector) -> bool:
        """Membership of a single level vector (level >= the set's level)."""
        return bool(self.indicator_at(z.entries[None, :], z.level)[0])

    def contains_tree(self, tree: TreeSample) -> bool:
        if tree.depth < self._level:
            raise DepthMismatchError(
                f"tree depth {tree.depth} below determination level {self._level}"
            )
        return bool(self.indicator_at(tree.level(self._level)[None, :])[0])

    def _eval_child(self, child: "BorelSet", x: np.ndarray) -> np.ndarray:
        """Evaluate a child node on vectors given at this node's level."""
        if child.level == self._level:
            return child._member(x)
        return child._member(project_vectors(x, self._level, child.level))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(level={self._level})"


def _complex_pairs(arr: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in arr]


def _pairs_to_complex(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(p[0], p[1]) for p in pairs], dtype=np.complex128)


# ---------------------------------------------------------------------------
# leaves of the grammar
# ---------------------------------------------------------------------------


class DiskProduct(BorelSet):
    """Product of open disks, one per path at the determination level."""

    __slots__ = ("centers", "radii")

    kind = "disk-product"

    def __init__(self, level: int, centers: np.ndarray, radii: np.ndarray) -> None:
        super().__init__(level)
        self.centers = centers
        self.radii = radii

    def _member(self, x: np.ndarray) -> np.ndarray:
        return np.all(np.abs(x - self.centers) < self.radii, axis=1)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "level": self._level,
            "centers": _complex_pairs(self.centers),
            "radii": [float(r) for r in self.radii],
        }


class Halfspace(BorelSet):
    """Closed halfspace ``Re(<normal, x>) <= offset`` at a fixed level."""

    __slots__ = ("normal", "offset")

    kind = "halfspace"

    def __init__(self, level: int, normal: np.ndarray, offset: float) -> None:
        super().__init__(level)
        self.normal = normal
        self.offset = float(offset)

    def _member(self, x: np.ndarray) -> np.ndarray:
        return (x @ np.conj(self.normal)).real <= self.offset

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "level": self._level,
            "normal": _complex_pairs(self.normal),
            "offset": self.offset,
        }


class AffineImage(BorelSet):
    """Image ``scale * base + shift``: membership of x tests ``(x - shift)/scale`` in base."""

    __slots__ = ("base", "scale", "shift")

    kind = "affine-image"

    def __init__(self, base: BorelSet, scale: float, shift: np.ndarray) -> None:
        super().__init__(base.level)
        self.base = base
        self.scale = float(scale)
        self.shift = shift

    def _member(self, x: np.ndarray) -> np.ndarray:
        return self.base._member((x - self.shift) / self.scale)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "scale": self.scale,
            "shift": _complex_pairs(self.shift),
            "base": self.base.to_json(),
        }


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


class UnionSet(BorelSet):
    __slots__ = ("children",)

    kind = "union"

    def __init__(self, children: tuple[BorelSet, ...]) -> None:
        super().__init__(max(c.level for c in children))
        self.children = children

    def _member(self, x: np.ndarray) -> np.ndarray:
        out = self._eval_child(self.children[0], x)
        for child in self.children[1:]:
            out = out | self._eval_child(child, x)
        return out

    def to_json(self) -> dict:
        return {"kind": self.kind, "children": [c.to_json() for c in self.children]}


class IntersectionSet(BorelSet):
    __slots__ = ("children",)

    kind = "intersection"

    def __init__(self, children: tuple[BorelSet, ...]) -> None:
        super().__init__(max(c.level for c in children))
        self.children = children

    def _member(self, x: np.ndarray) -> np.ndarray:
        out = self._eval_child(self.children[0], x)
        for child in self.children[1:]:
            out = out & self._eval_child(child, x)
        return out

    def to_json(self) -> dict:
        return {"kind": self.kind, "children": [c.to_json() for c in self.children]}


class ComplementSet(BorelSet):
    __slots__ = ("child",)

    kind = "complement"

    def __init__(self, child: BorelSet) -> None:
        super().__init__(child.level)
        self.child = child

    def _member(self, x: np.ndarray) -> np.ndarray:
        return ~self.child._member(x)

    def to_json(self) -> dict:
        return {"kind": self.kind, "child": self.child.to_json()}


class ActedSet(BorelSet):
    """Image of a set under a group element."""

    __slots__ = ("element", "base", "_conj_phases")

    kind = "acted-image"

    def __init__(self, element: GroupElement, base: BorelSet) -> None:
        super().__init__(max(element.level, base.level))
        self.element = element
        self.base = base
        self._conj_phases = np.conj(embed(element, self._level).phases)

    def _member(self, x: np.ndarray) -> np.ndarray:
        return self._eval_child(self.base, x * self._conj_phases)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "element": {
                "level": self.element.level,
                "phases": _complex_pairs(self.element.phases),
            },
            "base": self.base.to_json(),
        }


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

CenterLike = Union[LevelVector, np.ndarray, Sequence[complex], complex, float]


def _coerce_centers(level: int, centers: CenterLike) -> np.ndarray:
    if isinstance(centers, LevelVector):
        if centers.level != level:
            raise LevelMismatchError(f"centers at level {centers.level}, set at level {level}")
        arr = centers.entries.copy()
    else:
        arr = np.asarray(centers, dtype=np.complex128).reshape(-1)
        if arr.size == 1:
            arr = np.full(1 << level, arr[0], dtype=np.complex128)
    if arr.size != 1 << level:
        raise ValueError(f"level {level} requires {1 << level} centers, got {arr.size}")
    arr.setflags(write=False)
    return arr


def disk_product(level: int, centers: CenterLike, radii) -> DiskProduct:
    """Product of open disks ``|x(path) - center(path)| < radius(path)``.

    A scalar center or radius is broadcast to every path.  Radii must be
    positive; ``inf`` is allowed and makes the factor trivial.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    c = _coerce_centers(level, centers)
    r = np.asarray(radii, dtype=np.float64).reshape(-1)
    if r.size == 1:
        r = np.full(1 << level, r[0])
    if r.size != 1 << level:
        raise ValueError(f"level {level} requires {1 << level} radii, got {r.size}")
    if np.any(np.isnan(r)) or np.any(r <= 0.0):
        raise ValueError("radii must be positive")
    r.setflags(write=False)
    return DiskProduct(level, c, r)


def halfspace(level: int, normal: CenterLike, offset: float) -> Halfspace:
    """Closed halfspace ``Re(sum conj(normal(path)) * x(path)) <= offset``."""
    n = _coerce_centers(level, normal)
    if not np.any(n):
        raise ValueError("normal must be nonzero")
    return Halfspace(level, n, offset)


def affine_image(base: BorelSet, scale: float, shift: CenterLike) -> AffineImage:
    """The set ``scale * base + shift`` at the base's determination level."""
    if not scale > 0.0:
        raise ValueError("scale must be strictly positive")
    s = _coerce_centers(base.level, shift)
    return AffineImage(base, scale, s)


def boolean_combine(op: str, operands: Sequence[BorelSet]) -> BorelSet:
    """Union, intersection, or complement of existing sets.

    Operands may live at different levels; the result is determined at the
    finest one.  Complement takes exactly one operand.
    """
    ops = tuple(operands)
    if not ops:
        raise ValueError("boolean_combine needs at least one operand")
    if op == "union":
        return UnionSet(ops)
    if op == "intersection":
        return IntersectionSet(ops)
    if op == "complement":
        if len(ops) != 1:
            raise ValueError("complement takes exactly one operand")
        return ComplementSet(ops[0])
    raise ValueError(f"unknown boolean operation {op!r}")


def acted_set(element: GroupElement, base: BorelSet) -> ActedSet:
    """Image of ``base`` under ``element``; determined at the finer level."""
    return ActedSet(element, base)


def symmetric_difference(a: BorelSet, b: BorelSet) -> BorelSet:
    """Points in exactly one of the two sets."""
    return boolean_combine(
        "union",
        [
            boolean_combine("intersection", [a, boolean_combine("complement", [b])]),
            boolean_combine("intersection", [b, boolean_combine("complement", [a])]),
        ],
    )


# ---------------------------------------------------------------------------
# deserialization
# ---------------------------------------------------------------------------


def set_from_json(obj: dict) -> BorelSet:
    """Rebuild a set from its JSON expression tree."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("set description must be an object with a 'kind' key")
    kind = obj["kind"]
    if kind == "disk-product":
        return disk_product(int(obj["level"]), _pairs_to_complex(obj["centers"]), obj["radii"])
    if kind == "halfspace":
        return halfspace(int(obj["level"]), _pairs_to_complex(obj["normal"]), float(obj["offset"]))
    if kind == "affine-image":
        return affine_image(
            set_from_json(obj["base"]), float(obj["scale"]), _pairs_to_complex(obj["shift"])
        )
    if kind in ("union", "intersection"):
        return boolean_combine(kind, [set_from_json(c) for c in obj["children"]])
    if kind == "complement":
        return boolean_combine("complement", [set_from_json(obj["child"])])
    if kind == "acted-image":
        element = GroupElement(
            int(obj["element"]["level"]), _pairs_to_complex(obj["element"]["phases"])
        )
        return acted_set(element, set_from_json(obj["base"]))
    raise ValueError(f"unknown set kind {kind!r}")
