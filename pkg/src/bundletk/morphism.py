"""Consistency between path morphisms and pairs of linear transports.

A path morphism carries one fibre map per source sample together with a
sample-to-sample base map.  It is consistent with a transport pair (T1, T2)
when the fibre maps commute with the transports:

    M(j) . H1(i->j) = H2(f(i)->f(j)) . M(i)   for all sample pairs.

Consistent morphisms are exactly those generated from a single conjugator
matrix C0 via M(i) = F2(f(i))^{-1} C0 F1(i), and exactly those transported
by the induced morphism-bundle transport K(i->j): M -> H2 . M . H1^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NotConsistent, ShapeMismatch, SingularFibreMap
from .grids import FiberSpec, PathGrid
from .numutil import DEFAULT_TOL, as_matrix, is_invertible, rel_residual
from .transport import FrameFactor, LinearTransport, factor_from_transport


@dataclass(frozen=True)
class BaseMap:
    """Sample-index realization of a base map f between two path grids."""

    source_grid: PathGrid
    target_grid: PathGrid
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) != len(self.source_grid):
            raise GridMismatch(
                f"base map covers {len(idx)} samples, source grid has "
                f"{len(self.source_grid)}"
            )
        bad = [i for i in idx if not 0 <= i < len(self.target_grid)]
        if bad:
            raise GridMismatch(f"base map leaves the target grid at indices {bad}")

    @classmethod
    def identity(cls, grid: PathGrid) -> "BaseMap":
        return cls(grid, grid, tuple(range(len(grid))))

    def __call__(self, i: int) -> int:
        return self.indices[i]


@dataclass(frozen=True)
class PathMorphism:
    """Fibre maps along a path plus the underlying base map."""

    base: BaseMap
    fibre_maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.fibre_maps)
        object.__setattr__(self, "fibre_maps", mats)
        if len(mats) != len(self.base.source_grid):
            raise ShapeMismatch(
                f"{len(mats)} fibre maps for {len(self.base.source_grid)} samples"
            )
        shapes = {m.shape for m in mats}
        if len(shapes) > 1:
            raise ShapeMismatch(f"fibre maps have mixed shapes {sorted(shapes)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.fibre_maps[0].shape


@dataclass(frozen=True)
class ConjugatorC:
    """The conjugator matrix attached to an anchor sample."""

    anchor: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))


@dataclass(frozen=True)
class ConsistencyReport:
    max_residual: float
    passed: bool
    worst_pair: tuple[int, int] | None = None


def _check_shapes(m: PathMorphism, t1: LinearTransport, t2: LinearTransport) -> None:
    n2, n1 = m.shape
    if t1.fiber.dim != n1:
        raise ShapeMismatch(f"fibre maps expect source dimension {n1}, T1 has {t1.fiber.dim}")
    if t2.fiber.dim != n2:
        raise ShapeMismatch(f"fibre maps expect target dimension {n2}, T2 has {t2.fiber.dim}")
    if m.base.source_grid != t1.grid:
        raise GridMismatch("morphism source grid differs from T1 grid")
    if m.base.target_grid != t2.grid:
        raise GridMismatch("morphism target grid differs from T2 grid")


def check_consistency(
    m: PathMorphism,
    t1: LinearTransport,
    t2: LinearTransport,
    tol: float = DEFAULT_TOL,
) -> ConsistencyReport:
    """Worst-pair residual of the commutation law M(j) H1(i->j) = H2(...) M(i)."""
    _check_shapes(m, t1, t2)
    s = len(m.base.source_grid)
    worst = 0.0
    worst_pair = (0, 0)
    for i in range(s):
        for j in range(s):
            lhs = m.fibre_maps[j] @ t1.matrix(i, j)
            rhs = t2.matrix(m.base(i), m.base(j)) @ m.fibre_maps[i]
            r = rel_residual(lhs, rhs)
            if r > worst:
                worst, worst_pair = r, (i, j)
    passed = worst <= tol
    return ConsistencyReport(worst, passed, None if passed else worst_pair)


def derive_conjugator(
    m: PathMorphism,
    t1: LinearTransport,
    t2: LinearTransport,
    anchor: int = 0,
    tol: float = DEFAULT_TOL,
) -> ConjugatorC:
    """Conjugator at the anchor sample for a consistent morphism.

    For a consistent pair the fibre map at the anchor itself serves:
    M(i) = H2(f(anchor)->f(i)) . C . H1(i->anchor) holds for every i.
    """
    report = check_consistency(m, t1, t2, tol)
    if not report.passed:
        raise NotConsistent(
            f"morphism is not consistent with the transports "
            f"(residual {report.max_residual:.3e} at pair {report.worst_pair})"
        )
    if not 0 <= anchor < len(m.base.source_grid):
        raise IndexError(f"anchor {anchor} outside grid")
    return ConjugatorC(anchor, m.fibre_maps[anchor].copy())


def transport_conjugator(
    c: ConjugatorC,
    t1: LinearTransport,
    t2: LinearTransport,
    base: BaseMap,
    new_anchor: int,
) -> ConjugatorC:
    """Move a conjugator to another anchor: C' = H2(f(a)->f(a')) C H1(a'->a)."""
    mat = (
        t2.matrix(base(c.anchor), base(new_anchor))
        @ c.matrix
        @ t1.matrix(new_anchor, c.anchor)
    )
    return ConjugatorC(new_anchor, mat)


def synthesize_consistent(
    c0: np.ndarray,
    f1: FrameFactor,
    f2: FrameFactor,
    base: BaseMap,
) -> PathMorphism:
    """Build the consistent morphism generated by a conjugator matrix.

    M(i) = F2(f(s_i))^{-1} . C0 . F1(s_i); the result passes check_consistency
    against the transports induced by f1 and f2 by construction.
    """
    c0 = as_matrix(c0, f2.fiber.dim, f1.fiber.dim)
    if base.source_grid != f1.grid or base.target_grid != f2.grid:
        raise GridMismatch("base map grids differ from the factor grids")
    t2 = LinearTransport(f2)
    maps = tuple(
        t2._f_inv[base(i)] @ c0 @ f1.matrices[i] for i in range(len(f1.grid))
    )
    return PathMorphism(base, maps)


def induced_transport_apply(
    t1: LinearTransport,
    t2: LinearTransport,
    base: BaseMap,
    m_at_i: np.ndarray,
    i: int,
    j: int,
) -> np.ndarray:
    """Move a fibre map from sample i to sample j with the induced transport.

    Returns H2(f(i)->f(j)) . M . H1(j->i); this defines a transport on
    sample-attached fibre maps (composition and identity laws hold).
    """
    m_at_i = as_matrix(m_at_i, t2.fiber.dim, t1.fiber.dim)
    return t2.matrix(base(i), base(j)) @ m_at_i @ t1.matrix(j, i)


def check_section_transported(
    m: PathMorphism,
    t1: LinearTransport,
    t2: LinearTransport,
    tol: float = DEFAULT_TOL,
) -> ConsistencyReport:
    """Check that the morphism, read as a section, is moved onto itself.

    Passes iff M(j) equals the induced transport of M(i) from i to j for all
    pairs; the verdict agrees with check_consistency on every input.
    """
    _check_shapes(m, t1, t2)
    s = len(m.base.source_grid)
    worst = 0.0
    worst_pair = (0, 0)
    for i in range(s):
        for j in range(s):
            moved = induced_transport_apply(t1, t2, m.base, m.fibre_maps[i], i, j)
            r = rel_residual(m.fibre_maps[j], moved)
            if r > worst:
                worst, worst_pair = r, (i, j)
    passed = worst <= tol
    return ConsistencyReport(worst, passed, None if passed else worst_pair)


def invert_to_transport(
    m: PathMorphism,
    t2: LinearTransport,
    tol: float = DEFAULT_TOL,
) -> LinearTransport:
    """The unique source transport making an invertible morphism consistent.

    For invertible fibre maps, H1(i->j) = M(j)^{-1} . H2(f(i)->f(j)) . M(i);
    the family satisfies the groupoid laws and (M, (H1, T2)) is consistent.
    """
    n2, n1 = m.shape
    if n1 != n2:
        raise ShapeMismatch("inversion needs square fibre maps")
    if m.base.target_grid != t2.grid:
        raise GridMismatch("morphism target grid differs from T2 grid")
    for i, mat in enumerate(m.fibre_maps):
        if not is_invertible(mat):
            raise SingularFibreMap(f"fibre map at sample {i} is singular")
    inv = [np.linalg.inv(mat) for mat in m.fibre_maps]

    def h(i: int, j: int) -> np.ndarray:
        return inv[j] @ t2.matrix(m.base(i), m.base(j)) @ m.fibre_maps[i]

    factor = factor_from_transport(
        m.base.source_grid, FiberSpec(n1), h, anchor=0, tol=max(tol, 1e-7)
    )
    return LinearTransport(factor)
