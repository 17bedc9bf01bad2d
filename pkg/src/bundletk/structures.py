"""Checks for structures carried along a path: almost complex endomorphisms,
bilinear forms, Finsler-type norms, sections, and the scalar/additive laws
of black-box transports."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ShapeMismatch, SingularFactor
from .grids import PathGrid
from .numutil import DEFAULT_TOL, as_matrix, is_invertible, rel_residual
from .transport import GeneralTransport, LinearTransport


@dataclass(frozen=True)
class AlmostComplexField:
    """Endomorphism matrices J(x) with J^2 = -identity along a path."""

    grid: PathGrid
    matrices: tuple[np.ndarray, ...]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(mats) != len(self.grid):
            raise ShapeMismatch(f"{len(mats)} matrices for {len(self.grid)} samples")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise ShapeMismatch("almost complex matrices must share a square shape")
        if n % 2 != 0:
            raise ShapeMismatch(f"almost complex structures need even dimension, got {n}")
        report = check_almost_complex(mats, self.tol)
        if not report.passed:
            raise ValueError(
                f"J^2 + identity has residual {report.max_residual:.3e} "
                f"at sample {report.worst_sample}"
            )

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]


@dataclass(frozen=True)
class BilinearField:
    """Sampled symmetric or antisymmetric nondegenerate bilinear forms."""

    grid: PathGrid
    matrices: tuple[np.ndarray, ...]
    kind: str = "symmetric"  # or "antisymmetric"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        if self.kind not in ("symmetric", "antisymmetric"):
            raise ValueError(f"unknown bilinear kind {self.kind!r}")
        if len(mats) != len(self.grid):
            raise ShapeMismatch(f"{len(mats)} matrices for {len(self.grid)} samples")
        n = mats[0].shape[0]
        sign = 1.0 if self.kind == "symmetric" else -1.0
        for i, m in enumerate(mats):
            if m.shape != (n, n):
                raise ShapeMismatch(f"matrix at sample {i} has shape {m.shape}")
            if rel_residual(m.T, sign * m) > self.tol:
                raise ValueError(f"matrix at sample {i} is not {self.kind}")
            if not is_invertible(m):
                raise SingularFactor(f"bilinear form at sample {i} is degenerate")

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]


@dataclass(frozen=True)
class FinslerSampler:
    """Black-box nonnegative, positively homogeneous function on fibre vectors."""

    grid: PathGrid
    func: Callable[[int, np.ndarray], float]


@dataclass(frozen=True)
class SectionField:
    """One fibre vector per sample."""

    grid: PathGrid
    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float) for v in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        if len(vecs) != len(self.grid):
            raise ShapeMismatch(f"{len(vecs)} vectors for {len(self.grid)} samples")


@dataclass(frozen=True)
class StructureReport:
    max_residual: float
    passed: bool
    worst_sample: int | tuple | None = None


def check_almost_complex(matrices: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> StructureReport:
    """Pass iff J(i)^2 + identity vanishes (relatively) at every sample."""
    worst, where = 0.0, None
    for i, j in enumerate(matrices):
        j = as_matrix(j)
        if j.shape[0] != j.shape[1]:
            raise ShapeMismatch(f"matrix at sample {i} is not square")
        r = rel_residual(j @ j, -np.eye(j.shape[0]))
        if r > worst:
            worst, where = r, i
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_ac_consistency(
    j_field: AlmostComplexField,
    transport: LinearTransport,
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Consistency of an almost complex field with a linear transport.

    Two equivalent conditions are both evaluated as a cross-check: the
    commutation law J(j) H(i->j) = H(i->j) J(i) on all pairs, and the
    complex-structure law C0^2 = -identity for the conjugator
    C0 = F(s_0) J(s_0) F(s_0)^{-1}.
    """
    if j_field.grid != transport.grid:
        raise ShapeMismatch("field and transport are on different grids")
    if j_field.dim != transport.fiber.dim:
        raise ShapeMismatch("field and transport have different fibre dimensions")
    s = len(j_field.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            h = transport.matrix(i, j)
            r = rel_residual(j_field.matrices[j] @ h, h @ j_field.matrices[i])
            if r > worst:
                worst, where = r, (i, j)
    f0 = transport.factor.matrices[0]
    c0 = f0 @ j_field.matrices[0] @ np.linalg.inv(f0)
    r = rel_residual(c0 @ c0, -np.eye(j_field.dim))
    if r > worst:
        worst, where = r, (0, 0)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_homogeneity(
    transport: GeneralTransport,
    scalars: Sequence[float],
    vectors: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Sampled scalar-multiplication law: T(i->j)(c v) = c T(i->j)(v)."""
    s = len(transport.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            for v in vectors:
                v = np.asarray(v, dtype=float)
                tv = np.asarray(transport.map(i, j, v), dtype=float)
                for lam in scalars:
                    lhs = np.asarray(transport.map(i, j, lam * v), dtype=float)
                    r = float(np.linalg.norm(lhs - lam * tv)) / max(
                        1.0, abs(lam) * float(np.linalg.norm(tv))
                    )
                    if r > worst:
                        worst, where = r, (i, j)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_additivity(
    transport: GeneralTransport,
    vector_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Sampled addition law: T(i->j)(u + v) = T(i->j)(u) + T(i->j)(v)."""
    s = len(transport.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            for u, v in vector_pairs:
                u = np.asarray(u, dtype=float)
                v = np.asarray(v, dtype=float)
                lhs = np.asarray(transport.map(i, j, u + v), dtype=float)
                rhs = np.asarray(transport.map(i, j, u), dtype=float) + np.asarray(
                    transport.map(i, j, v), dtype=float
                )
                r = float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs)))
                if r > worst:
                    worst, where = r, (i, j)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_section_addition(
    transport: GeneralTransport,
    section: SectionField,
    probe_vectors: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Shifted-transport law for a transported section A:

    A(s_j) + T(i->j)(u) = T(i->j)(A(s_i) + u).

    For a section that is itself moved by the transport, this holds exactly
    when the transport is additive.
    """
    if section.grid != transport.grid:
        raise ShapeMismatch("section and transport are on different grids")
    s = len(transport.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            for u in probe_vectors:
                u = np.asarray(u, dtype=float)
                lhs = section.vectors[j] + np.asarray(transport.map(i, j, u), dtype=float)
                rhs = np.asarray(transport.map(i, j, section.vectors[i] + u), dtype=float)
                r = float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs)))
                if r > worst:
                    worst, where = r, (i, j)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_finsler_consistency(
    sampler: FinslerSampler,
    transport: LinearTransport,
    probe_vectors: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Norm-function invariance: Fm(i, v) = Fm(j, H(i->j) v) on all probes."""
    if sampler.grid != transport.grid:
        raise ShapeMismatch("sampler and transport are on different grids")
    s = len(transport.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            for v in probe_vectors:
                v = np.asarray(v, dtype=float)
                here = float(sampler.func(i, v))
                there = float(sampler.func(j, transport.matrix(i, j) @ v))
                r = abs(here - there) / max(1.0, here)
                if r > worst:
                    worst, where = r, (i, j)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def check_bilinear_consistency(
    field: BilinearField,
    transport: LinearTransport,
    tol: float = DEFAULT_TOL,
) -> StructureReport:
    """Congruence invariance: B(i) = H(i->j)^T B(j) H(i->j) on all pairs."""
    if field.grid != transport.grid:
        raise ShapeMismatch("field and transport are on different grids")
    if field.dim != transport.fiber.dim:
        raise ShapeMismatch("field and transport have different fibre dimensions")
    s = len(field.grid)
    worst, where = 0.0, None
    for i in range(s):
        for j in range(s):
            h = transport.matrix(i, j)
            r = rel_residual(field.matrices[i], h.T @ field.matrices[j] @ h)
            if r > worst:
                worst, where = r, (i, j)
    passed = worst <= tol
    return StructureReport(worst, passed, None if passed else where)


def default_probes(dim: int, seed: int = 0, count: int = 32) -> np.ndarray:
    """Seeded default probe vectors for the black-box checks."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((count, dim))


#: Seeded default scalar set for homogeneity checks (real field).
DEFAULT_SCALARS = (-2.0, -1.0, 0.5, 2.0)
