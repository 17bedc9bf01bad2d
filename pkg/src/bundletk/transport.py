"""Linear and black-box transports along discretized paths.

A transport along a path assigns to every ordered pair of samples (i, j) an
invertible fibre map obeying the composition law  T(j->k) o T(i->j) = T(i->k)
and the identity law  T(i->i) = id.  Linear transports are represented
canonically by a family of invertible frame factors F(s_i), the two-point
combination F(s_j)^{-1} F(s_i) being the transport matrix from i to j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GroupoidViolation, ShapeMismatch, SingularFactor
from .grids import FiberSpec, PathGrid
from .numutil import DEFAULT_TOL, DET_FLOOR, as_matrix, is_invertible


@dataclass(frozen=True)
class FrameFactor:
    """Family of invertible n x n matrices F(s_i), one per grid sample."""

    grid: PathGrid
    fiber: FiberSpec
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = self.fiber.dim
        mats = tuple(as_matrix(m, n, n) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(mats) != len(self.grid):
            raise ShapeMismatch(
                f"{len(mats)} factor matrices for {len(self.grid)} grid samples"
            )
        stack = np.stack(mats)
        if not np.all(np.isfinite(stack)):
            bad = int(np.nonzero(~np.isfinite(stack).all(axis=(1, 2)))[0][0])
            raise SingularFactor(f"factor matrix at sample {bad} is not finite")
        # batched version of is_invertible: |det| > floor * (spectral norm)^n
        svals = np.linalg.svd(stack, compute_uv=False)
        dets = np.abs(np.linalg.det(stack))
        ok = dets > DET_FLOOR * svals[:, 0] ** n
        if not np.all(ok):
            bad = int(np.nonzero(~ok)[0][0])
            raise SingularFactor(f"factor matrix at sample {bad} is singular")

    @classmethod
    def identity(cls, grid: PathGrid, fiber: FiberSpec) -> "FrameFactor":
        eye = np.eye(fiber.dim)
        return cls(grid, fiber, tuple(eye.copy() for _ in range(len(grid))))


@dataclass(frozen=True)
class GaugeMap:
    """A path-constant invertible matrix acting on frame factors from the left."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not is_invertible(m):
            raise SingularFactor("gauge matrix is singular")


def _refined_inverses(mats: tuple[np.ndarray, ...]) -> np.ndarray:
    """Stacked inverses with one Newton refinement step.

    The refinement squares the residual of the plain inverse, which keeps
    transport matrices accurate for condition numbers up to ~1e6.
    """
    stack = np.stack(mats)
    inv = np.linalg.inv(stack)
    eye = np.eye(stack.shape[-1])
    inv = inv @ (2.0 * eye - stack @ inv)
    return inv


class LinearTransport:
    """Transport induced by a frame factor via H(i->j) = F(s_j)^{-1} F(s_i).

    Immutable after construction; the inverse factors are precomputed, so
    instances are safe to share between threads.
    """

    def __init__(self, factor: FrameFactor):
        self.factor = factor
        self._f = np.stack(factor.matrices)
        self._f_inv = _refined_inverses(factor.matrices)
        self._eye = np.eye(factor.fiber.dim)

    @property
    def grid(self) -> PathGrid:
        return self.factor.grid

    @property
    def fiber(self) -> FiberSpec:
        return self.factor.fiber

    def matrix(self, i: int, j: int) -> np.ndarray:
        """Transport matrix from sample i to sample j; exact identity for i == j."""
        n_samples = len(self.grid)
        if not (0 <= i < n_samples and 0 <= j < n_samples):
            raise IndexError(f"sample pair ({i}, {j}) outside grid of {n_samples}")
        if i == j:
            return self._eye.copy()
        return self._f_inv[j] @ self._f[i]

    def matrix_stack(self) -> np.ndarray:
        """All transport matrices as an array H[j, i] = transport from i to j."""
        h = np.einsum("jab,ibc->jiac", self._f_inv, self._f)
        idx = np.arange(len(self.grid))
        h[idx, idx] = self._eye
        return h

    def apply(self, i: int, j: int, v: np.ndarray) -> np.ndarray:
        return self.matrix(i, j) @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class GeneralTransport:
    """A possibly nonlinear transport given as a black box on fibre vectors.

    ``map(i, j, v)`` must realize the transport of v from sample i to sample j.
    The callable must be reentrant; instances hold no mutable state.
    """

    grid: PathGrid
    fiber: FiberSpec
    map: Callable[[int, int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GroupoidReport:
    """Outcome of a groupoid-law verification."""

    max_residual: float
    passed: bool
    worst_triple: tuple[int, int, int] | None = None


def _extended_matrix_stack(factor: FrameFactor) -> np.ndarray:
    """Transport matrices computed in extended precision.

    LAPACK has no extended-precision inverse, so the double-precision inverse
    is polished with two Newton steps carried out in longdouble.
    """
    f = np.stack(factor.matrices).astype(np.longdouble)
    inv = np.linalg.inv(np.stack(factor.matrices)).astype(np.longdouble)
    eye = np.eye(f.shape[-1], dtype=np.longdouble)
    for _ in range(2):
        inv = inv @ (2.0 * eye - f @ inv)
    h = np.einsum("jab,ibc->jiac", inv, f)
    idx = np.arange(f.shape[0])
    h[idx, idx] = eye
    return h


def transport_matrix(transport: LinearTransport, i: int, j: int) -> np.ndarray:
    """Matrix of the transport from sample i to sample j, F(s_j)^{-1} F(s_i)."""
    return transport.matrix(i, j)


def _linear_groupoid_residual(h: np.ndarray) -> tuple[float, tuple[int, int, int]]:
    """Worst normalized composition/identity residual over all sample triples.

    Residuals are normalized by max(1, |H(k,j)| * |H(j,i)|) so the verdict is
    meaningful for badly scaled but well-defined transports.
    """
    s = h.shape[0]
    comp = h[:, :, None] @ h[None, :, :]  # batched over (k, j, i)
    resid = comp - h[:, None, :, :, :]
    norms = np.sqrt(np.einsum("jiab,jiab->ji", h, h))
    scale = np.maximum(norms[:, :, None] * norms[None, :, :], norms[:, None, :])
    scale = np.maximum(1.0, scale)
    rel = np.sqrt(np.einsum("kjiab,kjiab->kji", resid, resid)) / scale
    flat = int(np.argmax(rel))
    k, j, i = np.unravel_index(flat, (s, s, s))
    worst = float(rel[k, j, i])
    # identity residual, normalized against the diagonal entries themselves
    eye = np.eye(h.shape[-1])
    id_rel = np.linalg.norm(h[np.arange(s), np.arange(s)] - eye, axis=(1, 2))
    id_rel = id_rel / np.maximum(1.0, np.linalg.norm(h[np.arange(s), np.arange(s)], axis=(1, 2)))
    i0 = int(np.argmax(id_rel))
    if id_rel[i0] > worst:
        return float(id_rel[i0]), (i0, i0, i0)
    return worst, (int(i), int(j), int(k))


def verify_groupoid(
    transport: LinearTransport | GeneralTransport,
    tol: float = DEFAULT_TOL,
    *,
    seed: int = 0,
    n_probes: int = 8,
) -> GroupoidReport:
    """Check composition and identity laws on all sampled triples.

    Linear transports are checked on full matrices; black-box transports on a
    seeded set of random fibre vectors.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if isinstance(transport, LinearTransport):
        h = transport.matrix_stack()
        worst, triple = _linear_groupoid_residual(h)
        if worst > tol:
            # near the tolerance the double-precision residual is dominated by
            # the eps*cond floor of the stored inverses; re-evaluate in
            # extended precision to measure the family itself
            worst, triple = _linear_groupoid_residual(
                _extended_matrix_stack(transport.factor)
            )
        return GroupoidReport(worst, worst <= tol, triple if worst > tol else None)

    rng = np.random.default_rng(seed)
    n = transport.fiber.dim
    s = len(transport.grid)
    probes = rng.standard_normal((n_probes, n))
    worst = 0.0
    worst_triple: tuple[int, int, int] | None = None
    for i in range(s):
        for v in probes:
            w = np.asarray(transport.map(i, i, v), dtype=float)
            r = np.linalg.norm(w - v) / max(1.0, np.linalg.norm(v))
            if r > worst:
                worst, worst_triple = r, (i, i, i)
    for i in range(s):
        for j in range(s):
            for k in range(s):
                for v in probes:
                    via = transport.map(j, k, transport.map(i, j, v))
                    direct = np.asarray(transport.map(i, k, v), dtype=float)
                    r = np.linalg.norm(via - direct) / max(1.0, np.linalg.norm(direct))
                    if r > worst:
                        worst, worst_triple = r, (i, j, k)
    return GroupoidReport(float(worst), worst <= tol, worst_triple if worst > tol else None)


def factor_from_transport(
    grid: PathGrid,
    fiber: FiberSpec,
    h: Callable[[int, int], np.ndarray],
    anchor: int = 0,
    tol: float = DEFAULT_TOL,
) -> FrameFactor:
    """Recover a frame factor from a full transport-matrix family.

    ``h(i, j)`` must give the matrix transporting from sample i to sample j.
    The factor is anchored so that F(s_anchor) is the identity; it reproduces
    the input family through H(i->j) = F(s_j)^{-1} F(s_i).
    """
    s = len(grid)
    n = fiber.dim
    if not 0 <= anchor < s:
        raise IndexError(f"anchor {anchor} outside grid of {s} samples")
    stack = np.empty((s, s, n, n))
    for j in range(s):
        for i in range(s):
            stack[j, i] = as_matrix(h(i, j), n, n)
    worst, triple = _linear_groupoid_residual(stack)
    if worst > tol:
        raise GroupoidViolation(
            f"transport family violates groupoid laws: residual {worst:.3e} "
            f"at triple {triple}"
        )
    mats = tuple(stack[anchor, i].copy() for i in range(s))
    return FrameFactor(grid, fiber, mats)


def apply_gauge(factor: FrameFactor, gauge: GaugeMap) -> FrameFactor:
    """Left-multiply every factor matrix by a path-constant invertible map.

    The induced transport matrices are unchanged: (DF(t))^{-1} DF(s) =
    F(t)^{-1} F(s).
    """
    d = gauge.matrix
    n = factor.fiber.dim
    if d.shape != (n, n):
        raise ShapeMismatch(f"gauge matrix {d.shape} for fibre dimension {n}")
    return FrameFactor(factor.grid, factor.fiber, tuple(d @ m for m in factor.matrices))


def as_general(transport: LinearTransport) -> GeneralTransport:
    """View a linear transport as a black-box transport."""
    return GeneralTransport(
        transport.grid, transport.fiber, lambda i, j, v: transport.apply(i, j, v)
    )
