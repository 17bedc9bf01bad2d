"""Hermitian structures consistent with linear transports.

A Hermitian structure is a pair (J, G) of an almost complex field and a
symmetric nondegenerate metric field with J^T G J = G per sample.  Given a
transport factor F and a conjugator pair (C0, C) this module constructs
consistent structures via

    J(s) = F(s)^{-1} C0 F(s),      G(s) = F(s)^T C F(s),

and, conversely, solves for transports consistent with a given structure by
normalizing the metric signature (D^T G D = G_pq), solving the constant
matrix equations  P^T G_pq P = G_pq,  P P = -I,  and then the per-sample
system

    Z^T G_pq Z = G_pq,      P Z - Z A = 0,      A = D^{-1} J D,

recomposing the factor as F(s) = Y Z(s) D(s)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    BadInvolution,
    DegenerateMetric,
    InvalidConjugatorPair,
    NotSymmetric,
    ShapeMismatch,
    SignatureVaries,
    SingularFactor,
)
from .grids import FiberSpec
from .numutil import DEFAULT_TOL, as_matrix, is_invertible, rel_residual
from .structures import AlmostComplexField, BilinearField
from .transport import FrameFactor, LinearTransport


@dataclass(frozen=True)
class Signature:
    """Counts of positive and negative eigenvalues of a nondegenerate form."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("signature counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.p + self.q

    def metric(self) -> np.ndarray:
        """The standard form diag(1,...,1,-1,...,-1) of this signature."""
        return np.diag(np.concatenate([np.ones(self.p), -np.ones(self.q)]))


@dataclass(frozen=True)
class Infeasible:
    """Certificate that a solve has no solution; residual is the best value
    reached by the seeded search (bounded away from zero on true infeasibility)."""

    residual: float
    reason: str
    starts: int = 0

    def __bool__(self) -> bool:  # infeasible results are falsy
        return False


@dataclass(frozen=True)
class PMatrix:
    """Pseudoorthogonal complex-structure matrix: P^T G_pq P = G_pq, PP = -I."""

    matrix: np.ndarray
    sig: Signature

    def __post_init__(self):
        m = as_matrix(self.matrix, self.sig.n, self.sig.n)
        object.__setattr__(self, "matrix", m)
        g = self.sig.metric()
        if rel_residual(m.T @ g @ m, g) > 1e-9:
            raise ValueError("P is not pseudoorthogonal for its signature")
        if rel_residual(m @ m, -np.eye(self.sig.n)) > 1e-9:
            raise ValueError("P does not square to minus the identity")


@dataclass(frozen=True)
class ConjugatorPair:
    """Constant matrices (C0, C) generating a Hermitian structure from a factor."""

    c0: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c0", as_matrix(self.c0))
        object.__setattr__(self, "c", as_matrix(self.c))


def validate_conjugator_pair(cc: ConjugatorPair, tol: float = DEFAULT_TOL) -> None:
    """Raise InvalidConjugatorPair naming the first violated constraint."""
    c0, c = cc.c0, cc.c
    n = c0.shape[0]
    if c0.shape != (n, n) or c.shape != (n, n):
        raise InvalidConjugatorPair("C0 and C must be square of equal size")
    if not is_invertible(c):
        raise InvalidConjugatorPair("C is singular")
    if rel_residual(c.T, c) > tol:
        raise InvalidConjugatorPair("C^T C^{-1} = identity fails (C not symmetric)")
    if rel_residual(c0 @ c0, -np.eye(n)) > tol:
        raise InvalidConjugatorPair("C0 C0 = -identity fails")
    if rel_residual(c0.T @ c @ c0, c) > tol:
        raise InvalidConjugatorPair("C0^T C C0 C^{-1} = identity fails")


@dataclass(frozen=True)
class HermitianStructure:
    """Almost complex field J plus a compatible symmetric metric field G."""

    j: AlmostComplexField
    g: BilinearField
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.g.kind != "symmetric":
            raise ValueError("the metric part must be symmetric")
        if self.j.grid != self.g.grid:
            raise ShapeMismatch("J and G are on different grids")
        if self.j.dim != self.g.dim:
            raise ShapeMismatch("J and G have different fibre dimensions")
        for i, (jm, gm) in enumerate(zip(self.j.matrices, self.g.matrices)):
            if rel_residual(jm.T @ gm @ jm, gm) > self.tol:
                raise ValueError(f"J^T G J = G fails at sample {i}")

    @property
    def dim(self) -> int:
        return self.j.dim


@dataclass(frozen=True)
class HermitianSolveResult:
    """Factorization F(s) = Y Z(s) D(s)^{-1} of a consistent transport."""

    sig: Signature
    d_matrices: tuple[np.ndarray, ...]
    p: PMatrix
    z_matrices: tuple[np.ndarray, ...]
    y: np.ndarray
    factor: FrameFactor


@dataclass(frozen=True)
class SignatureReport:
    passed: bool
    signatures: tuple[Signature, ...]


def signature_normalize(
    g: np.ndarray, tol: float = DEFAULT_TOL
) -> tuple[np.ndarray, Signature]:
    """Congruence transformation D with D^T G D = diag(1,..,1,-1,..,-1).

    Built from the eigendecomposition: columns are eigenvectors scaled by
    |eigenvalue|^{-1/2}, positives ordered first.
    """
    g = as_matrix(g)
    n = g.shape[0]
    if g.shape != (n, n):
        raise NotSymmetric("metric must be square")
    if rel_residual(g, g.T) > tol:
        raise NotSymmetric("metric matrix is not symmetric")
    g = 0.5 * (g + g.T)
    evals, evecs = np.linalg.eigh(g)
    scale = float(np.max(np.abs(evals))) if n else 0.0
    if scale == 0.0 or float(np.min(np.abs(evals))) <= tol * scale:
        raise DegenerateMetric(
            f"metric eigenvalue magnitude {np.min(np.abs(evals)):.3e} below "
            f"threshold {tol * scale:.3e}"
        )
    order = np.concatenate([np.nonzero(evals > 0)[0], np.nonzero(evals < 0)[0]])
    evals = evals[order]
    evecs = evecs[:, order]
    d = evecs / np.sqrt(np.abs(evals))
    p = int(np.count_nonzero(evals > 0))
    return d, Signature(p, n - p)


def check_signature_constancy(
    field: BilinearField, tol: float = DEFAULT_TOL
) -> SignatureReport:
    """Pass iff every sample of a symmetric field has the same signature."""
    sigs = []
    for m in field.matrices:
        _, sig = signature_normalize(m, tol)
        sigs.append(sig)
    return SignatureReport(len(set(sigs)) <= 1, tuple(sigs))


_ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _p_objective(g: np.ndarray):
    def fun(x: np.ndarray):
        n = g.shape[0]
        p = x.reshape(n, n)
        r1 = p.T @ g @ p - g
        r2 = p @ p + np.eye(n)
        val = float(np.sum(r1 * r1) + np.sum(r2 * r2))
        grad = 4.0 * g @ p @ r1 + 2.0 * (r2 @ p.T + p.T @ r2)
        return val, grad.ravel()

    return fun


def infeasibility_certificate(
    sig: Signature, starts: int = 64, seed: int = 0
) -> Infeasible:
    """Best combined residual sqrt(|P^T G P - G|^2 + |PP + I|^2) over a seeded
    multistart minimization; large values certify infeasibility numerically."""
    g = sig.metric()
    n = sig.n
    rng = np.random.default_rng(seed)
    fun = _p_objective(g)
    best = np.inf
    for _ in range(starts):
        x0 = rng.standard_normal(n * n)
        res = scipy.optimize.minimize(fun, x0, jac=True, method="BFGS")
        best = min(best, float(res.fun))
    return Infeasible(
        residual=float(np.sqrt(max(best, 0.0))),
        reason=f"no P matrix for signature ({sig.p},{sig.q})",
        starts=starts,
    )


def solve_P(
    sig: Signature, *, starts: int = 64, seed: int = 0
) -> PMatrix | Infeasible:
    """Constant solution of P^T G_pq P = G_pq and P P = -I, when one exists.

    Solutions exist exactly when p and q are both even; the construction
    stacks 2x2 rotation blocks on the positive and on the negative part.
    Otherwise an Infeasible certificate from a seeded search is returned.
    """
    if sig.n > 0 and sig.p % 2 == 0 and sig.q % 2 == 0:
        blocks = [_ROT] * (sig.n // 2)
        return PMatrix(scipy.linalg.block_diag(*blocks), sig)
    return infeasibility_certificate(sig, starts=starts, seed=seed)


def hermitian_from_transport(
    factor: FrameFactor, cc: ConjugatorPair, tol: float = DEFAULT_TOL
) -> HermitianStructure:
    """Hermitian structure generated by a frame factor and a conjugator pair.

    The result satisfies J^2 = -I, J^T G J = G and is consistent with the
    transport induced by the factor.
    """
    validate_conjugator_pair(cc, tol)
    n = factor.fiber.dim
    if cc.c0.shape != (n, n):
        raise ShapeMismatch(f"conjugators of shape {cc.c0.shape} for fibre dim {n}")
    transport = LinearTransport(factor)
    j_mats = tuple(
        transport._f_inv[i] @ cc.c0 @ factor.matrices[i]
        for i in range(len(factor.grid))
    )
    g_mats = []
    for m in factor.matrices:
        g = m.T @ cc.c @ m
        g_mats.append(0.5 * (g + g.T))
    j_field = AlmostComplexField(factor.grid, j_mats, tol=max(tol, 1e-8))
    g_field = BilinearField(factor.grid, tuple(g_mats), "symmetric", tol=max(tol, 1e-8))
    return HermitianStructure(j_field, g_field, tol=max(tol, 1e-8))


def _pseudo_unitary_basis(
    m: np.ndarray, g: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, list[float]] | None:
    """Basis adapted to the complex structure m and the indefinite form g.

    Treating i*u := m u, Gram-Schmidt with the sesquilinear form
    h(u, v) = g(u, v) + i g(m u, v) yields complex lines with h(u, u) = +-1.
    Returns the real column basis [u_1, m u_1, u_2, m u_2, ...] ordered with
    positive lines first, together with the sign list, or None if the
    orthogonalization stalls.
    """
    n = m.shape[0]
    half = n // 2
    vecs: list[np.ndarray] = []
    signs: list[float] = []
    tries = 0
    while len(vecs) < half and tries < 64 * half:
        tries += 1
        x = rng.standard_normal(n)
        for u, s in zip(vecs, signs):
            h = float((g @ u) @ x) + 1j * float((g @ (m @ u)) @ x)
            coef = h * s  # h(u, u) = s with s in {+1, -1}
            x = x - (coef.real * u + coef.imag * (m @ u))
        nrm = float(x @ g @ x)
        if abs(nrm) < 1e-8 * max(1.0, float(x @ x)):
            continue
        signs.append(1.0 if nrm > 0 else -1.0)
        vecs.append(x / np.sqrt(abs(nrm)))
    if len(vecs) < half:
        return None
    order = sorted(range(half), key=lambda k: -signs[k])
    cols = []
    for k in order:
        cols.append(vecs[k])
        cols.append(m @ vecs[k])
    return np.column_stack(cols), [signs[k] for k in order]


def _canonical_intertwiner(
    pm: np.ndarray, a: np.ndarray, g: np.ndarray, rng: np.random.Generator
) -> np.ndarray | None:
    """Pseudoorthogonal Z with P Z = Z A, built by matching adapted bases.

    Exists iff the sign patterns of the two adapted bases agree, which is
    forced whenever both structures are compatible with the same form.
    """
    ba = _pseudo_unitary_basis(a, g, rng)
    bp = _pseudo_unitary_basis(pm, g, rng)
    if ba is None or bp is None:
        return None
    basis_a, signs_a = ba
    basis_p, signs_p = bp
    if signs_a != signs_p:
        return None
    return basis_p @ np.linalg.inv(basis_a)


def _z_objective(g: np.ndarray, null_basis: np.ndarray):
    n = g.shape[0]

    def fun(c: np.ndarray):
        z = (null_basis @ c).reshape(n, n)
        r = z.T @ g @ z - g
        val = float(np.sum(r * r))
        grad_z = 4.0 * g @ z @ r
        return val, null_basis.T @ grad_z.ravel()

    return fun


def solve_Z_system(
    a_matrices: Sequence[np.ndarray],
    p: PMatrix,
    *,
    tol: float = 1e-8,
    starts: int = 16,
    maxiter: int = 200,
    seed: int = 0,
) -> tuple[np.ndarray, ...] | Infeasible:
    """Per-sample pseudoorthogonal solutions of the intertwining system.

    The linear constraint P Z = Z A is solved exactly by a null-space basis;
    pseudoorthogonality Z^T G_pq Z = G_pq is then searched inside that null
    space from seeded starts.  The first start projects a canonical
    intertwiner built by matching form-adapted bases of P and A, which lands
    on (or next to) an exact solution whenever one exists.
    """
    g = p.sig.metric()
    n = p.sig.n
    pm = p.matrix
    solutions = []
    for idx, a in enumerate(a_matrices):
        a = as_matrix(a, n, n)
        if rel_residual(a @ a, -np.eye(n)) > max(tol, 1e-8):
            raise BadInvolution(f"A at sample {idx} does not square to -identity")
        sylvester = np.kron(pm, np.eye(n)) - np.kron(np.eye(n), a.T)
        # A is a complex structure only up to roundoff, so the intertwiner
        # directions carry singular values ~1e-13; cut well above that.
        null_basis = scipy.linalg.null_space(sylvester, rcond=1e-7)
        if null_basis.shape[1] == 0:
            return Infeasible(np.inf, f"empty intertwiner space at sample {idx}")
        fun = _z_objective(g, null_basis)
        rng = np.random.default_rng(seed + idx)
        start_list = []
        z0 = _canonical_intertwiner(pm, a, g, rng)
        if z0 is not None:
            start_list.append(np.linalg.lstsq(null_basis, z0.ravel(), rcond=None)[0])
        start_list += [
            rng.standard_normal(null_basis.shape[1])
            for _ in range(starts - len(start_list))
        ]
        best = np.inf
        found = None
        for c0 in start_list:
            res = scipy.optimize.minimize(
                fun,
                c0,
                jac=True,
                method="BFGS",
                options={"maxiter": maxiter, "gtol": 1e-14},
            )
            val = float(res.fun)
            if val < best:
                best = val
                if np.sqrt(max(val, 0.0)) <= tol:
                    z = (null_basis @ res.x).reshape(n, n)
                    if is_invertible(z):
                        found = z
                        break
        if found is None:
            return Infeasible(
                float(np.sqrt(max(best, 0.0))),
                f"no pseudoorthogonal intertwiner at sample {idx}",
                starts=starts,
            )
        solutions.append(found)
    return tuple(solutions)


def solve_hermitian(
    structure: HermitianStructure,
    y: np.ndarray | None = None,
    *,
    tol: float = 1e-8,
    starts: int = 16,
    seed: int = 0,
) -> HermitianSolveResult | Infeasible:
    """Full pipeline from a Hermitian structure to a consistent transport factor."""
    n = structure.dim
    if y is None:
        y = np.eye(n)
    y = as_matrix(y, n, n)
    if not is_invertible(y):
        raise SingularFactor("Y matrix is singular")
    report = check_signature_constancy(structure.g, max(tol, DEFAULT_TOL))
    if not report.passed:
        raise SignatureVaries(f"metric signature varies along the path: {report.signatures}")
    sig = report.signatures[0]
    d_list, a_list = [], []
    for jm, gm in zip(structure.j.matrices, structure.g.matrices):
        d, _ = signature_normalize(gm, max(tol, DEFAULT_TOL))
        d_list.append(d)
        a_list.append(np.linalg.solve(d, jm @ d))
    p = solve_P(sig, starts=max(starts, 64), seed=seed)
    if isinstance(p, Infeasible):
        return p
    z = solve_Z_system(a_list, p, tol=tol, starts=starts, seed=seed)
    if isinstance(z, Infeasible):
        return z
    mats = tuple(
        y @ zi @ np.linalg.inv(di) for zi, di in zip(z, d_list)
    )
    factor = FrameFactor(structure.g.grid, FiberSpec(n), mats)
    return HermitianSolveResult(sig, tuple(d_list), p, z, y, factor)


def transport_from_hermitian(
    structure: HermitianStructure,
    y: np.ndarray | None = None,
    *,
    tol: float = 1e-8,
    starts: int = 16,
    seed: int = 0,
) -> FrameFactor | Infeasible:
    """Frame factor of a transport consistent with the given structure,
    or an Infeasible certificate when the constant matrix equations have none."""
    result = solve_hermitian(structure, y, tol=tol, starts=starts, seed=seed)
    if isinstance(result, Infeasible):
        return result
    return result.factor
