"""Seeded randomized property harness over the library invariants.

Every trial draws its own generator from (seed, trial index), so reports are
byte-identical across runs and across serial/parallel execution.  Reports
carry no timing data for the same reason.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grids import FiberSpec, PathGrid
from .morphism import (
    BaseMap,
    check_consistency,
    check_section_transported,
    synthesize_consistent,
)
from .structures import (
    AlmostComplexField,
    BilinearField,
    check_ac_consistency,
    check_bilinear_consistency,
)
from .hermitian import check_signature_constancy
from .transport import FrameFactor, GaugeMap, LinearTransport, apply_gauge, verify_groupoid

MAX_DIM = 8
MAX_SAMPLES = 64
MAX_TRIALS = 10_000

#: property name -> pass tolerance on the per-trial residual
PROPERTY_TOLS = {
    "groupoid": 1e-10,
    "morphism-consistency": 1e-9,
    "metamorphic-agreement": 0.0,
    "gauge-invariance": 1e-10,
    "bilinear-congruence": 1e-9,
    "almost-complex-consistency": 1e-8,
    "signature-constancy": 0.0,
}


@dataclass(frozen=True)
class FuzzReport:
    seed: int
    dim: int
    samples: int
    trials: int
    worst: dict  # property -> worst residual over all trials
    failures: dict  # property -> failing trial count

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.failures.values())

    def render(self) -> str:
        lines = [
            "fuzz report",
            f"seed {self.seed}  dim {self.dim}  samples {self.samples}  "
            f"trials {self.trials}",
            "",
            f"{'property':<28}{'pass':>12}  worst residual",
        ]
        for name in PROPERTY_TOLS:
            ok = self.trials - self.failures[name]
            lines.append(
                f"{name:<28}{ok:>7}/{self.trials:<5} {self.worst[name]:.6e}"
            )
        lines.append("")
        if self.passed:
            lines.append("all properties passed")
        else:
            bad = ", ".join(n for n, c in self.failures.items() if c)
            lines.append(f"FAILED properties: {bad}")
        return "\n".join(lines) + "\n"


def _random_factor(rng: np.random.Generator, grid: PathGrid, n: int) -> FrameFactor:
    mats = []
    for _ in range(len(grid)):
        q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
        q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        d = np.exp(rng.uniform(-2.0, 2.0, size=n))
        mats.append(q1 @ np.diag(d) @ q2)
    return FrameFactor(grid, FiberSpec(n), tuple(mats))


def _random_invertible(rng: np.random.Generator, n: int) -> np.ndarray:
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q1 @ np.diag(np.exp(rng.uniform(-1.0, 1.0, size=n))) @ q2


def run_trial(seed: int, trial: int, dim: int, samples: int) -> dict:
    """Residual of every fuzz property on one independently seeded trial."""
    rng = np.random.default_rng([seed, trial])
    grid = PathGrid.uniform(samples)
    res: dict[str, float] = {}

    factor = _random_factor(rng, grid, dim)
    t1 = LinearTransport(factor)
    res["groupoid"] = verify_groupoid(t1).max_residual

    factor2 = _random_factor(rng, grid, dim)
    t2 = LinearTransport(factor2)
    c0 = _random_invertible(rng, dim)
    base = BaseMap.identity(grid)
    morphism = synthesize_consistent(c0, factor, factor2, base)
    res["morphism-consistency"] = check_consistency(morphism, t1, t2).max_residual

    # the two consistency formulations must agree on clean and noisy inputs
    agree = 0.0
    noisy_maps = tuple(
        m + rng.uniform(0.01, 0.1) * np.linalg.norm(m) * rng.standard_normal(m.shape)
        for m in morphism.fibre_maps
    )
    from .morphism import PathMorphism

    for cand in (morphism, PathMorphism(base, noisy_maps)):
        a = check_consistency(cand, t1, t2, 1e-9).passed
        b = check_section_transported(cand, t1, t2, 1e-9).passed
        if a != b:
            agree = 1.0
    res["metamorphic-agreement"] = agree

    gauge = GaugeMap(_random_invertible(rng, dim))
    gauged = LinearTransport(apply_gauge(factor, gauge))
    diff = 0.0
    h0, h1 = t1.matrix_stack(), gauged.matrix_stack()
    scale = np.maximum(1.0, np.linalg.norm(h0, axis=(2, 3)))
    diff = float(np.max(np.linalg.norm(h0 - h1, axis=(2, 3)) / scale))
    res["gauge-invariance"] = diff

    s = rng.standard_normal((dim, dim))
    s = s + s.T + 2.0 * dim * np.eye(dim)
    metrics = BilinearField(
        grid, tuple(m.T @ s @ m for m in factor.matrices), "symmetric"
    )
    res["bilinear-congruence"] = check_bilinear_consistency(metrics, t1).max_residual

    even = dim if dim % 2 == 0 else dim + 1
    egrid = grid
    efactor = factor if even == dim else _random_factor(rng, grid, even)
    etransport = t1 if even == dim else LinearTransport(efactor)
    t = _random_invertible(rng, even)
    j_std = np.kron(np.eye(even // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    cj = t @ j_std @ np.linalg.inv(t)
    inv = np.linalg.inv
    j_field = AlmostComplexField(
        egrid,
        tuple(inv(m) @ cj @ m for m in efactor.matrices),
        tol=1e-6,
    )
    res["almost-complex-consistency"] = check_ac_consistency(
        j_field, etransport, 1e-6
    ).max_residual

    res["signature-constancy"] = (
        0.0 if check_signature_constancy(metrics).passed else 1.0
    )
    return res


def fuzz(
    seed: int,
    dim: int = 2,
    samples: int = 6,
    trials: int = 100,
    *,
    parallel: bool = False,
    corrupt: str | None = None,
) -> FuzzReport:
    """Run the property suite; deterministic for fixed arguments.

    ``corrupt`` is a test hook forcing the named property to fail, used to
    verify that violations actually surface in the report and exit code.
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dim must be in [1, {MAX_DIM}]")
    if not 2 <= samples <= MAX_SAMPLES:
        raise ValueError(f"samples must be in [2, {MAX_SAMPLES}]")
    if not 1 <= trials <= MAX_TRIALS:
        raise ValueError(f"trials must be in [1, {MAX_TRIALS}]")
    if corrupt is not None and corrupt not in PROPERTY_TOLS:
        raise ValueError(f"unknown property {corrupt!r}")

    if parallel:
        with ThreadPoolExecutor() as pool:
            results = list(
                pool.map(lambda k: run_trial(seed, k, dim, samples), range(trials))
            )
    else:
        results = [run_trial(seed, k, dim, samples) for k in range(trials)]

    worst = {name: 0.0 for name in PROPERTY_TOLS}
    failures = {name: 0 for name in PROPERTY_TOLS}
    for res in results:
        if corrupt is not None:
            res = dict(res, **{corrupt: 1.0})
        for name, tol in PROPERTY_TOLS.items():
            value = float(res[name])
            worst[name] = max(worst[name], value)
            if value > tol:
                failures[name] += 1
    return FuzzReport(seed, dim, samples, trials, worst, failures)
