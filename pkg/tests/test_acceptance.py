"""Acceptance suite: one test per release criterion, one printed line each."""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from bundletk import (
    BaseMap,
    ConjugatorPair,
    FiberSpec,
    FinslerSampler,
    FrameFactor,
    GaugeMap,
    GeneralTransport,
    Infeasible,
    LinearTransport,
    PMatrix,
    PathGrid,
    PathMorphism,
    Signature,
    apply_gauge,
    check_ac_consistency,
    check_additivity,
    check_bilinear_consistency,
    check_consistency,
    check_finsler_consistency,
    check_homogeneity,
    check_section_transported,
    check_signature_constancy,
    derive_conjugator,
    hermitian_from_transport,
    parse_document,
    serialize_document,
    solve_P,
    synthesize_consistent,
    transport_conjugator,
    transport_from_hermitian,
    verify_groupoid,
)
from bundletk.hermitian import infeasibility_certificate
from bundletk.structures import BilinearField, default_probes, DEFAULT_SCALARS
from gen import (
    random_conjugator_pair,
    random_factor,
    random_invertible,
    random_orthogonal,
    random_orthogonal_factor,
)

FIXTURES = Path(__file__).parent / "fixtures"
ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _report(number: int, title: str, detail: str) -> None:
    print(f"acceptance {number} [{title}]: PASS ({detail})", flush=True)


def _conditioned_factors(rng, s, n, max_cond=1e6):
    a = rng.standard_normal((2, s, n, n))
    q = np.linalg.qr(a)[0]
    conds = 10.0 ** rng.uniform(0.0, np.log10(max_cond), size=s)
    d = np.ones((s, n))
    d[:, -1] = 1.0 / conds
    return q[0] * d[:, None, :] @ q[1]


def test_criterion_1_groupoid_suite():
    rng = np.random.default_rng(1001)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.choice([1, 2, 4, 8]))
        s = int(rng.integers(2, 33))
        mats = _conditioned_factors(rng, s, n)
        factor = FrameFactor(PathGrid.uniform(s), FiberSpec(n), tuple(mats))
        report = verify_groupoid(LinearTransport(factor), 1e-10)
        worst = max(worst, report.max_residual)
        assert report.passed, (n, s, report.max_residual)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, elapsed
    _report(1, "groupoid suite", f"1000 factors, worst {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_synthesis_soundness():
    rng = np.random.default_rng(1002)
    worst_cons, worst_anchor = 0.0, 0.0
    for _ in range(1000):
        n = int(rng.choice([2, 3, 4]))
        s = int(rng.integers(3, 7))
        grid = PathGrid.uniform(s)
        f1 = random_factor(rng, grid, n)
        f2 = random_factor(rng, grid, n)
        t1, t2 = LinearTransport(f1), LinearTransport(f2)
        base = BaseMap.identity(grid)
        m = synthesize_consistent(random_invertible(rng, n), f1, f2, base)
        report = check_consistency(m, t1, t2, 1e-9)
        worst_cons = max(worst_cons, report.max_residual)
        assert report.passed, report.max_residual
        a, b = rng.choice(s, size=2, replace=False)
        c_a = derive_conjugator(m, t1, t2, anchor=int(a))
        c_b = derive_conjugator(m, t1, t2, anchor=int(b))
        moved = transport_conjugator(c_a, t1, t2, base, int(b))
        r = np.linalg.norm(moved.matrix - c_b.matrix) / max(
            1.0, np.linalg.norm(c_b.matrix)
        )
        worst_anchor = max(worst_anchor, r)
        assert r <= 1e-9, r
    _report(
        2,
        "synthesis soundness",
        f"1000 morphisms, consistency {worst_cons:.2e}, anchor law {worst_anchor:.2e}",
    )


def test_criterion_3_metamorphic_agreement():
    rng = np.random.default_rng(1003)
    agreements = 0
    for trial in range(1000):
        n = int(rng.choice([2, 3]))
        grid = PathGrid.uniform(4)
        f1 = random_factor(rng, grid, n)
        f2 = random_factor(rng, grid, n)
        t1, t2 = LinearTransport(f1), LinearTransport(f2)
        base = BaseMap.identity(grid)
        m = synthesize_consistent(random_invertible(rng, n), f1, f2, base)
        if trial % 2 == 1:
            noise = rng.uniform(1e-3, 1e-1)
            maps = tuple(
                fm + noise * max(1.0, np.linalg.norm(fm)) * rng.standard_normal(fm.shape)
                for fm in m.fibre_maps
            )
            m = PathMorphism(base, maps)
        a = check_consistency(m, t1, t2, 1e-9).passed
        b = check_section_transported(m, t1, t2, 1e-9).passed
        agreements += a == b
    assert agreements == 1000, agreements
    _report(3, "metamorphic law", "1000/1000 verdicts agree")


def test_criterion_4_gauge_invariance():
    rng = np.random.default_rng(1004)
    worst_t, worst_m = 0.0, 0.0
    for _ in range(100):
        n = int(rng.choice([2, 3, 4]))
        grid = PathGrid.uniform(5)
        f1 = random_factor(rng, grid, n)
        f2 = random_factor(rng, grid, n)
        d1 = random_invertible(rng, n)
        d2 = random_invertible(rng, n)
        g1 = apply_gauge(f1, GaugeMap(d1))
        g2 = apply_gauge(f2, GaugeMap(d2))
        h0 = LinearTransport(f1).matrix_stack()
        h1 = LinearTransport(g1).matrix_stack()
        scale = np.maximum(1.0, np.linalg.norm(h0, axis=(2, 3)))
        r = float(np.max(np.linalg.norm(h0 - h1, axis=(2, 3)) / scale))
        worst_t = max(worst_t, r)
        assert r <= 1e-10, r
        c0 = random_invertible(rng, n)
        base = BaseMap.identity(grid)
        m0 = synthesize_consistent(c0, f1, f2, base)
        m1 = synthesize_consistent(d2 @ c0 @ np.linalg.inv(d1), g1, g2, base)
        for a, b in zip(m0.fibre_maps, m1.fibre_maps):
            r = np.linalg.norm(a - b) / max(1.0, np.linalg.norm(a))
            worst_m = max(worst_m, r)
            assert r <= 1e-9, r
    _report(
        4,
        "gauge invariance",
        f"100 gauges, transports {worst_t:.2e}, morphisms {worst_m:.2e}",
    )


def test_criterion_5_p_matrix_exactness():
    p20 = solve_P(Signature(2, 0))
    assert isinstance(p20, PMatrix)
    assert np.array_equal(p20.matrix, ROT) or np.array_equal(p20.matrix, -ROT)
    assert np.array_equal(p20.matrix @ p20.matrix, -np.eye(2))
    assert np.array_equal(p20.matrix.T @ p20.matrix, np.eye(2))

    p40 = solve_P(Signature(4, 0))
    assert isinstance(p40, PMatrix)
    g = np.eye(4)
    r1 = np.linalg.norm(p40.matrix.T @ g @ p40.matrix - g)
    r2 = np.linalg.norm(p40.matrix @ p40.matrix + np.eye(4))
    assert r1 <= 1e-12 and r2 <= 1e-12

    cert = infeasibility_certificate(Signature(1, 1), starts=1000, seed=0)
    assert isinstance(cert, Infeasible)
    assert cert.starts == 1000
    assert cert.residual >= 0.5, cert.residual
    assert isinstance(solve_P(Signature(1, 1)), Infeasible)
    _report(
        5,
        "P-matrix exactness",
        f"(2,0) exact, (4,0) {max(r1, r2):.1e}, (1,1) certificate {cert.residual:.3f}",
    )


def test_criterion_6_hermitian_round_trip():
    rng = np.random.default_rng(1006)
    t0 = time.perf_counter()
    worst_build, worst_out = 0.0, 0.0
    for trial in range(100):
        n = 2 if trial % 2 == 0 else 4
        grid = PathGrid.uniform(int(rng.integers(3, 6)))
        factor = random_orthogonal_factor(rng, grid, n)
        c0, c = random_conjugator_pair(rng, n)
        structure = hermitian_from_transport(factor, ConjugatorPair(c0, c))
        t = LinearTransport(factor)
        for jm, gm in zip(structure.j.matrices, structure.g.matrices):
            r = np.linalg.norm(jm.T @ gm @ jm - gm) / max(1.0, np.linalg.norm(gm))
            worst_build = max(worst_build, r)
            assert r <= 1e-9, r
        rep_j = check_ac_consistency(structure.j, t, 1e-9)
        rep_g = check_bilinear_consistency(structure.g, t, 1e-9)
        worst_build = max(worst_build, rep_j.max_residual, rep_g.max_residual)
        assert rep_j.passed and rep_g.passed

        out = transport_from_hermitian(structure)
        assert isinstance(out, FrameFactor), out
        t_out = LinearTransport(out)
        rep_j = check_ac_consistency(structure.j, t_out, 1e-8)
        rep_g = check_bilinear_consistency(structure.g, t_out, 1e-8)
        worst_out = max(worst_out, rep_j.max_residual, rep_g.max_residual)
        assert rep_j.passed and rep_g.passed
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, elapsed
    _report(
        6,
        "hermitian round trip",
        f"100 trips, build {worst_build:.2e}, output {worst_out:.2e}, {elapsed:.1f}s",
    )


def test_criterion_7_signature_law():
    rng = np.random.default_rng(1007)
    agreements = 0
    for trial in range(1000):
        n = int(rng.choice([2, 3, 4]))
        s = int(rng.integers(2, 6))
        grid = PathGrid.uniform(s)
        if trial % 2 == 0:
            core = np.diag(rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.5, 3.0, n))
            mats = []
            for _ in range(s):
                t = random_invertible(rng, n)
                mats.append(t.T @ core @ t)
        else:
            mats = []
            for _ in range(s):
                core = np.diag(
                    rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.5, 3.0, n)
                )
                t = random_invertible(rng, n)
                mats.append(t.T @ core @ t)
        field = BilinearField(grid, tuple(mats), "symmetric")
        verdict = check_signature_constancy(field).passed
        # independent oracle: count positive eigenvalues per sample
        counts = {int(np.sum(np.linalg.eigvalsh(m) > 0)) for m in mats}
        oracle = len(counts) == 1
        agreements += verdict == oracle
    assert agreements == 1000, agreements
    _report(7, "signature law", "1000/1000 verdicts match the eigenvalue oracle")


def test_criterion_8_counterexample_detection():
    # rotation transport against a constant non-commuting diagonal morphism
    grid = PathGrid(tuple(np.linspace(0.0, 1.2, 4)), tuple("abcd"))
    mats = []
    for s in grid.params:
        c, sn = np.cos(s), np.sin(s)
        mats.append(np.array([[c, -sn], [sn, c]]))
    t_rot = LinearTransport(FrameFactor(grid, FiberSpec(2), tuple(mats)))
    bad_m = PathMorphism(
        BaseMap.identity(grid), tuple(np.diag([1.0, 2.0]) for _ in range(4))
    )
    r_morph = check_consistency(bad_m, t_rot, t_rot, 1e-9)
    assert not r_morph.passed and r_morph.max_residual >= 1e-3

    # affine (nonlinear) transport breaks homogeneity and additivity
    c = np.array([1.0, -0.5])
    affine = GeneralTransport(
        grid,
        FiberSpec(2),
        lambda i, j, v: np.asarray(v, float) + (grid.params[j] - grid.params[i]) * c,
    )
    probes = default_probes(2, seed=8, count=16)
    pairs = list(zip(probes[::2], probes[1::2]))
    r_hom = check_homogeneity(affine, DEFAULT_SCALARS, probes, 1e-9)
    r_add = check_additivity(affine, pairs, 1e-9)
    assert not r_hom.passed and r_hom.max_residual >= 1e-3
    assert not r_add.passed and r_add.max_residual >= 1e-3

    # scaling transport against the Euclidean norm function
    scale_mats = tuple(np.diag([np.exp(s), 1.0]) for s in grid.params)
    t_scale = LinearTransport(FrameFactor(grid, FiberSpec(2), scale_mats))
    sampler = FinslerSampler(grid, lambda i, v: float(np.linalg.norm(v)))
    r_fin = check_finsler_consistency(sampler, t_scale, probes, 1e-9)
    assert not r_fin.passed and r_fin.max_residual >= 1e-3
    _report(
        8,
        "counterexample detection",
        f"residuals {r_morph.max_residual:.1e}, "
        f"{min(r_hom.max_residual, r_add.max_residual):.1e}, {r_fin.max_residual:.1e}",
    )


def test_criterion_9_cli_determinism():
    cmd = [
        sys.executable,
        "-m",
        "bundletk.cli",
        "fuzz",
        "--seed",
        "42",
        "--trials",
        "60",
    ]
    runs = [
        subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)
    ]
    assert runs[0] == runs[1]
    assert b"all properties passed" in runs[0]

    fixtures = sorted(FIXTURES.glob("*.json"))
    assert len(fixtures) >= 4
    for path in fixtures:
        text = path.read_text()
        assert serialize_document(parse_document(text)) == text, path.name
        # a second pass through parse/serialize is also a fixed point
        again = serialize_document(parse_document(serialize_document(parse_document(text))))
        assert again == text, path.name
    _report(
        9,
        "CLI determinism",
        f"fuzz reports byte-identical, {len(fixtures)} fixture round trips",
    )
