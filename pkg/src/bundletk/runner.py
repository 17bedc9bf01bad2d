"""Named checks and synthesis operations over bundle documents.

This is the layer the CLI talks to: every operation takes a parsed
BundleDocument plus a flat argument mapping and returns Verdict records or
new document entries.  Exit-code policy lives in the CLI, not here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import morphism as mo
from . import structures as st
from . import transport as tr
from .document import (
    AlmostComplexEntry,
    BundleDocument,
    FactorEntry,
    MetricEntry,
    MorphismEntry,
    matrices_to_lists,
)
from .errors import MissingEntity, UnknownCheck
from .hermitian import (
    ConjugatorPair,
    HermitianStructure,
    Infeasible,
    check_signature_constancy,
    hermitian_from_transport,
    signature_normalize,
    transport_from_hermitian,
)
from .numutil import DEFAULT_TOL


@dataclass(frozen=True)
class Verdict:
    """Outcome of one named check on one named entity."""

    check: str
    entity: str
    passed: bool
    max_residual: float
    worst_location: tuple | None = None
    elapsed: float = 0.0

    def as_dict(self) -> dict:
        out = {
            "check": self.check,
            "entity": self.entity,
            "passed": self.passed,
            "max_residual": self.max_residual,
        }
        if self.worst_location is not None:
            out["worst_location"] = list(self.worst_location)
        return out


CHECK_NAMES = (
    "groupoid",
    "consistency",
    "section",
    "almost-complex",
    "homogeneity",
    "additivity",
    "finsler",
    "bilinear",
    "hermitian",
)


def _need(args: dict, key: str, check: str) -> str:
    value = args.get(key)
    if value is None:
        raise MissingEntity(f"check {check!r} needs --{key}")
    return value


def _verdict(check, entity, report, t0) -> Verdict:
    loc = getattr(report, "worst_triple", None)
    if loc is None:
        loc = getattr(report, "worst_pair", None)
    if loc is None:
        loc = getattr(report, "worst_sample", None)
    if loc is not None and not isinstance(loc, tuple):
        loc = (loc,)
    return Verdict(
        check, entity, report.passed, float(report.max_residual), loc,
        time.perf_counter() - t0,
    )


def run_check(
    doc: BundleDocument,
    check: str,
    args: dict | None = None,
    tol: float = DEFAULT_TOL,
) -> list[Verdict]:
    """Run one named check; returns one Verdict per checked entity."""
    args = dict(args or {})
    tol = doc.tolerances.get(check, doc.tolerances.get("default", tol))
    seed = int(args.get("seed", 0))
    t0 = time.perf_counter()

    if check == "groupoid":
        names = [args["factor"]] if args.get("factor") else sorted(doc.factors)
        if not names:
            raise MissingEntity("document has no factors to check")
        out = []
        for name in names:
            t1 = time.perf_counter()
            report = tr.verify_groupoid(doc.transport(name), tol)
            out.append(_verdict(check, name, report, t1))
        return out

    if check == "consistency":
        m = doc.morphism(_need(args, "morphism", check))
        t1 = doc.transport(_need(args, "t1", check))
        t2 = doc.transport(_need(args, "t2", check))
        report = mo.check_consistency(m, t1, t2, tol)
        return [_verdict(check, args["morphism"], report, t0)]

    if check == "section":
        if args.get("morphism"):
            m = doc.morphism(args["morphism"])
            t1 = doc.transport(_need(args, "t1", check))
            t2 = doc.transport(_need(args, "t2", check))
            report = mo.check_section_transported(m, t1, t2, tol)
            return [_verdict(check, args["morphism"], report, t0)]
        section = doc.section(_need(args, "section", check))
        transport = doc.transport(_need(args, "factor", check))
        probes = st.default_probes(transport.fiber.dim, seed)
        report = st.check_section_addition(
            tr.as_general(transport), section, probes, tol
        )
        return [_verdict(check, args["section"], report, t0)]

    if check == "almost-complex":
        name = _need(args, "field", check)
        field = doc.almost_complex_field(name)
        if args.get("factor"):
            report = st.check_ac_consistency(field, doc.transport(args["factor"]), tol)
        else:
            report = st.check_almost_complex(field.matrices, tol)
        return [_verdict(check, name, report, t0)]

    if check == "homogeneity":
        transport = tr.as_general(doc.transport(_need(args, "factor", check)))
        probes = st.default_probes(transport.fiber.dim, seed)
        report = st.check_homogeneity(transport, st.DEFAULT_SCALARS, probes, tol)
        return [_verdict(check, args["factor"], report, t0)]

    if check == "additivity":
        transport = tr.as_general(doc.transport(_need(args, "factor", check)))
        probes = st.default_probes(transport.fiber.dim, seed, count=16)
        pairs = list(zip(probes[::2], probes[1::2]))
        report = st.check_additivity(transport, pairs, tol)
        return [_verdict(check, args["factor"], report, t0)]

    if check == "finsler":
        metric = doc.metric(_need(args, "metric", check))
        transport = doc.transport(_need(args, "factor", check))
        mats = metric.matrices
        # metric-induced norm sampler: sqrt|v^T B(i) v|
        sampler = st.FinslerSampler(
            metric.grid, lambda i, v: float(np.sqrt(abs(v @ mats[i] @ v)))
        )
        probes = st.default_probes(transport.fiber.dim, seed)
        report = st.check_finsler_consistency(sampler, transport, probes, tol)
        return [_verdict(check, args["metric"], report, t0)]

    if check == "bilinear":
        metric = doc.metric(_need(args, "metric", check))
        transport = doc.transport(_need(args, "factor", check))
        report = st.check_bilinear_consistency(metric, transport, tol)
        return [_verdict(check, args["metric"], report, t0)]

    if check == "hermitian":
        j_name = _need(args, "field", check)
        g_name = _need(args, "metric", check)
        field = doc.almost_complex_field(j_name)
        metric = doc.metric(g_name)
        structure = HermitianStructure(field, metric, tol=max(tol, 1e-8))
        report = check_signature_constancy(metric, tol)
        worst = None
        if not report.passed:
            first = report.signatures[0]
            worst = next(
                (i,) for i, s in enumerate(report.signatures) if s != first
            )
        return [
            Verdict(
                check,
                f"{j_name}/{g_name}",
                report.passed,
                0.0 if report.passed else 1.0,
                worst,
                time.perf_counter() - t0,
            )
        ]

    raise UnknownCheck(f"unknown check {check!r}; expected one of {CHECK_NAMES}")


# -- synthesis -------------------------------------------------------------


def _parse_matrix_arg(text: str, n_rows: int | None = None, n_cols: int | None = None):
    import json

    from .errors import SchemaError
    from .numutil import as_matrix

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"matrix argument is not valid JSON: {exc}") from exc
    try:
        return as_matrix(np.asarray(raw, dtype=float), n_rows, n_cols)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"matrix argument: {exc}") from exc


def synthesize(doc: BundleDocument, kind: str, args: dict) -> list[str]:
    """Add synthesized entries to the document, in place.

    Every emitted entry is re-verified with the matching check before it is
    written; a failed self-check raises instead of emitting.  Returns the
    names of the new entries.
    """
    args = dict(args)
    name = args.get("name") or f"synth_{kind}"

    if kind == "morphism":
        f1 = doc.factor(_need(args, "f1", kind))
        f2 = doc.factor(_need(args, "f2", kind))
        c0 = _parse_matrix_arg(
            _need(args, "c0", kind), f2.fiber.dim, f1.fiber.dim
        )
        base = mo.BaseMap(f1.grid, f2.grid, tuple(range(len(f1.grid))))
        morphism = mo.synthesize_consistent(c0, f1, f2, base)
        report = mo.check_consistency(
            morphism, tr.LinearTransport(f1), tr.LinearTransport(f2), 1e-9
        )
        if not report.passed:
            raise RuntimeError(
                f"synthesized morphism failed self-check ({report.max_residual:.3e})"
            )
        entry = MorphismEntry(
            name,
            doc.factors[args["f1"]].path,
            matrices_to_lists(morphism.fibre_maps),
            target_path=doc.factors[args["f2"]].path,
            base=list(base.indices),
        )
        doc.morphisms[name] = entry
        return [name]

    if kind == "hermitian":
        factor = doc.factor(_need(args, "factor", kind))
        n = factor.fiber.dim
        c0 = _parse_matrix_arg(_need(args, "c0", kind), n, n)
        c = _parse_matrix_arg(_need(args, "c", kind), n, n)
        structure = hermitian_from_transport(factor, ConjugatorPair(c0, c))
        j_name, g_name = f"{name}_j", f"{name}_g"
        path = doc.factors[args["factor"]].path
        doc.almost_complex[j_name] = AlmostComplexEntry(
            j_name, path, matrices_to_lists(structure.j.matrices)
        )
        doc.metrics[g_name] = MetricEntry(
            g_name, path, "symmetric", matrices_to_lists(structure.g.matrices)
        )
        return [j_name, g_name]

    if kind == "transport":
        j_name = _need(args, "field", kind)
        g_name = _need(args, "metric", kind)
        field = doc.almost_complex_field(j_name)
        metric = doc.metric(g_name)
        structure = HermitianStructure(field, metric, tol=1e-6)
        y = None
        if args.get("y"):
            y = _parse_matrix_arg(args["y"], field.dim, field.dim)
        result = transport_from_hermitian(structure, y=y)
        if isinstance(result, Infeasible):
            return result  # caller maps to exit code 2
        report = tr.verify_groupoid(tr.LinearTransport(result), 1e-8)
        if not report.passed:
            raise RuntimeError(
                f"synthesized transport failed self-check ({report.max_residual:.3e})"
            )
        path = doc.almost_complex[j_name].path
        doc.factors[name] = FactorEntry(name, path, matrices_to_lists(result.matrices))
        return [name]

    raise UnknownCheck(f"unknown synthesis kind {kind!r}")


def solve_hermitian_doc(doc: BundleDocument, args: dict):
    """Solve the transport-existence problem for a named (J, G) pair.

    Returns a HermitianSolveResult on success or an Infeasible certificate.
    """
    from .hermitian import infeasibility_certificate, solve_hermitian

    j_name = _need(args, "field", "solve hermitian")
    g_name = _need(args, "metric", "solve hermitian")
    field = doc.almost_complex_field(j_name)
    metric = doc.metric(g_name)
    seed = int(args.get("seed", 0))
    # odd-parity signatures admit no constant solution at all; certify that
    # before the strict compatibility validation can reject the input
    sig_report = check_signature_constancy(metric, 1e-9)
    sig = sig_report.signatures[0]
    if sig_report.passed and (sig.p % 2 != 0 or sig.q % 2 != 0):
        return infeasibility_certificate(sig, starts=64, seed=seed)
    structure = HermitianStructure(field, metric, tol=1e-6)
    y = None
    if args.get("y"):
        y = _parse_matrix_arg(args["y"], field.dim, field.dim)
    return solve_hermitian(structure, y, seed=seed)
