"""JSON document format for paths, factors, morphisms and structure fields.

Documents are plain JSON with a fixed field order and 17-significant-digit
floats, so parse -> serialize is the identity on canonical files and
serialization is byte-stable for equal values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingEntity,
    NonFiniteEntry,
    SchemaError,
)
from .grids import FiberSpec, PathGrid
from .morphism import BaseMap, PathMorphism
from .structures import AlmostComplexField, BilinearField, SectionField
from .transport import FrameFactor, LinearTransport

FORMAT_VERSION = "1"


@dataclass
class FactorEntry:
    name: str
    path: str
    matrices: list


@dataclass
class MorphismEntry:
    name: str
    path: str
    matrices: list
    target_path: str | None = None
    base: list | None = None


@dataclass
class MetricEntry:
    name: str
    path: str
    kind: str
    matrices: list


@dataclass
class AlmostComplexEntry:
    name: str
    path: str
    matrices: list


@dataclass
class SectionEntry:
    name: str
    path: str
    vectors: list


@dataclass
class BundleDocument:
    """Validated in-memory form of a bundle document."""

    fiber: FiberSpec
    paths: dict[str, PathGrid] = field(default_factory=dict)
    factors: dict[str, FactorEntry] = field(default_factory=dict)
    morphisms: dict[str, MorphismEntry] = field(default_factory=dict)
    metrics: dict[str, MetricEntry] = field(default_factory=dict)
    almost_complex: dict[str, AlmostComplexEntry] = field(default_factory=dict)
    sections: dict[str, SectionEntry] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    version: str = FORMAT_VERSION

    # -- lookups ---------------------------------------------------------

    def grid(self, name: str) -> PathGrid:
        if name not in self.paths:
            raise MissingEntity(f"no path named {name!r}")
        return self.paths[name]

    def factor(self, name: str) -> FrameFactor:
        if name not in self.factors:
            raise MissingEntity(f"no factor named {name!r}")
        entry = self.factors[name]
        grid = self.grid(entry.path)
        return FrameFactor(
            grid, self.fiber, tuple(np.asarray(m, dtype=float) for m in entry.matrices)
        )

    def transport(self, name: str) -> LinearTransport:
        return LinearTransport(self.factor(name))

    def morphism(self, name: str) -> PathMorphism:
        if name not in self.morphisms:
            raise MissingEntity(f"no morphism named {name!r}")
        entry = self.morphisms[name]
        source = self.grid(entry.path)
        target = self.grid(entry.target_path or entry.path)
        if entry.base is None:
            if source is not target and len(source) != len(target):
                raise SchemaError(
                    f"morphism {entry.name!r} needs an explicit base map"
                )
            base = BaseMap(source, target, tuple(range(len(source))))
        else:
            base = BaseMap(source, target, tuple(entry.base))
        return PathMorphism(
            base, tuple(np.asarray(m, dtype=float) for m in entry.matrices)
        )

    def metric(self, name: str) -> BilinearField:
        if name not in self.metrics:
            raise MissingEntity(f"no metric named {name!r}")
        entry = self.metrics[name]
        return BilinearField(
            self.grid(entry.path),
            tuple(np.asarray(m, dtype=float) for m in entry.matrices),
            entry.kind,
        )

    def almost_complex_field(self, name: str) -> AlmostComplexField:
        if name not in self.almost_complex:
            raise MissingEntity(f"no almost_complex entry named {name!r}")
        entry = self.almost_complex[name]
        return AlmostComplexField(
            self.grid(entry.path),
            tuple(np.asarray(m, dtype=float) for m in entry.matrices),
            tol=1e-6,
        )

    def section(self, name: str) -> SectionField:
        if name not in self.sections:
            raise MissingEntity(f"no section named {name!r}")
        entry = self.sections[name]
        return SectionField(
            self.grid(entry.path),
            tuple(np.asarray(v, dtype=float) for v in entry.vectors),
        )


# -- validation helpers ---------------------------------------------------


def _require(obj, key, where, types):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}.{key}: missing required field")
    value = obj[key]
    if not isinstance(value, types):
        raise SchemaError(f"{where}.{key}: wrong type {type(value).__name__}")
    return value


def _check_matrix(raw, n_rows, n_cols, where) -> None:
    if not isinstance(raw, list) or len(raw) != n_rows:
        raise DimensionMismatch(f"{where}: expected {n_rows} rows")
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n_cols:
            raise DimensionMismatch(f"{where}[{r}]: expected {n_cols} columns")
        for c, value in enumerate(row):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaError(f"{where}[{r}][{c}]: not a number")
            if not math.isfinite(value):
                raise NonFiniteEntry(f"{where}[{r}][{c}]: non-finite entry")


def _check_matrix_family(raw, grid, n, where) -> list:
    if not isinstance(raw, list):
        raise SchemaError(f"{where}: expected a list of matrices")
    if len(raw) != len(grid):
        raise DimensionMismatch(
            f"{where}: {len(raw)} matrices for {len(grid)} path samples"
        )
    for k, m in enumerate(raw):
        _check_matrix(m, n, n, f"{where}[{k}]")
    return raw


def parse_document(data: bytes | str) -> BundleDocument:
    """Parse and fully validate a JSON bundle document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("document root must be an object")
    version = _require(raw, "version", "$", str)
    if version != FORMAT_VERSION:
        raise SchemaError(f"$.version: unsupported version {version!r}")
    fiber_raw = _require(raw, "fiber", "$", dict)
    dim = _require(fiber_raw, "dim", "$.fiber", int)
    if isinstance(dim, bool) or dim < 1:
        raise SchemaError("$.fiber.dim: must be a positive integer")
    fiber = FiberSpec(dim)

    doc = BundleDocument(fiber=fiber, version=version)

    for k, p in enumerate(_require(raw, "paths", "$", list)):
        where = f"$.paths[{k}]"
        name = _require(p, "name", where, str)
        params = _require(p, "params", where, list)
        labels = _require(p, "labels", where, list)
        for idx, value in enumerate(params):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaError(f"{where}.params[{idx}]: not a number")
            if not math.isfinite(value):
                raise NonFiniteEntry(f"{where}.params[{idx}]: non-finite entry")
        if name in doc.paths:
            raise SchemaError(f"{where}: duplicate path name {name!r}")
        try:
            doc.paths[name] = PathGrid(tuple(params), tuple(str(x) for x in labels))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc

    def resolve(path_name, where):
        if path_name not in doc.paths:
            raise SchemaError(f"{where}: unknown path {path_name!r}")
        return doc.paths[path_name]

    for k, e in enumerate(raw.get("factors", [])):
        where = f"$.factors[{k}]"
        name = _require(e, "name", where, str)
        path = _require(e, "path", where, str)
        grid = resolve(path, where)
        mats = _check_matrix_family(
            _require(e, "matrices", where, list), grid, dim, f"{where}.matrices"
        )
        doc.factors[name] = FactorEntry(name, path, mats)

    for k, e in enumerate(raw.get("morphisms", [])):
        where = f"$.morphisms[{k}]"
        name = _require(e, "name", where, str)
        path = _require(e, "path", where, str)
        grid = resolve(path, where)
        target_path = e.get("target_path")
        target = resolve(target_path, where) if target_path is not None else grid
        base = e.get("base")
        if base is not None:
            if not isinstance(base, list) or len(base) != len(grid):
                raise SchemaError(f"{where}.base: expected {len(grid)} indices")
            for idx, b in enumerate(base):
                if not isinstance(b, int) or isinstance(b, bool) or not 0 <= b < len(target):
                    raise SchemaError(f"{where}.base[{idx}]: invalid target index")
        mats = _check_matrix_family(
            _require(e, "matrices", where, list), grid, dim, f"{where}.matrices"
        )
        doc.morphisms[name] = MorphismEntry(name, path, mats, target_path, base)

    for k, e in enumerate(raw.get("metrics", [])):
        where = f"$.metrics[{k}]"
        name = _require(e, "name", where, str)
        path = _require(e, "path", where, str)
        kind = e.get("kind", "symmetric")
        if kind not in ("symmetric", "antisymmetric"):
            raise SchemaError(f"{where}.kind: unknown kind {kind!r}")
        grid = resolve(path, where)
        mats = _check_matrix_family(
            _require(e, "matrices", where, list), grid, dim, f"{where}.matrices"
        )
        doc.metrics[name] = MetricEntry(name, path, kind, mats)

    for k, e in enumerate(raw.get("almost_complex", [])):
        where = f"$.almost_complex[{k}]"
        name = _require(e, "name", where, str)
        path = _require(e, "path", where, str)
        grid = resolve(path, where)
        mats = _check_matrix_family(
            _require(e, "matrices", where, list), grid, dim, f"{where}.matrices"
        )
        doc.almost_complex[name] = AlmostComplexEntry(name, path, mats)

    for k, e in enumerate(raw.get("sections", [])):
        where = f"$.sections[{k}]"
        name = _require(e, "name", where, str)
        path = _require(e, "path", where, str)
        grid = resolve(path, where)
        vecs = _require(e, "vectors", where, list)
        if len(vecs) != len(grid):
            raise DimensionMismatch(
                f"{where}.vectors: {len(vecs)} vectors for {len(grid)} samples"
            )
        for idx, v in enumerate(vecs):
            if not isinstance(v, list) or len(v) != dim:
                raise DimensionMismatch(f"{where}.vectors[{idx}]: expected {dim} entries")
            for c, value in enumerate(v):
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise SchemaError(f"{where}.vectors[{idx}][{c}]: not a number")
                if not math.isfinite(value):
                    raise NonFiniteEntry(f"{where}.vectors[{idx}][{c}]: non-finite entry")
        doc.sections[name] = SectionEntry(name, path, vecs)

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise SchemaError("$.tolerances: expected an object")
    for key, value in tolerances.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            raise SchemaError(f"$.tolerances.{key}: must be a positive number")
        doc.tolerances[str(key)] = float(value)

    return doc


# -- canonical serialization ----------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        inner = ", ".join(_fmt(v) for v in value)
        return f"[{inner}]"
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in value.items())
        return f"{{{inner}}}"
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def serialize_document(doc: BundleDocument) -> str:
    """Canonical JSON text: fixed key order, 17-significant-digit floats."""
    out = {
        "version": doc.version,
        "fiber": {"dim": doc.fiber.dim},
        "paths": [
            {
                "name": name,
                "params": [float(s) for s in grid.params],
                "labels": list(grid.base_labels),
            }
            for name, grid in doc.paths.items()
        ],
    }
    if doc.factors:
        out["factors"] = [
            {"name": e.name, "path": e.path, "matrices": e.matrices}
            for e in doc.factors.values()
        ]
    if doc.morphisms:
        entries = []
        for e in doc.morphisms.values():
            entry = {"name": e.name, "path": e.path}
            if e.target_path is not None:
                entry["target_path"] = e.target_path
            if e.base is not None:
                entry["base"] = e.base
            entry["matrices"] = e.matrices
            entries.append(entry)
        out["morphisms"] = entries
    if doc.metrics:
        out["metrics"] = [
            {"name": e.name, "path": e.path, "kind": e.kind, "matrices": e.matrices}
            for e in doc.metrics.values()
        ]
    if doc.almost_complex:
        out["almost_complex"] = [
            {"name": e.name, "path": e.path, "matrices": e.matrices}
            for e in doc.almost_complex.values()
        ]
    if doc.sections:
        out["sections"] = [
            {"name": e.name, "path": e.path, "vectors": e.vectors}
            for e in doc.sections.values()
        ]
    if doc.tolerances:
        out["tolerances"] = doc.tolerances
    return _pretty(out, 0) + "\n"


def _pretty(value, depth: int) -> str:
    pad = "  " * depth
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  {json.dumps(k)}: {_pretty(v, depth + 1)}' for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, list) and any(isinstance(v, dict) for v in value):
        items = [f"{pad}  {_pretty(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return _fmt(value)


def matrices_to_lists(mats) -> list:
    """Numpy matrix family to plain nested lists for document entries."""
    return [np.asarray(m, dtype=float).tolist() for m in mats]
