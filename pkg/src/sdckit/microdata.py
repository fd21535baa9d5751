"""Microdata model: attribute schemas, tables, generalization hierarchies, releases.

Tables are immutable after construction. Numeric cells are stored as float64,
categorical cells as NFC-normalized text. Every record carries an internal
row id that masking operations preserve and serialization never writes out.
"""

from __future__ import annotations

import csv
import io
import json
import math
import unicodedata
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    LevelOutOfRange,
    MalformedCsv,
    MissingColumn,
    SearchSpaceTooLarge,
    UnknownAttribute,
    UnknownValue,
)

ROLES = ("identifier", "quasi_identifier", "confidential", "non_confidential")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def canonical_number(value: float) -> str:
    """Shortest text form that parses back to exactly the same float."""
    v = float(value)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


# --------------------------------------------------------------------------
# schema
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericKind:
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("numeric domain bounds must be finite")
        if self.lo > self.hi:
            raise ValueError(f"numeric domain has lo > hi: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class CategoricalKind:
    values: tuple[str, ...]

    def __post_init__(self):
        norm = tuple(nfc(str(v)) for v in self.values)
        if not norm:
            raise ValueError("categorical domain is empty")
        if len(set(norm)) != len(norm):
            raise ValueError("categorical domain has duplicate values")
        object.__setattr__(self, "values", norm)


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    role: str
    kind: NumericKind | CategoricalKind

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}; expected one of {ROLES}")
        object.__setattr__(self, "name", nfc(self.name))

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.kind, NumericKind)


def schema_from_descriptor(descriptor: Mapping[str, Mapping[str, Any]]) -> tuple[AttributeSchema, ...]:
    """Build a schema from the JSON sidecar form: name -> {role, kind, domain}."""
    attrs = []
    for name, spec in descriptor.items():
        role = spec.get("role")
        kind_name = spec.get("kind")
        if kind_name == "numeric":
            kind: NumericKind | CategoricalKind = NumericKind(spec["min"], spec["max"])
        elif kind_name == "categorical":
            kind = CategoricalKind(tuple(spec["values"]))
        else:
            raise ValueError(f"attribute {name!r}: unknown kind {kind_name!r}")
        attrs.append(AttributeSchema(name=name, role=role, kind=kind))
    if not attrs:
        raise ValueError("schema descriptor declares no attributes")
    return tuple(attrs)


def schema_to_descriptor(schema: Sequence[AttributeSchema]) -> dict[str, dict[str, Any]]:
    out: dict[str, dict[str, Any]] = {}
    for a in schema:
        if isinstance(a.kind, NumericKind):
            out[a.name] = {"role": a.role, "kind": "numeric", "min": a.kind.lo, "max": a.kind.hi}
        else:
            out[a.name] = {"role": a.role, "kind": "categorical", "values": list(a.kind.values)}
    return out


# --------------------------------------------------------------------------
# table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MicrodataTable:
    schema: tuple[AttributeSchema, ...]
    columns: dict[str, np.ndarray]
    row_ids: np.ndarray

    def __post_init__(self):
        names = [a.name for a in self.schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate attribute names in schema")
        if set(self.columns) != set(names):
            raise ValueError("columns do not match schema attribute names")
        n = None
        for name in names:
            col = np.asarray(self.columns[name])
            if col.ndim != 1:
                raise ValueError(f"column {name!r} is not one-dimensional")
            if n is None:
                n = col.shape[0]
            elif col.shape[0] != n:
                raise ValueError("columns have inconsistent lengths")
            col.setflags(write=False)
            self.columns[name] = col
        ids = np.asarray(self.row_ids, dtype=np.int64)
        if ids.shape[0] != (n or 0):
            raise ValueError("row_ids length does not match table")
        if len(np.unique(ids)) != ids.shape[0]:
            raise ValueError("row_ids must be unique")
        ids.setflags(write=False)
        object.__setattr__(self, "row_ids", ids)

    # -- introspection ------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return int(self.row_ids.shape[0])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)

    def attribute(self, name: str) -> AttributeSchema:
        for a in self.schema:
            if a.name == name:
                return a
        raise UnknownAttribute(name)

    def has_attribute(self, name: str) -> bool:
        return any(a.name == name for a in self.schema)

    def names_with_role(self, role: str) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema if a.role == role)

    @property
    def qi_names(self) -> tuple[str, ...]:
        return self.names_with_role("quasi_identifier")

    @property
    def identifier_names(self) -> tuple[str, ...]:
        return self.names_with_role("identifier")

    @property
    def confidential_names(self) -> tuple[str, ...]:
        return self.names_with_role("confidential")

    def column(self, name: str) -> np.ndarray:
        self.attribute(name)
        return self.columns[name]

    def row(self, i: int) -> tuple:
        return tuple(self.columns[a.name][i] for a in self.schema)

    # -- derivation ---------------------------------------------------------

    def take(self, indices: Iterable[int]) -> "MicrodataTable":
        idx = np.asarray(list(indices), dtype=np.int64)
        cols = {name: self.columns[name][idx] for name in self.names}
        return MicrodataTable(self.schema, cols, self.row_ids[idx])

    def drop_columns(self, names: Iterable[str]) -> "MicrodataTable":
        drop = set(names)
        keep = tuple(a for a in self.schema if a.name not in drop)
        cols = {a.name: self.columns[a.name] for a in keep}
        return MicrodataTable(keep, cols, self.row_ids)

    def with_column(self, name: str, values: np.ndarray, kind=None, role=None) -> "MicrodataTable":
        """Replace one column, optionally changing its declared kind or role."""
        old = self.attribute(name)
        new_attr = AttributeSchema(name, role or old.role, kind or old.kind)
        schema = tuple(new_attr if a.name == name else a for a in self.schema)
        cols = dict(self.columns)
        cols[name] = np.asarray(values)
        return MicrodataTable(schema, cols, self.row_ids)

    def equals(self, other: "MicrodataTable") -> bool:
        """Cell-wise and schema equality; internal row ids are not compared."""
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        for a in self.schema:
            mine, theirs = self.columns[a.name], other.columns[a.name]
            if a.is_numeric:
                if not np.array_equal(mine.astype(float), theirs.astype(float)):
                    return False
            else:
                if list(mine) != list(theirs):
                    return False
        return True


def make_table(
    schema: Sequence[AttributeSchema],
    columns: Mapping[str, Sequence],
    row_ids: Sequence[int] | None = None,
    validate: bool = True,
) -> MicrodataTable:
    """Construct a table from python sequences, checking every cell against its domain."""
    schema = tuple(schema)
    cols: dict[str, np.ndarray] = {}
    n = None
    for a in schema:
        if a.name not in columns:
            raise MissingColumn(a.name)
        raw = list(columns[a.name])
        if n is None:
            n = len(raw)
        if a.is_numeric:
            col = np.asarray(raw, dtype=np.float64)
        else:
            col = np.asarray([nfc(str(v)) for v in raw], dtype=object)
        cols[a.name] = col
    if validate:
        for i in range(n or 0):
            for a in schema:
                _check_cell(i, a, cols[a.name][i])
    ids = np.arange(n or 0, dtype=np.int64) if row_ids is None else np.asarray(list(row_ids), dtype=np.int64)
    return MicrodataTable(schema, cols, ids)


def _check_cell(row: int, attr: AttributeSchema, value) -> None:
    if isinstance(attr.kind, NumericKind):
        v = float(value)
        if not math.isfinite(v):
            raise DomainViolation(row, attr.name, f"non-finite value {value!r}")
        if not (attr.kind.lo <= v <= attr.kind.hi):
            raise DomainViolation(
                row, attr.name, f"value {canonical_number(v)} outside [{attr.kind.lo}, {attr.kind.hi}]"
            )
    else:
        if value not in attr.kind.values:
            raise DomainViolation(row, attr.name, f"value {value!r} not in declared domain")


# --------------------------------------------------------------------------
# csv ingestion / serialization (RFC 4180)
# --------------------------------------------------------------------------


def load_table(csv_data: bytes | str, schema_descriptor) -> MicrodataTable:
    """Parse csv bytes against a schema descriptor.

    The header must carry exactly the declared attribute names. Missing values
    are rejected: every cell must parse and fall inside its declared domain.
    """
    if isinstance(schema_descriptor, Mapping):
        schema = schema_from_descriptor(schema_descriptor)
    else:
        schema = tuple(schema_descriptor)
    if isinstance(csv_data, bytes):
        try:
            text = csv_data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedCsv(f"input is not valid utf-8: {e}") from e
    else:
        text = csv_data
    try:
        rows = list(csv.reader(io.StringIO(text)))
    except csv.Error as e:
        raise MalformedCsv(str(e)) from e
    if not rows:
        raise MalformedCsv("empty input: no header row")
    header = [nfc(h) for h in rows[0]]
    names = [a.name for a in schema]
    for name in names:
        if name not in header:
            raise MissingColumn(name)
    if len(set(header)) != len(header):
        raise MalformedCsv("duplicate column names in header")
    for h in header:
        if h not in names:
            raise MalformedCsv(f"unexpected column {h!r} not declared in schema")
    col_of = {name: header.index(name) for name in names}

    body = rows[1:]
    raw_cols: dict[str, list] = {name: [] for name in names}
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise MalformedCsv(f"row {i}: expected {len(header)} fields, got {len(r)}")
        for a in schema:
            cell = r[col_of[a.name]]
            if isinstance(a.kind, NumericKind):
                stripped = cell.strip()
                if not stripped:
                    raise DomainViolation(i, a.name, "missing value")
                try:
                    v = float(stripped)
                except ValueError:
                    raise DomainViolation(i, a.name, f"cannot parse {cell!r} as a number") from None
                _check_cell(i, a, v)
                raw_cols[a.name].append(v)
            else:
                v = nfc(cell)
                if not v:
                    raise DomainViolation(i, a.name, "missing value")
                _check_cell(i, a, v)
                raw_cols[a.name].append(v)

    cols = {
        a.name: (
            np.asarray(raw_cols[a.name], dtype=np.float64)
            if a.is_numeric
            else np.asarray(raw_cols[a.name], dtype=object)
        )
        for a in schema
    }
    return MicrodataTable(schema, cols, np.arange(len(body), dtype=np.int64))


def serialize_table(table: MicrodataTable) -> bytes:
    """Write the table as RFC 4180 csv with canonical number formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(table.names)
    for i in range(table.n_rows):
        out = []
        for a in table.schema:
            v = table.columns[a.name][i]
            out.append(canonical_number(v) if a.is_numeric else str(v))
        writer.writerow(out)
    return buf.getvalue().encode("utf-8")


def suppress_identifiers(table: MicrodataTable) -> MicrodataTable:
    """Drop every attribute with role identifier; all other columns pass through."""
    return table.drop_columns(table.identifier_names)


# --------------------------------------------------------------------------
# generalization hierarchies
# --------------------------------------------------------------------------


class GeneralizationHierarchy:
    """Rooted balanced tree over an attribute's domain.

    Leaves sit at level 0 and are the domain values; the root sits at level
    ``height``. Categorical hierarchies are explicit trees; numeric attributes
    may instead declare nested interval partitions by cut points per level.
    Node labels are unique within one hierarchy, so a label identifies both
    the node and its level.
    """

    def __init__(self, attribute: str, height: int, kind: str):
        self.attribute = attribute
        self.height = height
        self.kind = kind  # "tree" | "intervals"
        self._paths: dict[str, tuple[str, ...]] = {}
        self._children: dict[str, list[str]] = {}
        self._level_of: dict[str, int] = {}
        self._lo = 0.0
        self._hi = 0.0
        self._cuts: tuple[tuple[float, ...], ...] = ()
        self._integral = False
        self._interval_of: dict[str, tuple[float, float]] = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_tree(cls, attribute: str, tree: Mapping[str, Any]) -> "GeneralizationHierarchy":
        if len(tree) != 1:
            raise ValueError("hierarchy tree must have exactly one root")
        paths: dict[str, tuple[str, ...]] = {}
        seen: set[str] = set()

        def walk(label: str, node, ancestry: tuple[str, ...]):
            label = nfc(str(label))
            if label in seen:
                raise ValueError(f"duplicate node label {label!r} in hierarchy for {attribute!r}")
            seen.add(label)
            lineage = (label,) + ancestry
            if node is None or (isinstance(node, Mapping) and not node):
                paths[label] = lineage
                return
            if not isinstance(node, Mapping):
                raise ValueError("hierarchy tree nodes must be objects or null")
            for child_label, child in node.items():
                walk(child_label, child, lineage)

        root_label = next(iter(tree))
        walk(root_label, tree[root_label], ())
        depths = {len(p) - 1 for p in paths.values()}
        if len(depths) != 1:
            raise ValueError(f"hierarchy for {attribute!r} is unbalanced: leaf depths {sorted(depths)}")
        height = depths.pop()
        h = cls(attribute, height, "tree")
        h._paths = paths
        for leaf, lineage in paths.items():
            for level, label in enumerate(lineage):
                prior = h._level_of.get(label)
                if prior is not None and prior != level:
                    raise ValueError(f"label {label!r} appears at two levels")
                h._level_of[label] = level
                if level > 0:
                    h._children.setdefault(label, [])
                    child = lineage[level - 1]
                    if child not in h._children[label]:
                        h._children[label].append(child)
        return h

    @classmethod
    def from_breakpoints(
        cls,
        attribute: str,
        lo: float,
        hi: float,
        cuts_per_level: Sequence[Sequence[float]],
    ) -> "GeneralizationHierarchy":
        """Nested interval hierarchy: level i uses the i-th cut list, root spans [lo, hi]."""
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ValueError("interval hierarchy needs finite lo <= hi")
        cuts = [tuple(float(c) for c in level) for level in cuts_per_level]
        while cuts and not cuts[-1]:
            cuts.pop()
        for level in cuts:
            if list(level) != sorted(set(level)):
                raise ValueError("cut points must be strictly increasing")
            if level and (level[0] <= lo or level[-1] > hi):
                raise ValueError("cut points must lie strictly inside the domain")
        for fine, coarse in zip(cuts, cuts[1:]):
            if not set(coarse) <= set(fine):
                raise ValueError("interval levels must nest: coarser cuts must be a subset of finer ones")
        height = len(cuts) + 1
        h = cls(attribute, height, "intervals")
        h._lo, h._hi = lo, hi
        h._cuts = tuple(cuts) + ((),)  # the final entry is the root level: no cuts
        h._integral = all(float(x).is_integer() for x in [lo, hi, *[c for lvl in cuts for c in lvl]])
        for level in range(1, height + 1):
            for ivl_lo, ivl_hi in h._intervals_at(level):
                label = h._interval_label(ivl_lo, ivl_hi)
                if label in h._level_of:
                    # an interval no cut splits repeats at coarser levels; it is
                    # the same node, registered once at its lowest level
                    continue
                h._level_of[label] = level
                h._interval_of[label] = (ivl_lo, ivl_hi)
        return h

    # -- interval plumbing ---------------------------------------------------

    def _intervals_at(self, level: int) -> list[tuple[float, float]]:
        """Half-open [lo, hi) intervals except the last, which closes at the domain max."""
        cut_list = self._cuts[level - 1]
        edges = [self._lo, *cut_list, math.nextafter(self._hi, math.inf)]
        return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    def _interval_label(self, ivl_lo: float, ivl_hi: float) -> str:
        last = ivl_hi > self._hi
        if self._integral:
            right = int(self._hi) if last else int(ivl_hi) - 1
            return f"[{int(ivl_lo)},{right}]"
        if last:
            return f"[{canonical_number(ivl_lo)},{canonical_number(self._hi)}]"
        return f"[{canonical_number(ivl_lo)},{canonical_number(ivl_hi)})"

    # -- queries -------------------------------------------------------------

    def contains(self, value) -> bool:
        if self.kind == "tree":
            return isinstance(value, str) and nfc(value) in self._paths
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False
        return math.isfinite(v) and self._lo <= v <= self._hi

    def label(self, value, level: int) -> str:
        """Text label of the ancestor of ``value`` at the requested level."""
        if not 0 <= level <= self.height:
            raise LevelOutOfRange(f"level {level} outside [0, {self.height}] for {self.attribute!r}")
        if not self.contains(value):
            raise UnknownValue(f"{value!r} is not a leaf of the hierarchy for {self.attribute!r}")
        if self.kind == "tree":
            return self._paths[nfc(value)][level]
        v = float(value)
        if level == 0:
            return canonical_number(v)
        cut_list = self._cuts[level - 1]
        j = bisect_right(cut_list, v)
        edges = [self._lo, *cut_list, math.nextafter(self._hi, math.inf)]
        return self._interval_label(edges[j], edges[j + 1])

    def value_path(self, value) -> tuple[str, ...]:
        return tuple(self.label(value, lv) for lv in range(self.height + 1))

    def level_of_label(self, label: str) -> int:
        if label in self._level_of:
            return self._level_of[label]
        if self.kind == "intervals":
            try:
                v = float(label)
            except ValueError:
                raise UnknownValue(f"label {label!r} not in hierarchy for {self.attribute!r}") from None
            if self.contains(v):
                return 0
        raise UnknownValue(f"label {label!r} not in hierarchy for {self.attribute!r}")

    def leaves_under(self, label: str, limit: int = 10**6) -> list:
        """Enumerate the domain values below a node; refuses unenumerable domains."""
        level = self.level_of_label(label)
        if self.kind == "tree":
            if level == 0:
                return [label]
            found = [leaf for leaf, lineage in self._paths.items() if lineage[level] == label]
            if len(found) > limit:
                raise SearchSpaceTooLarge(f"{len(found)} leaves under {label!r} exceed limit {limit}")
            return found
        if level == 0:
            return [float(label)]
        if not self._integral:
            raise SearchSpaceTooLarge(
                f"interval leaves of {self.attribute!r} are not enumerable: non-integer domain"
            )
        ivl_lo, ivl_hi = self._interval_of[label]
        last = ivl_hi > self._hi
        left = int(ivl_lo)
        right = int(self._hi) if last else int(ivl_hi) - 1
        count = right - left + 1
        if count > limit:
            raise SearchSpaceTooLarge(f"{count} leaves under {label!r} exceed limit {limit}")
        return [float(x) for x in range(left, right + 1)]

    @property
    def root_label(self) -> str:
        if self.kind == "tree":
            some_path = next(iter(self._paths.values()))
            return some_path[-1]
        return self._interval_label(*self._intervals_at(self.height)[0])


def generalize_value(hierarchy: GeneralizationHierarchy, value, level: int):
    """Ancestor of a leaf at the requested level; level 0 returns the value itself."""
    if not isinstance(level, (int, np.integer)) or level < 0 or level > hierarchy.height:
        raise LevelOutOfRange(f"level {level} outside [0, {hierarchy.height}]")
    if not hierarchy.contains(value):
        raise UnknownValue(f"{value!r} is not a leaf of the hierarchy for {hierarchy.attribute!r}")
    if level == 0:
        return value
    return hierarchy.label(value, int(level))


def hierarchy_from_json(doc: Mapping[str, Any] | str) -> GeneralizationHierarchy:
    if isinstance(doc, str):
        doc = json.loads(doc)
    attribute = doc["attribute"]
    if "tree" in doc:
        return GeneralizationHierarchy.from_tree(attribute, doc["tree"])
    if "intervals" in doc:
        spec = doc["intervals"]
        return GeneralizationHierarchy.from_breakpoints(
            attribute, spec["min"], spec["max"], spec.get("cuts", [])
        )
    raise ValueError("hierarchy document needs a 'tree' or 'intervals' section")


def hierarchy_to_json(h: GeneralizationHierarchy) -> dict[str, Any]:
    if h.kind == "intervals":
        return {
            "attribute": h.attribute,
            "intervals": {"min": h._lo, "max": h._hi, "cuts": [list(c) for c in h._cuts[:-1]]},
        }

    def build(label: str):
        kids = h._children.get(label)
        if not kids:
            return None
        return {k: build(k) for k in kids}

    root = h.root_label
    return {"attribute": h.attribute, "tree": {root: build(root)}}


def load_hierarchies(docs: Iterable[Mapping[str, Any] | str]) -> dict[str, GeneralizationHierarchy]:
    out: dict[str, GeneralizationHierarchy] = {}
    for doc in docs:
        h = hierarchy_from_json(doc)
        out[h.attribute] = h
    return out


# --------------------------------------------------------------------------
# releases
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Provenance:
    mechanism: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "notes", tuple(self.notes))


def canonical_partition(groups: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    """Sort members within groups and groups by first member."""
    canon = tuple(tuple(sorted(int(i) for i in g)) for g in groups)
    return tuple(sorted(canon, key=lambda g: g[0]))


@dataclass(frozen=True)
class AnonymizedRelease:
    table: MicrodataTable
    partition: tuple[tuple[int, ...], ...] | None
    provenance: Provenance

    def __post_init__(self):
        if self.table.identifier_names:
            raise ValueError("releases must not contain identifier attributes")
        if self.partition is not None:
            canon = canonical_partition(self.partition)
            members = [i for g in canon for i in g]
            if sorted(members) != list(range(self.table.n_rows)):
                raise ValueError("partition must cover every row exactly once")
            object.__setattr__(self, "partition", canon)

    def group_of_row(self, position: int) -> tuple[int, ...]:
        if self.partition is None:
            raise ValueError("release carries no partition")
        for g in self.partition:
            if position in g:
                return g
        raise ValueError(f"row position {position} not in partition")


def write_release(release: AnonymizedRelease, directory: str | Path, basename: str = "release") -> list[Path]:
    """Write release.csv plus a JSON provenance sidecar; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{basename}.csv"
    sidecar_path = directory / f"{basename}.provenance.json"
    csv_path.write_bytes(serialize_table(release.table))
    doc = {
        "mechanism": release.provenance.mechanism,
        "params": release.provenance.params,
        "seed": release.provenance.seed,
        "notes": list(release.provenance.notes),
        "schema": schema_to_descriptor(release.table.schema),
        "partition": [list(g) for g in release.partition] if release.partition is not None else None,
        "row_ids": [int(i) for i in release.table.row_ids],
    }
    sidecar_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return [csv_path, sidecar_path]


def read_release(directory: str | Path, basename: str = "release") -> AnonymizedRelease:
    directory = Path(directory)
    doc = json.loads((directory / f"{basename}.provenance.json").read_text(encoding="utf-8"))
    raw = (directory / f"{basename}.csv").read_bytes()
    # the sidecar is written with sorted keys; the csv header keeps column order
    header = next(csv.reader(io.StringIO(raw.decode("utf-8"))))
    descriptor = {name: doc["schema"][name] for name in header if name in doc["schema"]}
    table = load_table(raw, descriptor)
    if doc.get("row_ids") is not None:
        table = MicrodataTable(table.schema, dict(table.columns), np.asarray(doc["row_ids"], dtype=np.int64))
    partition = [tuple(g) for g in doc["partition"]] if doc.get("partition") is not None else None
    prov = Provenance(
        mechanism=doc["mechanism"],
        params=doc.get("params", {}),
        seed=doc.get("seed"),
        notes=tuple(doc.get("notes", ())),
    )
    return AnonymizedRelease(table=table, partition=partition, provenance=prov)
