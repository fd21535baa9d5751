"""Privacy budget accounting across a sequence of releases.

The ledger is append-only. Entries tagged with the same disjoint-group label
are treated as operating on non-overlapping sub-populations and compose in
parallel (max); everything else composes sequentially (sum). Entries for
syntactic mechanisms (k-anonymity and friends) carry no epsilon and make the
composed guarantee undefined rather than silently vanishing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InvalidDelta, NonPositiveEpsilon

EMPIRICAL_CHECK_WARNING = "empirical check required"
VOID_WARNING = "guarantee mostly void"
UNDEFINED_WARNING = "composed guarantee undefined"


@dataclass(frozen=True)
class LedgerEntry:
    mechanism: str
    kind: str  # "dp" or "syntactic"
    epsilon: float | None = None
    delta: float = 0.0
    group: str | None = None
    notes: str = ""

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "kind": self.kind,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "group": self.group,
            "notes": self.notes,
        }

    @staticmethod
    def from_json(doc: dict) -> "LedgerEntry":
        return LedgerEntry(
            mechanism=doc["mechanism"],
            kind=doc["kind"],
            epsilon=doc.get("epsilon"),
            delta=doc.get("delta", 0.0),
            group=doc.get("group"),
            notes=doc.get("notes", ""),
        )


@dataclass(frozen=True)
class CompositionReport:
    epsilon: float | None
    delta: float
    defined: bool
    n_entries: int
    warnings: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "defined": self.defined,
            "n_entries": self.n_entries,
            "warnings": list(self.warnings),
        }


class BudgetLedger:
    """Ordered record of every privacy-relevant release in a pipeline."""

    def __init__(self):
        self._entries: list[LedgerEntry] = []

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        return tuple(self._entries)

    def record_dp(
        self,
        mechanism: str,
        epsilon: float,
        delta: float = 0.0,
        group: str | None = None,
        notes: str = "",
    ) -> LedgerEntry:
        if epsilon <= 0:
            raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon}")
        if not 0.0 <= delta < 1.0:
            raise InvalidDelta(f"delta must be in [0, 1), got {delta}")
        entry = LedgerEntry(mechanism, "dp", float(epsilon), float(delta), group, notes)
        self._entries.append(entry)
        return entry

    def record_syntactic(self, mechanism: str, notes: str = "") -> LedgerEntry:
        """Log a release whose guarantee is syntactic (k-anonymity family).

        Such guarantees do not compose into an epsilon; their presence makes
        the pipeline-level DP statement undefined.
        """
        entry = LedgerEntry(mechanism, "syntactic", None, 0.0, None, notes)
        self._entries.append(entry)
        return entry

    def compose(self) -> CompositionReport:
        dp_entries = [e for e in self._entries if e.kind == "dp"]
        has_syntactic = any(e.kind == "syntactic" for e in self._entries)

        sequential_eps = 0.0
        sequential_delta = 0.0
        groups: dict[str, list[LedgerEntry]] = {}
        for e in dp_entries:
            if e.group is None:
                sequential_eps += e.epsilon
                sequential_delta += e.delta
            else:
                groups.setdefault(e.group, []).append(e)
        # entries inside one disjoint group touch non-overlapping records,
        # so the group costs only its worst member
        for members in groups.values():
            sequential_eps += max(m.epsilon for m in members)
            sequential_delta += max(m.delta for m in members)

        warnings: list[str] = []
        if has_syntactic:
            warnings.append(UNDEFINED_WARNING)
        if dp_entries:
            if sequential_eps > 1.0:
                warnings.append(EMPIRICAL_CHECK_WARNING)
            if sequential_eps >= 10.0:
                warnings.append(VOID_WARNING)
        epsilon = sequential_eps if dp_entries else None
        return CompositionReport(
            epsilon=epsilon,
            delta=sequential_delta,
            defined=bool(dp_entries) and not has_syntactic,
            n_entries=len(self._entries),
            warnings=tuple(warnings),
        )

    # ---- serialization: one JSON object per line, append-friendly ----

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in self._entries)

    @staticmethod
    def from_jsonl(text: str) -> "BudgetLedger":
        ledger = BudgetLedger()
        for line in text.splitlines():
            line = line.strip()
            if line:
                ledger._entries.append(LedgerEntry.from_json(json.loads(line)))
        return ledger
