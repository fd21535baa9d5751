"""Confidential-attribute protection: l-diversity, t-closeness, and the
constrained class formation that enforces both on top of k-anonymity.

Earth mover's distance comes in two closed forms: the 1-D formula for ordered
numeric supports and total variation for categorical supports under the 0/1
ground distance. Both are checked elsewhere against a brute-force
transportation solver.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptyClass,
    Infeasible,
    InvalidT,
    NonNumeric,
    SupportMismatch,
    TooFewRows,
    UnknownAttribute,
)
from .kanon import _as_table, mdav_partition
from .metric import MixedSpace
from .microdata import MicrodataTable, canonical_partition


# --------------------------------------------------------------------------
# distributions and ground distances
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Probability mass over an explicit finite support."""

    support: tuple
    mass: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass lengths differ")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support has duplicate points")
        if any(m < -1e-12 for m in self.mass):
            raise ValueError("negative probability mass")
        total = math.fsum(self.mass)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mass sums to {total}, not 1")

    @classmethod
    def from_values(cls, values: Sequence, support: Sequence | None = None) -> "Distribution":
        values = list(values)
        if not values:
            raise EmptyClass("cannot build a distribution from zero values")
        counts = Counter(values)
        if support is None:
            support = sorted(counts)
        n = len(values)
        return cls(tuple(support), tuple(counts.get(s, 0) / n for s in support))


@dataclass(frozen=True)
class GroundDistance:
    """ordered_numeric: |rank_i - rank_j| / (m - 1); categorical_uniform: 0/1."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("ordered_numeric", "categorical_uniform"):
            raise ValueError(f"unknown ground distance {self.kind!r}")

    def matrix(self, m: int) -> np.ndarray:
        if self.kind == "categorical_uniform" or m == 1:
            return 1.0 - np.eye(m)
        idx = np.arange(m, dtype=float)
        return np.abs(idx[:, None] - idx[None, :]) / (m - 1)


ORDERED_NUMERIC = GroundDistance("ordered_numeric")
CATEGORICAL_UNIFORM = GroundDistance("categorical_uniform")


def _aligned(p: Distribution, q: Distribution, d: GroundDistance):
    support = sorted(set(p.support) | set(q.support))
    if d.kind == "ordered_numeric":
        for v in support:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SupportMismatch(f"ordered_numeric needs numeric support, found {v!r}")
    pm = dict(zip(p.support, p.mass))
    qm = dict(zip(q.support, q.mass))
    return (
        support,
        np.asarray([pm.get(v, 0.0) for v in support]),
        np.asarray([qm.get(v, 0.0) for v in support]),
    )


def emd(p: Distribution, q: Distribution, d: GroundDistance = CATEGORICAL_UNIFORM) -> float:
    """Earth mover's distance between two distributions on the union support.

    Closed forms: cumulative-difference sum for ordered numeric supports,
    total variation for the 0/1 categorical ground distance. Result is in
    [0, 1] because both ground distances are normalized to max 1.
    """
    support, pm, qm = _aligned(p, q, d)
    m = len(support)
    if m == 1:
        return 0.0
    if d.kind == "categorical_uniform":
        return 0.5 * float(np.abs(pm - qm).sum())
    diff_cdf = np.cumsum(pm - qm)[:-1]
    return float(np.abs(diff_cdf).sum() / (m - 1))


def emd_transport(p: Distribution, q: Distribution, d: GroundDistance) -> float:
    """Transportation-problem EMD via linear programming; the slow oracle route."""
    from scipy.optimize import linprog

    support, pm, qm = _aligned(p, q, d)
    m = len(support)
    if m == 1:
        return 0.0
    cost = d.matrix(m).reshape(-1)
    a_eq = []
    b_eq = []
    for i in range(m):  # row sums: mass leaving point i
        row = np.zeros(m * m)
        row[i * m : (i + 1) * m] = 1.0
        a_eq.append(row)
        b_eq.append(pm[i])
    for j in range(m - 1):  # column sums; last one is redundant
        col = np.zeros(m * m)
        col[j::m] = 1.0
        a_eq.append(col)
        b_eq.append(qm[j])
    res = linprog(cost, A_eq=np.asarray(a_eq), b_eq=np.asarray(b_eq), bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    return float(res.fun)


# --------------------------------------------------------------------------
# l-diversity
# --------------------------------------------------------------------------


def l_diversity(class_values: Sequence, variant: str = "distinct") -> float:
    """Diversity of confidential values in one class.

    distinct: the number of distinct values. entropy: exp of the Shannon
    entropy (natural log), which equals the distinct count exactly when the
    class distribution is uniform and is strictly smaller otherwise.
    """
    values = list(class_values)
    if not values:
        raise EmptyClass("class has no records")
    if variant == "distinct":
        return float(len(set(values)))
    if variant == "entropy":
        counts = Counter(values)
        n = len(values)
        h = -math.fsum((c / n) * math.log(c / n) for c in counts.values())
        return math.exp(h)
    raise ValueError(f"unknown l-diversity variant {variant!r}")


# --------------------------------------------------------------------------
# t-closeness
# --------------------------------------------------------------------------


def _class_distributions(table: MicrodataTable, partition, conf_attribute: str):
    attr = table.attribute(conf_attribute)
    col = table.columns[conf_attribute]
    values = [float(v) for v in col] if attr.is_numeric else [str(v) for v in col]
    support = sorted(set(values))
    global_dist = Distribution.from_values(values, support)
    per_class = []
    for group in partition:
        per_class.append(Distribution.from_values([values[i] for i in group], support))
    return global_dist, per_class, attr.is_numeric


def verify_t_closeness(
    release_or_table,
    partition,
    conf_attribute: str,
    t: float,
    d: GroundDistance | None = None,
):
    """Max class-to-global EMD must not exceed t. Returns (holds, max_distance)."""
    if t < 0:
        raise InvalidT("closeness threshold t must be nonnegative")
    table = _as_table(release_or_table)
    partition = canonical_partition(partition)
    global_dist, per_class, numeric = _class_distributions(table, partition, conf_attribute)
    if d is None:
        d = ORDERED_NUMERIC if numeric else CATEGORICAL_UNIFORM
    worst = max((emd(c, global_dist, d) for c in per_class), default=0.0)
    return worst <= t, worst


def closeness_to_dp_epsilon(multiplicative_t: float) -> float:
    """Privacy budget implied by multiplicative closeness.

    A class distribution within a multiplicative factor t >= 1 of the global
    one on every value bounds the intruder's posterior shift exactly like an
    epsilon = ln(t) indistinguishability constraint. The argument is the
    multiplicative factor, not an EMD threshold.
    """
    if multiplicative_t < 1.0:
        raise InvalidT(f"multiplicative closeness factor must be >= 1, got {multiplicative_t}")
    return math.log(multiplicative_t)


# --------------------------------------------------------------------------
# constrained class formation
# --------------------------------------------------------------------------


def enforce_models(
    table: MicrodataTable,
    qi_attributes: Sequence[str],
    conf_attribute: str,
    k: int,
    l: float | None = None,
    t: float | None = None,
    variant: str = "distinct",
    d: GroundDistance | None = None,
):
    """MDAV start, then greedily merge violating classes into their nearest
    neighbor (by centroid distance) until k, l-diversity, and t-closeness all
    hold, or a single class remains and still violates (Infeasible)."""
    if l is not None and l < 1:
        raise ValueError("l must be at least 1")
    if t is not None and t < 0:
        raise InvalidT("closeness threshold t must be nonnegative")
    table.attribute(conf_attribute)
    partition = [list(g) for g in mdav_partition(table, qi_attributes, k)]
    space = MixedSpace.from_table(table, list(qi_attributes))
    conf_col = table.columns[conf_attribute]
    conf_attr = table.attribute(conf_attribute)
    conf_values = [float(v) for v in conf_col] if conf_attr.is_numeric else [str(v) for v in conf_col]
    support = sorted(set(conf_values))
    global_dist = Distribution.from_values(conf_values, support)
    if d is None:
        d = ORDERED_NUMERIC if conf_attr.is_numeric else CATEGORICAL_UNIFORM

    def failing_constraint(group: Sequence[int]) -> str | None:
        if len(group) < k:
            return "k_anonymity"
        cls = [conf_values[i] for i in group]
        if l is not None and l_diversity(cls, variant) < l:
            return "l_diversity"
        if t is not None:
            dist = emd(Distribution.from_values(cls, support), global_dist, d)
            if dist > t:
                return "t_closeness"
        return None

    while True:
        violation = None
        for gi, group in enumerate(partition):
            constraint = failing_constraint(group)
            if constraint:
                violation = (gi, constraint)
                break
        if violation is None:
            return canonical_partition(partition)
        gi, constraint = violation
        if len(partition) == 1:
            raise Infeasible(constraint, f"single remaining class of {len(partition[0])} records still fails")
        centroids = [space.centroid(np.asarray(g, dtype=np.int64)) for g in partition]
        num_g, cat_g = centroids[gi]
        best = None
        for gj, (num_o, cat_o) in enumerate(centroids):
            if gj == gi:
                continue
            dist = float(((num_g - num_o) ** 2).sum()) + float(sum(a != b for a, b in zip(cat_g, cat_o)))
            if best is None or dist < best[0] or (dist == best[0] and gj < best[1]):
                best = (dist, gj)
        gj = best[1]
        merged = sorted(partition[gi] + partition[gj])
        partition = [g for idx, g in enumerate(partition) if idx not in (gi, gj)]
        partition.append(merged)
        partition = [list(g) for g in canonical_partition(partition)]


# --------------------------------------------------------------------------
# similarity alert
# --------------------------------------------------------------------------


def similarity_alert(
    class_values: Sequence[float], global_values: Sequence[float], threshold: float = 0.1
) -> bool:
    """Flag classes whose numeric confidential range is a tiny slice of the
    global range: values can be narrowed down even without exact disclosure."""
    cls = list(class_values)
    if not cls:
        raise EmptyClass("class has no records")
    try:
        cls_f = [float(v) for v in cls]
        glob_f = [float(v) for v in global_values]
    except (TypeError, ValueError):
        raise NonNumeric("similarity alert is defined for numeric confidential values") from None
    if not glob_f:
        raise EmptyClass("global value list is empty")
    global_range = max(glob_f) - min(glob_f)
    if global_range == 0.0:
        return False
    ratio = (max(cls_f) - min(cls_f)) / global_range
    return ratio < threshold
