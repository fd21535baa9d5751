"""Empirical attack harness: record linkage, attribute inference, membership
inference, release intersection, and downcoding reconstruction.

Every attack returns an AttackReport with an aggregate success rate, a Wilson
95% interval where the rate is a Bernoulli aggregate, and attack-specific
detail. Attacks measure what an adversary actually achieves against concrete
releases; they complement, and sometimes contradict, syntactic guarantees.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .confmodels import CATEGORICAL_UNIFORM, ORDERED_NUMERIC, Distribution, emd
from .dp import neighbor_relation
from .errors import (
    Misaligned,
    MissingPartition,
    NoSharedQIs,
    NotMinimalMechanism,
    NotNeighbors,
    UnknownAttribute,
)
from .microdata import AnonymizedRelease, GeneralizationHierarchy, MicrodataTable
from .metric import comparable_text
from .probkanon import AnatomyRelease
from .seeds import derive_rng, derive_seed


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # rounding can push a boundary estimate (p = 0 or 1) just outside the
    # interval; the exact interval always contains p, so clamp to it
    return (max(0.0, min(center - half, p)), min(1.0, max(center + half, p)))


@dataclass(frozen=True)
class AttackReport:
    attack: str
    success_rate: float
    wilson: tuple[float, float]
    trials: int
    baseline: float | None = None
    details: Mapping = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "attack": self.attack,
            "success_rate": self.success_rate,
            "wilson": list(self.wilson),
            "trials": self.trials,
            "baseline": self.baseline,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _as_table(release_or_table) -> MicrodataTable:
    if isinstance(release_or_table, AnonymizedRelease):
        return release_or_table.table
    return release_or_table


# --------------------------------------------------------------------------
# record linkage
# --------------------------------------------------------------------------


def link_records(
    release_table: MicrodataTable, external_table: MicrodataTable, rng: np.random.Generator
) -> np.ndarray:
    """Nearest-neighbor match of each external record to a release row.

    Distance is summed over the quasi-identifiers the two tables share:
    squared difference after pooled z-scoring when both sides are numeric,
    exact-match 0/1 on canonical text otherwise. Ties are broken uniformly
    at random. Returns the matched release row position per external row.
    """
    shared = [n for n in external_table.qi_names if n in release_table.qi_names]
    if not shared:
        raise NoSharedQIs("the release and the external table share no quasi-identifiers")
    n_rel, n_ext = release_table.n_rows, external_table.n_rows
    dist = np.zeros((n_ext, n_rel))
    for name in shared:
        numeric = release_table.attribute(name).is_numeric and external_table.attribute(name).is_numeric
        if numeric:
            rel = release_table.columns[name].astype(float)
            ext = external_table.columns[name].astype(float)
            pooled = np.concatenate([rel, ext])
            std = float(pooled.std())
            if std == 0.0:
                continue
            mean = float(pooled.mean())
            relz = (rel - mean) / std
            extz = (ext - mean) / std
            dist += (extz[:, None] - relz[None, :]) ** 2
        else:
            rel = comparable_text(release_table, name)
            ext = comparable_text(external_table, name)
            dist += (ext[:, None] != rel[None, :]).astype(float)
    positions = np.empty(n_ext, dtype=np.int64)
    for i in range(n_ext):
        row = dist[i]
        ties = np.flatnonzero(row == row.min())
        positions[i] = ties[0] if ties.size == 1 else ties[rng.integers(ties.size)]
    return positions


def linkage_attack(
    release,
    external_table: MicrodataTable,
    trials: int = 1,
    rng_seed: int = 0,
) -> AttackReport:
    """Re-identification by nearest-neighbor linkage against known records.

    ``release`` may be a finished release, a bare table, or a factory
    ``seed -> release`` that is re-randomized on every trial. Success for one
    external record means the matched release row carries that record's id.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n_ext = external_table.n_rows
    per_record = np.zeros(n_ext)
    successes = 0
    n_rel = None
    shared = None
    for t in range(trials):
        rel = release(derive_seed(rng_seed, "trial", t, 0)) if callable(release) else release
        rel_table = _as_table(rel)
        n_rel = rel_table.n_rows
        if shared is None:
            shared = [n for n in external_table.qi_names if n in rel_table.qi_names]
        rng = derive_rng(rng_seed, "attack", t)
        pos = link_records(rel_table, external_table, rng)
        hits = np.asarray(rel_table.row_ids)[pos] == np.asarray(external_table.row_ids)
        per_record += hits
        successes += int(hits.sum())
    total = trials * n_ext
    rate = successes / total
    return AttackReport(
        attack="linkage",
        success_rate=rate,
        wilson=wilson_interval(successes, total),
        trials=total,
        baseline=1.0 / n_rel if n_rel else None,
        details={
            "shared_qis": shared,
            "n_release_rows": n_rel,
            "n_external_rows": n_ext,
            "per_record_rates": (per_record / trials).tolist(),
        },
    )


# --------------------------------------------------------------------------
# attribute inference
# --------------------------------------------------------------------------


def _class_value_lists(release, conf_attribute: str, true_table: MicrodataTable):
    """Per-record class assignment and per-class released confidential values.

    Returns (row_id -> class index, list of per-class value lists, global values).
    """
    if isinstance(release, AnatomyRelease):
        qi_table, conf_table = release.qi_table, release.conf_table
        if conf_attribute not in conf_table.names:
            raise UnknownAttribute(conf_attribute)
        group_col = qi_table.columns["group_id"].astype(int)
        groups = sorted(set(int(g) for g in group_col))
        index_of = {g: j for j, g in enumerate(groups)}
        class_of = {
            int(rid): index_of[int(g)] for rid, g in zip(qi_table.row_ids, group_col)
        }
        conf_groups = conf_table.columns["group_id"].astype(int)
        values = conf_table.columns[conf_attribute]
        per_class = [list(values[conf_groups == g]) for g in groups]
        global_values = list(values)
        return class_of, per_class, global_values
    table = release.table
    if release.partition is None:
        raise MissingPartition("attribute inference needs the release's class partition")
    if conf_attribute not in table.names:
        raise UnknownAttribute(conf_attribute)
    values = table.columns[conf_attribute]
    class_of = {}
    per_class = []
    for j, members in enumerate(release.partition):
        per_class.append([values[i] for i in members])
        for i in members:
            class_of[int(table.row_ids[i])] = j
    return class_of, per_class, list(values)


def attribute_inference_attack(
    release,
    conf_attribute: str,
    true_table: MicrodataTable,
) -> AttackReport:
    """Posterior inference of a confidential value from class membership.

    The adversary locates a target's equivalence class and reads off the
    class distribution of the confidential attribute. For every record the
    report compares the global prior of its true value against that class
    posterior. The worst class-vs-global distribution distance is included;
    homogeneous or skewed classes leak even when k-anonymity holds.
    """
    class_of, per_class, global_values = _class_value_lists(release, conf_attribute, true_table)
    truth = {int(r): v for r, v in zip(true_table.row_ids, true_table.columns[conf_attribute])}
    missing = [r for r in truth if r not in class_of]
    if missing:
        raise Misaligned(f"row id {missing[0]} has no class in the release")

    def mass(values, target):
        if not values:
            return 0.0
        key = str(target)
        return sum(1 for v in values if str(v) == key) / len(values)

    numeric = true_table.attribute(conf_attribute).is_numeric
    ground = ORDERED_NUMERIC if numeric else CATEGORICAL_UNIFORM
    support = sorted(set(float(v) for v in global_values)) if numeric else sorted(
        set(str(v) for v in global_values)
    )
    global_dist = Distribution.from_values(
        [float(v) if numeric else str(v) for v in global_values], support=support
    )
    class_emds = []
    for values in per_class:
        d = Distribution.from_values([float(v) if numeric else str(v) for v in values], support=support)
        class_emds.append(emd(d, global_dist, ground))

    priors, posteriors, gains = [], [], []
    for rid, true_value in truth.items():
        prior = mass(global_values, true_value)
        posterior = mass(per_class[class_of[rid]], true_value)
        priors.append(prior)
        posteriors.append(posterior)
        gains.append(posterior - prior)
    n = len(truth)
    return AttackReport(
        attack="attribute_inference",
        success_rate=float(np.mean(posteriors)),
        wilson=wilson_interval(int(round(sum(posteriors))), n),
        trials=n,
        baseline=float(np.mean(priors)),
        details={
            "mean_prior": float(np.mean(priors)),
            "mean_posterior": float(np.mean(posteriors)),
            "max_gain": float(max(gains)),
            "mean_gain": float(np.mean(gains)),
            "worst_class_emd": float(max(class_emds)),
            "per_class_emd": [float(e) for e in class_emds],
            "per_record": [
                {"row_id": rid, "prior": p, "posterior": q, "gain": g}
                for rid, p, q, g in zip(truth.keys(), priors, posteriors, gains)
            ],
        },
    )


# --------------------------------------------------------------------------
# membership inference
# --------------------------------------------------------------------------


def membership_inference_attack(
    mechanism: Callable,
    table_with: MicrodataTable,
    table_without: MicrodataTable,
    trials: int = 10_000,
    calibration: int = 10_000,
    bins: int = 64,
    rng_seed: int = 0,
) -> AttackReport:
    """Distinguish whether a target record was in the mechanism's input.

    The two tables must be neighbors (the target present versus absent). The
    adversary calibrates per-bin likelihood ratios from fresh mechanism runs
    on both worlds, then guesses the world of new outputs by which calibrated
    histogram is denser at the observed bin. Advantage is max(0, 2*acc - 1),
    an empirical lower bound on the distinguishability the mechanism allows.
    """
    if neighbor_relation(table_with, table_without) is None:
        raise NotNeighbors("membership inference requires neighboring tables")
    cal_in = np.asarray(mechanism(table_with, derive_rng(rng_seed, "attack", 0), calibration), float)
    cal_out = np.asarray(mechanism(table_without, derive_rng(rng_seed, "attack", 1), calibration), float)
    lo = float(min(cal_in.min(), cal_out.min()))
    hi = float(max(cal_in.max(), cal_out.max()))
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    h_in, _ = np.histogram(cal_in, bins=edges)
    h_out, _ = np.histogram(cal_out, bins=edges)
    guess_in = h_in >= h_out

    def bin_of(x):
        return np.clip(np.searchsorted(edges, x, side="right") - 1, 0, bins - 1)

    ev_in = np.asarray(mechanism(table_with, derive_rng(rng_seed, "attack", 2), trials), float)
    ev_out = np.asarray(mechanism(table_without, derive_rng(rng_seed, "attack", 3), trials), float)
    correct = int(guess_in[bin_of(ev_in)].sum()) + int((~guess_in[bin_of(ev_out)]).sum())
    total = 2 * trials
    accuracy = correct / total
    advantage = max(0.0, 2.0 * accuracy - 1.0)
    return AttackReport(
        attack="membership_inference",
        success_rate=accuracy,
        wilson=wilson_interval(correct, total),
        trials=total,
        baseline=0.5,
        details={
            "advantage": advantage,
            "calibration_runs": calibration,
            "bins": bins,
        },
    )


# --------------------------------------------------------------------------
# intersection across releases
# --------------------------------------------------------------------------


def intersection_attack(releases: Sequence[AnonymizedRelease]) -> AttackReport:
    """Intersect equivalence classes across several releases of one population.

    Each release may be k-anonymous on its own while the intersection of a
    record's classes shrinks to a singleton. Success counts records whose
    effective class, after intersecting all releases, is exactly themselves.
    """
    rels = list(releases)
    if len(rels) < 2:
        raise ValueError("intersection needs at least two releases")
    member_sets = []
    for r in rels:
        if r.partition is None:
            raise MissingPartition("intersection attack needs each release's partition")
        ids = np.asarray(r.table.row_ids)
        by_rid = {}
        for members in r.partition:
            group_ids = frozenset(int(ids[i]) for i in members)
            for i in members:
                by_rid[int(ids[i])] = group_ids
        member_sets.append(by_rid)
    universe = set(member_sets[0])
    for by_rid in member_sets[1:]:
        if set(by_rid) != universe:
            raise Misaligned("releases cover different record ids")
    effective = {}
    for rid in sorted(universe):
        cls = set(member_sets[0][rid])
        for by_rid in member_sets[1:]:
            cls &= by_rid[rid]
        effective[rid] = len(cls)
    sizes = list(effective.values())
    singletons = sum(1 for s in sizes if s == 1)
    n = len(sizes)
    return AttackReport(
        attack="intersection",
        success_rate=singletons / n,
        wilson=wilson_interval(singletons, n),
        trials=n,
        baseline=None,
        details={
            "n_releases": len(rels),
            "min_effective_anonymity": min(sizes),
            "mean_effective_anonymity": float(np.mean(sizes)),
            "per_record_effective": {str(r): s for r, s in effective.items()},
        },
    )


# --------------------------------------------------------------------------
# downcoding reconstruction
# --------------------------------------------------------------------------


def downcoding_attack(
    release: AnonymizedRelease,
    hierarchies: Mapping[str, GeneralizationHierarchy],
    max_candidates: int = 10**6,
) -> AttackReport:
    """Reconstruct information hidden by a minimality-seeking recoder.

    Applies only to releases produced by the exhaustive minimal recoder; the
    attack inverts that mechanism's own acceptance rule, so any other
    provenance raises NotMinimalMechanism. For each generalized cell the
    adversary keeps the leaf values under the released node for which the
    released scheme would still have been cell-minimal. Because the released
    label multiset is fixed, that acceptance test is independent across
    cells. A cell counts as (partially) recovered when its surviving set is a
    proper subset of the released node's leaves. Soundness: the true value
    always survives, since the mechanism accepted the release for it.
    """
    if release.provenance is None or release.provenance.mechanism != "minimal_generalization":
        found = None if release.provenance is None else release.provenance.mechanism
        raise NotMinimalMechanism(
            f"downcoding inverts the exhaustive minimal recoder; release came from {found!r}"
        )
    params = release.provenance.params or {}
    k = int(params["k"])
    scheme = params.get("scheme") or {}
    table = release.table
    qi = [str(n) for n in scheme.get("qi_order", table.qi_names)]
    for name in qi:
        if name not in hierarchies:
            raise UnknownAttribute(name)
    n = table.n_rows
    label_rows = [
        tuple(str(table.columns[name][i]) for name in qi) for i in range(n)
    ]
    counts = Counter(label_rows)

    cells = []
    for i in range(n):
        for a, name in enumerate(qi):
            h = hierarchies[name]
            label = label_rows[i][a]
            level = h.level_of_label(label)
            if level > 0:
                cells.append((i, a, name, label, level))

    recovered = 0
    cell_details = []
    for i, a, name, label, level in cells:
        h = hierarchies[name]
        leaves = h.leaves_under(label, limit=max_candidates)
        old_row = label_rows[i]
        survivors = []
        for leaf in leaves:
            minimal = True
            for lower in range(level):
                new_label = h.label(leaf, lower)
                new_row = old_row[:a] + (new_label,) + old_row[a + 1 :]
                if new_row == old_row:
                    minimal = False
                    break
                c_old = counts[old_row] - 1
                c_new = counts.get(new_row, 0) + 1
                if (c_old == 0 or c_old >= k) and c_new >= k:
                    minimal = False
                    break
            if minimal:
                survivors.append(leaf)
        proper = len(survivors) < len(leaves)
        recovered += proper
        cell_details.append(
            {
                "row_id": int(table.row_ids[i]),
                "attribute": name,
                "released": label,
                "level": level,
                "n_leaves": len(leaves),
                "inferred": sorted(survivors),
                "narrowed": proper,
            }
        )
    recovery = recovered / len(cells) if cells else 0.0
    return AttackReport(
        attack="downcoding",
        success_rate=recovery,
        wilson=wilson_interval(recovered, len(cells)) if cells else (0.0, 1.0),
        trials=len(cells),
        baseline=0.0,
        details={"k": k, "n_generalized_cells": len(cells), "cells": cell_details},
    )
