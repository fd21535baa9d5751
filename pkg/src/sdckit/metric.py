"""Mixed-attribute record distance shared by microaggregation and linkage.

Numeric attributes are z-scored (population standard deviation; constant
columns contribute zero) and compared by squared difference. Categorical
attributes contribute 0/1 per mismatch. All comparisons below work on
squared distances, which preserves nearest/farthest decisions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .microdata import MicrodataTable, canonical_number


def column_stats(columns: Sequence[np.ndarray]) -> tuple[float, float]:
    """Pooled mean and population std over one or more numeric columns."""
    pooled = np.concatenate([np.asarray(c, dtype=float) for c in columns])
    mean = float(pooled.mean())
    std = float(pooled.std())
    return mean, std


def zscore(col: np.ndarray, mean: float, std: float) -> np.ndarray:
    col = np.asarray(col, dtype=float)
    if std == 0.0:
        return np.zeros_like(col)
    return (col - mean) / std


@dataclass
class MixedSpace:
    """Rows of one table projected onto z-scored numeric and raw categorical blocks."""

    numeric: np.ndarray      # n x dn, z-scored
    categorical: np.ndarray  # n x dc, object (text)

    @classmethod
    def from_table(
        cls,
        table: MicrodataTable,
        attributes: Sequence[str],
        stats: Mapping[str, tuple[float, float]] | None = None,
    ) -> "MixedSpace":
        num_cols, cat_cols = [], []
        for name in attributes:
            attr = table.attribute(name)
            col = table.columns[name]
            if attr.is_numeric:
                mean, std = stats[name] if stats else column_stats([col])
                num_cols.append(zscore(col, mean, std))
            else:
                cat_cols.append(np.asarray([str(v) for v in col], dtype=object))
        n = table.n_rows
        numeric = np.column_stack(num_cols) if num_cols else np.zeros((n, 0))
        categorical = (
            np.column_stack(cat_cols) if cat_cols else np.empty((n, 0), dtype=object)
        )
        return cls(numeric=numeric, categorical=categorical)

    @property
    def n(self) -> int:
        return self.numeric.shape[0]

    def point(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.numeric[i], self.categorical[i]

    def centroid(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Numeric mean plus per-attribute mode (ties broken by smallest value)."""
        idx = np.asarray(indices, dtype=np.int64)
        num = self.numeric[idx].mean(axis=0) if self.numeric.shape[1] else np.zeros(0)
        modes = []
        for j in range(self.categorical.shape[1]):
            vals, counts = np.unique(self.categorical[idx, j].astype(str), return_counts=True)
            # deterministic: highest count, then lexicographically smallest value
            top = counts.max()
            modes.append(sorted(v for v, c in zip(vals, counts) if c == top)[0])
        cat = np.asarray(modes, dtype=object)
        return num, cat

    def sq_dist_to(self, num_point: np.ndarray, cat_point: np.ndarray, indices=None) -> np.ndarray:
        """Squared distances from every row (or a subset) to one point."""
        num = self.numeric if indices is None else self.numeric[indices]
        cat = self.categorical if indices is None else self.categorical[indices]
        d = np.zeros(num.shape[0])
        if num.shape[1]:
            d += ((num - num_point[None, :]) ** 2).sum(axis=1)
        for j in range(cat.shape[1]):
            d += (cat[:, j] != cat_point[j]).astype(float)
        return d


def cross_sq_dist(a: MixedSpace, b: MixedSpace) -> np.ndarray:
    """Squared distance matrix between the rows of two spaces over matching blocks."""
    if a.numeric.shape[1] != b.numeric.shape[1] or a.categorical.shape[1] != b.categorical.shape[1]:
        raise ValueError("spaces were built over different attribute sets")
    d = np.zeros((a.n, b.n))
    if a.numeric.shape[1]:
        diff = a.numeric[:, None, :] - b.numeric[None, :, :]
        d += (diff**2).sum(axis=2)
    for j in range(a.categorical.shape[1]):
        d += (a.categorical[:, j][:, None] != b.categorical[:, j][None, :]).astype(float)
    return d


def comparable_text(table: MicrodataTable, name: str) -> np.ndarray:
    """Column as canonical text, so masked label columns compare against raw numerics."""
    attr = table.attribute(name)
    col = table.columns[name]
    if attr.is_numeric:
        return np.asarray([canonical_number(v) for v in col], dtype=object)
    return np.asarray([str(v) for v in col], dtype=object)
