"""Fuzzy AHP with triangular fuzzy numbers (geometric-mean method).

Weights come from the row-wise fuzzy geometric mean, fuzzy normalisation,
centroid defuzzification ``(l + m + u) / 3`` and a final crisp
normalisation so they sum to one.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ValidationError

REL_TOL = 1e-9

# Saaty random consistency indices, n = 1..10.
RANDOM_INDEX = (0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49)

CRITERIA = ("cost", "power", "range", "delay", "capacity")
ALTERNATIVES = ("WiFi", "LoRa", "Bluetooth", "Zigbee", "LTE", "Z-Wave")


class TriangularFuzzy(NamedTuple):
    l: float
    m: float
    u: float

    def reciprocal(self) -> "TriangularFuzzy":
        return TriangularFuzzy(1.0 / self.u, 1.0 / self.m, 1.0 / self.l)


ONE = TriangularFuzzy(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class FuzzyMatrix:
    entries: np.ndarray  # shape (n, n, 3)
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 3:
            raise ValidationError(f"fuzzy matrix must be n x n x 3, got {arr.shape}")
        object.__setattr__(self, "entries", arr)
        if self.labels and len(self.labels) != arr.shape[0]:
            raise ValidationError("label count does not match matrix size")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> TriangularFuzzy:
        return TriangularFuzzy(*self.entries[i, j])

    def modal(self) -> np.ndarray:
        return self.entries[:, :, 1]

    @classmethod
    def from_upper(cls, n: int, upper: Mapping[tuple[int, int], Sequence[float]], labels=()) -> "FuzzyMatrix":
        """Build a reciprocal matrix from judgments above the diagonal (0-based pairs)."""
        arr = np.ones((n, n, 3))
        for (i, j), tfn in upper.items():
            t = TriangularFuzzy(*map(float, tfn))
            arr[i, j] = t
            arr[j, i] = t.reciprocal()
        return cls(arr, tuple(labels))

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "FuzzyMatrix":
        unknown = set(data) - {"labels", "entries"}
        if unknown:
            raise ValidationError(f"unknown fuzzy matrix keys: {sorted(unknown)}")
        return cls(np.asarray(data["entries"], dtype=float), tuple(data.get("labels", ())))


@dataclass(frozen=True)
class Ranking:
    items: tuple[tuple[str, float], ...]

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.items]

    @property
    def scores(self) -> list[float]:
        return [score for _, score in self.items]

    def top(self) -> str:
        return self.items[0][0]


def matrix_violations(m: FuzzyMatrix, rtol: float = REL_TOL) -> list[str]:
    out = []
    e = m.entries
    if not np.all(np.isfinite(e)):
        out.append("non-finite entry")
        return out
    for i in range(m.n):
        if not np.allclose(e[i, i], 1.0, rtol=rtol, atol=0.0):
            out.append(f"diagonal ({i},{i}) is {tuple(e[i, i])}, not (1,1,1)")
        for j in range(m.n):
            l, mid, u = e[i, j]
            if not (l <= mid <= u):
                out.append(f"entry ({i},{j}) not ordered l <= m <= u")
            if l <= 0:
                out.append(f"entry ({i},{j}) has non-positive lower bound")
            elif j > i:
                expected = (1.0 / u, 1.0 / mid, 1.0 / l)
                if not np.allclose(e[j, i], expected, rtol=rtol, atol=0.0):
                    out.append(f"entry ({j},{i}) is not the reciprocal of ({i},{j})")
    return out


def validate_matrix(m: FuzzyMatrix) -> bool:
    return not matrix_violations(m)


def _require_valid(m: FuzzyMatrix, what: str = "matrix"):
    problems = matrix_violations(m)
    if problems:
        raise ValidationError(f"invalid {what}: " + "; ".join(problems))


def fuzzy_weights(m: FuzzyMatrix) -> np.ndarray:
    _require_valid(m)
    e = m.entries
    # Row geometric means per component, computed in log space.
    geo = np.exp(np.log(e).mean(axis=1))  # (n, 3) as (l, m, u)
    totals = geo.sum(axis=0)
    # Fuzzy division by the fuzzy total, (l / sum_u, m / sum_m, u / sum_l),
    # then the centroid. Both are taken times 3 * sum_m, a common factor the
    # final normalisation removes, so equal rows stay bit-identical.
    crisp = geo[:, 0] * (totals[1] / totals[2]) + geo[:, 1] + geo[:, 2] * (totals[1] / totals[0])
    return crisp / crisp.sum()


def consistency_ratio(m: FuzzyMatrix) -> float:
    """Saaty consistency ratio of the modal (crisp) matrix; 0 for n <= 2."""
    a = m.modal()
    n = a.shape[0]
    if n <= 2:
        return 0.0
    lam_max = float(np.max(np.linalg.eigvals(a).real))
    ci = (lam_max - n) / (n - 1)
    ri = RANDOM_INDEX[n - 1] if n <= len(RANDOM_INDEX) else RANDOM_INDEX[-1]
    return ci / ri


def rank_alternatives(criteria_weights: Sequence[float], alt_matrices: Sequence[FuzzyMatrix],
                      names: Sequence[str] | None = None) -> Ranking:
    weights = np.asarray(criteria_weights, dtype=float)
    if len(alt_matrices) != weights.size:
        raise ValidationError(f"{weights.size} criteria weights but {len(alt_matrices)} alternative matrices")
    if not alt_matrices:
        raise ValidationError("no criteria")
    n_alt = alt_matrices[0].n
    if names is None:
        names = alt_matrices[0].labels or tuple(f"A{i + 1}" for i in range(n_alt))
    if len(names) != n_alt:
        raise ValidationError("name count does not match alternative count")
    scores = np.zeros(n_alt)
    for k, (w, mat) in enumerate(zip(weights, alt_matrices)):
        if mat.n != n_alt:
            raise ValidationError(f"criterion {k} matrix is {mat.n}x{mat.n}, expected {n_alt}x{n_alt}")
        if mat.labels and names and tuple(mat.labels) != tuple(names):
            raise ValidationError(f"criterion {k} lists alternatives in a different order")
        _require_valid(mat, f"alternative matrix {k}")
        scores += w * fuzzy_weights(mat)
    scores = scores / scores.sum()
    # Stable sort keeps input order on ties.
    order = sorted(range(n_alt), key=lambda i: -scores[i])
    return Ranking(tuple((names[i], float(scores[i])) for i in order))


def judgments_from_scores(scores: Sequence[float], labels=(), spread: float = 1.0) -> FuzzyMatrix:
    """Reciprocal fuzzy matrix from 1-9 performance scores.

    A score gap g >= 0 becomes the judgment ``(max(1, 1+g-spread), 1+g, min(9, 1+g+spread))``
    for the better alternative and its reciprocal for the other; equal
    scores give (1, 1, 1).
    """
    s = [float(x) for x in scores]
    upper = {}
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            gap = abs(s[i] - s[j])
            if gap == 0:
                t = ONE
            else:
                mid = min(9.0, 1.0 + gap)
                t = TriangularFuzzy(max(1.0, mid - spread), mid, min(9.0, mid + spread))
            upper[(i, j)] = t if s[i] >= s[j] else t.reciprocal()
    return FuzzyMatrix.from_upper(len(s), upper, labels)


# Performance on a 1-9 scale where higher is better (cheaper, lower power,
# longer range, lower delay, more capacity).
DEFAULT_CRITERIA_SCORES = {"cost": 6, "power": 5, "range": 4, "delay": 3, "capacity": 2}
DEFAULT_ALTERNATIVE_SCORES = {
    #            WiFi LoRa BT Zigbee LTE Z-Wave
    "cost":     (8,   6,   7,  5,     3,  4),
    "power":    (3,   8,   8,  9,     3,  8),
    "range":    (5,   8,   1,  5,     9,  2),
    "delay":    (7,   1,   7,  4,     9,  6),
    "capacity": (7,   7,   4,  6,     8,  5),
}


def default_model() -> tuple[FuzzyMatrix, list[FuzzyMatrix]]:
    criteria = judgments_from_scores([DEFAULT_CRITERIA_SCORES[c] for c in CRITERIA], CRITERIA)
    alts = [judgments_from_scores(DEFAULT_ALTERNATIVE_SCORES[c], ALTERNATIVES) for c in CRITERIA]
    return criteria, alts


def rank_model(criteria: FuzzyMatrix, alt_matrices: Sequence[FuzzyMatrix], cr_limit: float = 0.1) -> Ranking:
    """Rank a full model, warning about any matrix whose consistency ratio exceeds ``cr_limit``."""
    for label, mat in [("criteria", criteria)] + [(f"criterion {k}", m) for k, m in enumerate(alt_matrices)]:
        cr = consistency_ratio(mat)
        if cr > cr_limit:
            warnings.warn(f"{label} matrix consistency ratio {cr:.3f} exceeds {cr_limit}", stacklevel=2)
    return rank_alternatives(fuzzy_weights(criteria), alt_matrices)


def save_model(path, criteria: FuzzyMatrix, alt_matrices: Sequence[FuzzyMatrix]) -> None:
    data = {"criteria": criteria.to_json(), "alternatives": [m.to_json() for m in alt_matrices]}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def model_from_json(data: Mapping) -> tuple[FuzzyMatrix, list[FuzzyMatrix]]:
    unknown = set(data) - {"criteria", "alternatives"}
    if unknown:
        raise ValidationError(f"unknown model keys: {sorted(unknown)}")
    return FuzzyMatrix.from_json(data["criteria"]), [FuzzyMatrix.from_json(m) for m in data["alternatives"]]


def load_model(path) -> tuple[FuzzyMatrix, list[FuzzyMatrix]]:
    return model_from_json(json.loads(Path(path).read_text()))
