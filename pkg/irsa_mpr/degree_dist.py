"""
degree_dist.py
--------------
Node- and edge-perspective degree distributions and their polynomial
calculus.

A node-perspective distribution Lambda(x) = sum_r Lambda_r x^r gives the
probability that a user transmits r replicas. The edge perspective
lambda(x) = Lambda'(x) / Lambda'(1) is what density evolution consumes.

Distribution file format:
    {"entries": [{"degree": 2, "prob": 0.5}, {"degree": 3, "prob": 0.28}, ...]}
"""

from __future__ import annotations

# std modules
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as P

# universal imports
from utils.config import logger

# local imports
from errors import DegenerateDistributionError, FileAccessError, DomainError, ValidationError

# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------

SUM_TOLERANCE       = 1e-12   # probabilities must sum to 1 within this
NORMALIZE_TOLERANCE = 1e-6    # beyond SUM_TOLERANCE but within this: renormalise
MAX_DEGREE          = 64


def _check_unit_interval(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"argument must lie in [0, 1], got {x!r}")
    return arr


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeDistribution:
    """
    Sparse degree -> probability map, immutable after construction.

    Build with `DegreeDistribution.from_entries(...)`; the raw constructor
    expects degrees sorted ascending and already normalised.
    """
    degrees: tuple[int, ...]
    probs:   tuple[float, ...]
    _coef:   np.ndarray = field(init=False, repr=False, compare=False)
    _dcoef:  np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.degrees) == 0 or len(self.degrees) != len(self.probs):
            raise ValidationError("distribution needs matching, non-empty degree and probability lists")
        if list(self.degrees) != sorted(set(self.degrees)):
            raise ValidationError(f"degrees must be unique and ascending: {self.degrees}")
        if self.degrees[0] < 1 or self.degrees[-1] > MAX_DEGREE:
            raise ValidationError(f"degrees must lie in [1, {MAX_DEGREE}]: {self.degrees}")
        if any(not (0.0 < p <= 1.0) for p in self.probs):
            raise ValidationError(f"stored probabilities must lie in (0, 1]: {self.probs}")
        total = sum(self.probs)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")

        coef = np.zeros(self.degrees[-1] + 1)
        coef[list(self.degrees)] = self.probs
        object.__setattr__(self, "_coef", coef)
        object.__setattr__(self, "_dcoef", P.polyder(coef))

    @classmethod
    def from_entries(
        cls,
        entries: Mapping[int, float] | Iterable[tuple[int, float]],
        min_degree: int = 1,
    ) -> "DegreeDistribution":
        """
        Validate and build a distribution from degree/probability pairs.

        Zero-probability entries are dropped. A total within 1e-6 of one is
        renormalised with a warning; anything further off is rejected.
        """
        pairs = list(entries.items()) if isinstance(entries, Mapping) else list(entries)

        seen: dict[int, float] = {}
        for degree, prob in pairs:
            if isinstance(degree, bool) or not isinstance(degree, (int, np.integer)):
                raise ValidationError(f"degree must be an integer, got {degree!r}")
            if isinstance(prob, bool) or not isinstance(prob, (int, float, np.floating)):
                raise ValidationError(f"probability for degree {degree} must be a number, got {prob!r}")
            degree = int(degree)
            prob = float(prob)
            if degree in seen:
                raise ValidationError(f"duplicate degree {degree}")
            if not np.isfinite(prob) or prob < 0.0 or prob > 1.0:
                raise ValidationError(f"probability for degree {degree} must lie in [0, 1], got {prob!r}")
            if degree < min_degree:
                raise ValidationError(f"degree {degree} is below the minimum of {min_degree}")
            seen[degree] = prob

        kept = {d: p for d, p in seen.items() if p > 0.0}
        if not kept:
            raise ValidationError("distribution has no positive-probability entries")

        total = sum(kept.values())
        drift = abs(total - 1.0)
        if drift > NORMALIZE_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total!r}; off by more than {NORMALIZE_TOLERANCE}")
        if drift > SUM_TOLERANCE:
            logger.warning(f"Probabilities sum to {total!r}; renormalising")
            kept = {d: p / total for d, p in kept.items()}

        degrees = tuple(sorted(kept))
        return cls(degrees=degrees, probs=tuple(kept[d] for d in degrees))

    @classmethod
    def regular(cls, degree: int) -> "DegreeDistribution":
        return cls.from_entries({degree: 1.0})

    # ── accessors ────────────────────────────────────────────────────────
    @property
    def min_degree(self) -> int:
        return self.degrees[0]

    @property
    def max_degree(self) -> int:
        return self.degrees[-1]

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.degrees, self.probs))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


@dataclass(frozen=True)
class EdgeView:
    """Edge-perspective distribution: lambda_r = r Lambda_r / Lambda'(1)."""
    degrees: tuple[int, ...]
    probs:   tuple[float, ...]

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.degrees, self.probs))

    def evaluate(self, x):
        """lambda(x) = sum_r lambda_r x^(r-1)."""
        arr = _check_unit_interval(x)
        coef = np.zeros(self.degrees[-1])
        coef[[d - 1 for d in self.degrees]] = self.probs
        return _scalar_or_array(P.polyval(arr, coef))


# ---------------------------------------------------------------------------
# Polynomial calculus
# ---------------------------------------------------------------------------

def evaluate(dist: DegreeDistribution, x):
    """Lambda(x) for scalar or array x in [0, 1]."""
    arr = _check_unit_interval(x)
    return _scalar_or_array(P.polyval(arr, dist._coef))


def derivative(dist: DegreeDistribution, x):
    """Lambda'(x) for scalar or array x in [0, 1]."""
    arr = _check_unit_interval(x)
    return _scalar_or_array(P.polyval(arr, dist._dcoef))


def mean_degree(dist: DegreeDistribution) -> float:
    return derivative(dist, 1.0)


def edge_perspective(dist: DegreeDistribution) -> EdgeView:
    mean = mean_degree(dist)
    if mean <= 0.0:
        raise DegenerateDistributionError("mean degree is zero; edge perspective undefined")
    return EdgeView(
        degrees=dist.degrees,
        probs=tuple(d * p / mean for d, p in zip(dist.degrees, dist.probs)),
    )


def node_perspective(edges: EdgeView, mean: float) -> DegreeDistribution:
    """Inverse of edge_perspective given the node-perspective mean degree."""
    if mean <= 0.0:
        raise DegenerateDistributionError("mean degree must be positive")
    return DegreeDistribution.from_entries(
        {d: lam * mean / d for d, lam in zip(edges.degrees, edges.probs)}
    )


# ---------------------------------------------------------------------------
# JSON files
# ---------------------------------------------------------------------------

def to_json_obj(dist: DegreeDistribution) -> dict:
    return {"entries": [{"degree": d, "prob": p} for d, p in zip(dist.degrees, dist.probs)]}


def parse_distribution(obj: object, min_degree: int = 2) -> DegreeDistribution:
    """
    Build a transmission distribution from the decoded JSON object.

    Transmission distributions default to min_degree 2: each user sends at
    least two replicas.
    """
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise ValidationError('distribution JSON must be an object with an "entries" array')

    pairs = []
    for i, entry in enumerate(obj["entries"]):
        if not isinstance(entry, dict) or "degree" not in entry or "prob" not in entry:
            raise ValidationError(f'entry {i} must have "degree" and "prob" fields')
        pairs.append((entry["degree"], entry["prob"]))
    return DegreeDistribution.from_entries(pairs, min_degree=min_degree)


def load_distribution(path: Path | str, min_degree: int = 2) -> DegreeDistribution:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as e:
        raise FileAccessError(f"Could not read distribution file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise FileAccessError(f"Distribution file {path} is not valid JSON: {e}") from e

    dist = parse_distribution(obj, min_degree=min_degree)
    logger.info(f"Loaded distribution from {path.name}: {dist.as_dict()}")
    return dist
