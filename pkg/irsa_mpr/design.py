"""
design.py
---------
Exponential-approximation design of IRSA transmission distributions.

G Lambda'(p) is replaced by g(p) = exp(a p) - 1 in the stop condition. The
largest a keeping the approximated stop function strictly negative on
(0, 1) is a*; truncating the Taylor series of g at order L gives the
closed-form distribution

    Lambda_s = (a*^(s-1) / s!) / sum_{t=1}^{L} a*^t / (t+1)!,   s = 2..L+1

which decodes every load up to the same denominator.
"""

from __future__ import annotations

# std modules
from dataclasses import dataclass

import numpy as np

# universal imports
from utils.config import logger

# local imports
from degree_dist import DegreeDistribution
from density_evolution import EvolutionParams, stop_function_k2
from errors import ConvergenceError, DomainError, ValidationError

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

A_STAR       = 1.73
SCAN_POINTS  = 10_000
P_SCAN_UPPER = 1.0 - 1e-6
REFINE_STEPS = 60
FD_STEP      = 1e-7
MAX_A        = 100.0

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    epsilon_init:   float = 0.1
    epsilon_target: float = 0.01
    mpr:            int = 2

    # local-maximum scan
    scan_points:  int = SCAN_POINTS
    scan_upper:   float = P_SCAN_UPPER
    refine_steps: int = REFINE_STEPS
    fd_step:      float = FD_STEP

    def __post_init__(self):
        if not (0.0 < self.epsilon_target <= self.epsilon_init):
            raise ValidationError(
                f"need 0 < epsilon_target <= epsilon_init, got "
                f"{self.epsilon_target} and {self.epsilon_init}"
            )
        if int(self.mpr) != self.mpr or self.mpr < 1:
            raise ValidationError(f"K must be a positive integer, got {self.mpr!r}")
        if self.scan_points < 2 or self.refine_steps < 0:
            raise ValidationError(
                f"scan needs >= 2 points and >= 0 refine steps, got {self.scan_points} and {self.refine_steps}"
            )
        if not (0.0 < self.scan_upper < 1.0):
            raise ValidationError(f"scan upper end must lie in (0, 1), got {self.scan_upper!r}")
        if not self.fd_step > 0.0:
            raise ValidationError(f"finite-difference step must be positive, got {self.fd_step!r}")


@dataclass(frozen=True)
class DesignOutcome:
    a_star:     float
    truncation: int                  # L
    dist:       DegreeDistribution   # support {2, ..., L+1}
    load_bound: float                # sum_{t=1}^{L} a*^t / (t+1)!


@dataclass(frozen=True)
class StopCurve:
    p:       np.ndarray
    tilde_f: np.ndarray
    f:       np.ndarray


# ---------------------------------------------------------------------------
# Approximated stop function
# ---------------------------------------------------------------------------

def _check_p(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"p must lie in [0, 1), got {p!r}")
    return arr


def _check_a(a: float) -> None:
    if not a > 0.0:
        raise DomainError(f"a must be positive, got {a!r}")


def _out(arr: np.ndarray):
    return float(arr) if np.ndim(arr) == 0 else arr


def tilde_f_general(p, a: float, mpr: int):
    """e^{ap} - ln(sum_{k<K} (e^{ap} - 1)^k / k!) + ln(1 - p) - 1, any K."""
    arr = _check_p(p)
    _check_a(a)
    g = np.expm1(a * arr)
    term = np.ones_like(g)
    total = np.ones_like(g)
    for k in range(1, mpr):
        term = term * g / k
        total = total + term
    return _out(np.exp(a * arr) - np.log(total) + np.log1p(-arr) - 1.0)


def tilde_f(p, a: float, mpr: int = 2):
    """Approximated stop function; the K = 2 form is e^{ap} - ap + ln(1 - p) - 1."""
    if mpr != 2:
        return tilde_f_general(p, a, mpr)
    arr = _check_p(p)
    _check_a(a)
    return _out(np.exp(a * arr) - a * arr + np.log1p(-arr) - 1.0)


def tilde_f_prime_p(p, a: float):
    """d/dp of the K = 2 form: a e^{ap} - a - 1/(1 - p)."""
    arr = _check_p(p)
    _check_a(a)
    return _out(a * np.exp(a * arr) - a - 1.0 / (1.0 - arr))


def _slope(p, a: float, mpr: int, h: float = FD_STEP):
    if mpr == 2:
        return tilde_f_prime_p(p, a)
    arr = np.asarray(p, dtype=float)
    return _out((tilde_f_general(arr + h, a, mpr) - tilde_f_general(arr - h, a, mpr)) / (2.0 * h))


def max_local_maximum(
    a:            float,
    mpr:          int = 2,
    points:       int = SCAN_POINTS,
    upper:        float = P_SCAN_UPPER,
    refine_steps: int = REFINE_STEPS,
    fd_step:      float = FD_STEP,
) -> float | None:
    """
    Largest local-maximum value of tilde_f on (0, 1), or None when the
    function is monotone decreasing there.

    The slope is scanned on a uniform grid; every +/- sign change is refined
    by bisection on the slope. For K != 2 the slope is a central difference
    with step fd_step.
    """
    grid = np.linspace(0.0, upper, points + 2)[1:-1]
    slope = _slope(grid, a, mpr, fd_step)
    rising = slope > 0.0
    peaks = np.nonzero(rising[:-1] & ~rising[1:])[0]
    if peaks.size == 0:
        return None

    best = -np.inf
    for i in peaks:
        lo, hi = float(grid[i]), float(grid[i + 1])
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            if _slope(mid, a, mpr, fd_step) > 0.0:
                lo = mid
            else:
                hi = mid
        best = max(best, tilde_f(0.5 * (lo + hi), a, mpr))
    return float(best)


def _violates(a: float, config: SearchConfig) -> bool:
    # a local maximum touching zero counts as an intersection
    peak = max_local_maximum(
        a, config.mpr,
        points=config.scan_points,
        upper=config.scan_upper,
        refine_steps=config.refine_steps,
        fd_step=config.fd_step,
    )
    return peak is not None and peak >= 0.0


def find_a_star(config: SearchConfig = SearchConfig()) -> float:
    """
    Digit-by-digit search for the largest a keeping tilde_f < 0 on (0, 1).

    Step a up by eps until the maximal local maximum reaches zero, back off
    one step, divide eps by ten, and repeat while eps >= epsilon_target.
    The result is truncated at the epsilon_target digit.
    """
    a = 0.0
    eps = config.epsilon_init
    digits = 0

    while eps >= config.epsilon_target * (1.0 - 1e-9):
        digits = max(digits, int(round(-np.log10(eps))))
        while True:
            candidate = round(a + eps, digits + 2)
            if candidate > MAX_A:
                raise ConvergenceError(f"a-search exceeded a = {MAX_A} without a violation (K={config.mpr})")
            if _violates(candidate, config):
                break
            a = candidate
        logger.debug(f"a* digit fixed: a = {a} (eps = {eps})")
        eps /= 10.0

    a_star = round(a, digits + 2)
    logger.info(f"a* = {a_star} for K={config.mpr}, eps*={config.epsilon_target}")
    return a_star


# ---------------------------------------------------------------------------
# Truncated-exponential distribution
# ---------------------------------------------------------------------------

def _taylor_terms(a: float, truncation: int) -> np.ndarray:
    """a^t / (t+1)! for t = 1..L, built by the recurrence term_t = term_{t-1} a / (t+1)."""
    if int(truncation) != truncation or truncation < 1:
        raise ValidationError(f"truncation L must be a positive integer, got {truncation!r}")
    _check_a(a)
    terms = np.empty(truncation)
    term = a / 2.0
    for t in range(1, truncation + 1):
        terms[t - 1] = term
        term = term * a / (t + 2)
    return terms


def exponential_partial_sums(a: float, truncation: int) -> tuple[float, float]:
    """
    (S_L, D_L) with S_L = sum_{s=1}^{L} a^s / s! and D_L = sum_{t=1}^{L} a^t / (t+1)!.

    S_L / D_L is the mean degree of the truncated-exponential distribution and D_L its
    load bound.
    """
    terms = _taylor_terms(a, truncation)
    # a^t/t! = (t+1) * a^t/(t+1)!
    return float(np.sum(terms * np.arange(2, truncation + 2))), float(np.sum(terms))


def eq12_load_bound(a_star: float, truncation: int) -> float:
    return float(np.sum(_taylor_terms(a_star, truncation)))


def load_bound_limit(a_star: float) -> float:
    """L -> infinity limit of the load bound: (e^a - 1 - a) / a."""
    _check_a(a_star)
    return float((np.expm1(a_star) - a_star) / a_star)


def build_theorem1_dist(a_star: float, truncation: int) -> DegreeDistribution:
    terms = _taylor_terms(a_star, truncation)
    probs = terms / np.sum(terms)
    return DegreeDistribution(
        degrees=tuple(range(2, truncation + 2)),
        probs=tuple(float(x) for x in probs),
    )


def design_outcome(a_star: float, truncation: int) -> DesignOutcome:
    return DesignOutcome(
        a_star=a_star,
        truncation=truncation,
        dist=build_theorem1_dist(a_star, truncation),
        load_bound=eq12_load_bound(a_star, truncation),
    )


def stop_curve(a: float, truncation: int, points: int = 200, upper: float = 1.0 - 1e-9) -> StopCurve:
    """
    tilde_f(p) next to the exact K = 2 stop function f(p) of the truncated-exponential
    distribution operated at its load bound.
    """
    if points < 2:
        raise ValidationError(f"need at least 2 curve points, got {points}")
    outcome = design_outcome(a, truncation)
    params = EvolutionParams(load=outcome.load_bound, mpr=2, dist=outcome.dist)
    p = np.linspace(0.0, upper, points + 1)[1:]
    return StopCurve(p=p, tilde_f=tilde_f(p, a, 2), f=stop_function_k2(p, params))
