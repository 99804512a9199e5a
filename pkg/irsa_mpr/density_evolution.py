"""
density_evolution.py
--------------------
Asymptotic SIC decoding recursion for IRSA under K-packet multi-packet
reception, its fixed points, and the load threshold G*.

One SIC iteration maps the unresolved-edge probability p to

    p' = 1 - exp(-x) * sum_{k<K} x^k / k!,    x = G * Lambda'(p)

i.e. the probability that a Poisson(x) number of interferers is K or more.
Iterating from p = 1 converges to the largest fixed point p*, and the
asymptotic packet loss rate is Lambda(p*).
"""

from __future__ import annotations

# std modules
from dataclasses import dataclass

import numpy as np

# universal imports
from utils.config import logger

# local imports
from degree_dist import DegreeDistribution, derivative, evaluate
from errors import BracketError, DomainError, ValidationError

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

DE_TOL           = 1e-12
DE_MAX_ITERS     = 100_000
DECODE_TOLERANCE = 1e-6
BISECTION_STEPS  = 60
G_LO             = 1e-3

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionParams:
    load: float             # G, packets per slot
    mpr:  int               # K
    dist: DegreeDistribution

    def __post_init__(self):
        if not (self.load > 0.0) or not np.isfinite(self.load):
            raise ValidationError(f"load must be positive, got {self.load!r}")
        if int(self.mpr) != self.mpr or self.mpr < 1:
            raise ValidationError(f"MPR capability K must be a positive integer, got {self.mpr!r}")


@dataclass(frozen=True)
class EvolutionTrace:
    p_values:   tuple[float, ...]   # p_0 = 1, p_1, ...
    converged:  bool
    iterations: int

    @property
    def final(self) -> float:
        return self.p_values[-1]


@dataclass(frozen=True)
class FixedPointReport:
    p_star:     float
    plr:        float
    decodable:  bool
    converged:  bool
    iterations: int


@dataclass(frozen=True)
class CertificateReport:
    min_residual: float
    argmin_p:     float
    roots:        tuple[float, ...]   # refined sign changes of the residual

    @property
    def certified(self) -> bool:
        return self.min_residual > 0.0 and not self.roots


@dataclass(frozen=True)
class ThresholdReport:
    g_star:        float
    g_lo:          float   # last decodable load
    g_hi:          float   # last non-decodable load
    steps:         int
    below:         FixedPointReport   # at g_star - g_tol
    above:         FixedPointReport   # at g_star + g_tol


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------

def poisson_tail_below(x, mpr: int):
    """
    P[Poisson(x) < K] = exp(-x) * sum_{k<K} x^k / k!, summed incrementally
    so large K never forms x^k or k! explicitly.
    """
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, mpr):
        term = term * x / k
        total = total + term
    return np.exp(-x) * total


def de_step(p, params: EvolutionParams):
    """One SIC iteration p_{i-1} -> p_i; scalar or array p in [0, 1]."""
    x = params.load * np.asarray(derivative(params.dist, p), dtype=float)
    out = np.clip(1.0 - poisson_tail_below(x, params.mpr), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def residual(p, params: EvolutionParams):
    """p - de_step(p); zero exactly at fixed points."""
    out = np.asarray(p, dtype=float) - de_step(p, params)
    return float(out) if np.ndim(out) == 0 else out


def stop_function_k2(p, params: EvolutionParams):
    """
    f(p) = G Lambda'(p) - ln(1 + G Lambda'(p)) + ln(1 - p), the K = 2 stop
    condition rewritten in log form. Negative wherever de_step(p) < p.
    """
    if params.mpr != 2:
        raise ValidationError(f"stop_function_k2 requires K = 2, got K = {params.mpr}")
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"stop function is defined for p in [0, 1), got {p!r}")

    x = params.load * np.asarray(derivative(params.dist, arr), dtype=float)
    out = x - np.log1p(x) + np.log1p(-arr)
    return float(out) if out.ndim == 0 else out


def _iterate(params: EvolutionParams, max_iters: int, tol: float, keep: bool):
    p = 1.0
    values = [p] if keep else None
    converged = False
    iterations = 0

    for iterations in range(1, max_iters + 1):
        # the true sequence is nonincreasing; rounding can jitter at the fixed point
        nxt = min(de_step(p, params), p)
        if keep:
            values.append(nxt)
        delta = p - nxt
        p = nxt
        if delta < tol:
            converged = True
            break

    return p, converged, iterations, values


def run_evolution(
    params:    EvolutionParams,
    max_iters: int = DE_MAX_ITERS,
    tol:       float = DE_TOL,
) -> EvolutionTrace:
    """Iterate de_step from p_0 = 1 until |p_i - p_{i-1}| < tol or max_iters."""
    if max_iters < 1:
        raise ValidationError(f"max_iters must be at least 1, got {max_iters}")
    if not tol > 0.0:
        raise ValidationError(f"tol must be positive, got {tol}")

    _, converged, iterations, values = _iterate(params, max_iters, tol, keep=True)
    if not converged:
        logger.warning(
            f"Density evolution did not converge in {max_iters} iterations "
            f"(G={params.load}, K={params.mpr})"
        )
    return EvolutionTrace(p_values=tuple(values), converged=converged, iterations=iterations)


def largest_root(
    params:           EvolutionParams,
    max_iters:        int = DE_MAX_ITERS,
    tol:              float = DE_TOL,
    decode_tolerance: float = DECODE_TOLERANCE,
) -> FixedPointReport:
    """
    Largest fixed point p* of the recursion and the asymptotic PLR Lambda(p*).

    Iterating from 1 reaches p* because de_step is monotone. When the
    iteration stalls at max_iters the last iterate is still an upper bound
    on p*, so it is reported with converged = False.
    """
    p_star, converged, iterations, _ = _iterate(params, max_iters, tol, keep=False)
    if not converged:
        logger.warning(
            f"Fixed-point iteration hit {max_iters} iterations at G={params.load}, "
            f"K={params.mpr}; reporting last iterate {p_star:.3g}"
        )
    return FixedPointReport(
        p_star=p_star,
        plr=evaluate(params.dist, p_star),
        decodable=p_star < decode_tolerance,
        converged=converged,
        iterations=iterations,
    )


def asymptotic_throughput(params: EvolutionParams, **kwargs) -> float:
    """T = G (1 - Lambda(p*))."""
    return params.load * (1.0 - largest_root(params, **kwargs).plr)


# ---------------------------------------------------------------------------
# Certification and threshold
# ---------------------------------------------------------------------------

def _bisect_sign_change(func, lo: float, hi: float, steps: int) -> float:
    f_lo = func(lo)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if (f_mid <= 0.0) == (f_lo <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def certify_no_fixed_point(
    params:       EvolutionParams,
    points:       int = 10_000,
    refine_steps: int = 50,
) -> CertificateReport:
    """
    Check that p - de_step(p) > 0 on a uniform grid over (0, 1].

    Every sign change between neighbouring grid points is refined by
    bisection and reported as a root.
    """
    grid = np.linspace(1.0 / points, 1.0, points)
    res = residual(grid, params)

    idx = int(np.argmin(res))
    positive = res > 0.0
    changes = np.nonzero(positive[:-1] != positive[1:])[0]
    roots = tuple(
        _bisect_sign_change(lambda q: residual(q, params), grid[i], grid[i + 1], refine_steps)
        for i in changes
    )
    if not positive[0]:
        roots = (float(grid[0]),) + roots

    return CertificateReport(min_residual=float(res[idx]), argmin_p=float(grid[idx]), roots=roots)


def threshold_report(
    dist:             DegreeDistribution,
    mpr:              int,
    g_tol:            float,
    g_lo:             float = G_LO,
    g_hi:             float | None = None,
    steps:            int = BISECTION_STEPS,
    max_iters:        int = DE_MAX_ITERS,
    tol:              float = DE_TOL,
    decode_tolerance: float = DECODE_TOLERANCE,
) -> ThresholdReport:
    """
    Bisection on G with decodability as the (monotone) predicate.

    Stops once the bracket is narrower than g_tol or after `steps` halvings.
    """
    if not g_tol > 0.0:
        raise ValidationError(f"g_tol must be positive, got {g_tol}")
    g_hi = float(mpr) if g_hi is None else g_hi

    def at_load(g: float) -> FixedPointReport:
        return largest_root(EvolutionParams(load=g, mpr=mpr, dist=dist), max_iters, tol, decode_tolerance)

    if not at_load(g_lo).decodable:
        raise BracketError(f"not decodable at the lower bracket G={g_lo}")
    if at_load(g_hi).decodable:
        raise BracketError(f"still decodable at the upper bracket G={g_hi}")
    logger.info(f"Threshold bisection on [{g_lo}, {g_hi}] for K={mpr}")

    lo, hi = g_lo, g_hi
    used = 0
    while used < steps and hi - lo > g_tol:
        mid = 0.5 * (lo + hi)
        if at_load(mid).decodable:
            lo = mid
        else:
            hi = mid
        used += 1

    g_star = 0.5 * (lo + hi)
    logger.info(f"Load threshold G* = {g_star:.6f} after {used} bisection steps")
    return ThresholdReport(
        g_star=g_star,
        g_lo=lo,
        g_hi=hi,
        steps=used,
        below=at_load(max(g_star - g_tol, g_lo)),
        above=at_load(g_star + g_tol),
    )


def threshold_search(dist: DegreeDistribution, mpr: int, g_tol: float, **kwargs) -> float:
    """Load threshold G*: decodable at G* - g_tol, not decodable at G* + g_tol."""
    return threshold_report(dist, mpr, g_tol, **kwargs).g_star
