import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import gammaincc

from degree_dist import DegreeDistribution, derivative
from density_evolution import (
    EvolutionParams,
    asymptotic_throughput,
    certify_no_fixed_point,
    de_step,
    largest_root,
    poisson_tail_below,
    residual,
    run_evolution,
    stop_function_k2,
    threshold_report,
    threshold_search,
)
from errors import BracketError, DomainError, ValidationError


def random_dist(rng: np.random.Generator) -> DegreeDistribution:
    degrees = rng.choice(np.arange(2, 10), size=rng.integers(1, 4), replace=False)
    weights = rng.random(len(degrees)) + 0.05
    weights /= weights.sum()
    return DegreeDistribution.from_entries(dict(zip(degrees.tolist(), weights.tolist())))


def random_params(rng: np.random.Generator, mpr: int | None = None) -> EvolutionParams:
    return EvolutionParams(
        load=float(rng.uniform(0.1, 3.0)),
        mpr=int(rng.integers(1, 5)) if mpr is None else mpr,
        dist=random_dist(rng),
    )


# ---------------------------------------------------------------------------
# Single step
# ---------------------------------------------------------------------------

def test_de_step_at_one(regular2):
    assert de_step(1.0, EvolutionParams(0.5, 1, regular2)) == pytest.approx(1 - np.exp(-1), abs=1e-12)
    assert de_step(1.0, EvolutionParams(0.5, 2, regular2)) == pytest.approx(1 - 2 * np.exp(-1), abs=1e-12)


def test_de_step_at_zero_is_zero(lambda2):
    assert de_step(0.0, EvolutionParams(1.5, 2, lambda2)) == 0.0


def test_poisson_tail_matches_incomplete_gamma():
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = rng.uniform(0.0, 40.0)
        mpr = int(rng.integers(1, 30))
        assert float(poisson_tail_below(x, mpr)) == pytest.approx(gammaincc(mpr, x), rel=1e-9, abs=1e-300)


def test_invalid_params_rejected(regular2):
    with pytest.raises(ValidationError):
        EvolutionParams(load=0.0, mpr=2, dist=regular2)
    with pytest.raises(ValidationError):
        EvolutionParams(load=1.0, mpr=0, dist=regular2)


def test_stop_function_requires_k2(regular2):
    with pytest.raises(ValidationError):
        stop_function_k2(0.5, EvolutionParams(1.0, 3, regular2))
    with pytest.raises(DomainError):
        stop_function_k2(1.0, EvolutionParams(1.0, 2, regular2))


# ---------------------------------------------------------------------------
# Properties over random configurations
# ---------------------------------------------------------------------------

def test_de_step_is_monotone():
    rng = np.random.default_rng(11)
    grid = np.linspace(0.0, 1.0, 101)
    for _ in range(1000):
        values = de_step(grid, random_params(rng))
        assert np.all(np.diff(values) >= -1e-12)


def test_traces_are_nonincreasing():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        trace = run_evolution(random_params(rng), max_iters=200)
        assert trace.p_values[0] == 1.0
        assert np.all(np.diff(trace.p_values) <= 0.0)


def test_more_mpr_never_hurts():
    rng = np.random.default_rng(13)
    grid = np.linspace(0.0, 1.0, 51)
    for _ in range(1000):
        params = random_params(rng, mpr=int(rng.integers(1, 4)))
        stronger = EvolutionParams(params.load, params.mpr + 1, params.dist)
        assert np.all(de_step(grid, stronger) <= de_step(grid, params) + 1e-12)


def test_de_step_grows_with_load():
    rng = np.random.default_rng(15)
    grid = np.linspace(0.0, 1.0, 101)
    for _ in range(1000):
        params = random_params(rng)
        heavier = EvolutionParams(params.load + float(rng.uniform(0.01, 2.0)), params.mpr, params.dist)
        assert np.all(de_step(grid, params) <= de_step(grid, heavier) + 1e-12)


def test_collision_channel_recursion():
    rng = np.random.default_rng(16)
    grid = np.linspace(0.0, 1.0, 101)
    for _ in range(200):
        params = random_params(rng, mpr=1)
        expected = 1.0 - np.exp(-params.load * np.asarray(derivative(params.dist, grid)))
        np.testing.assert_allclose(de_step(grid, params), expected, rtol=0.0, atol=1e-15)


def test_stop_function_sign_matches_residual():

    rng = np.random.default_rng(14)
    grid = np.linspace(0.001, 0.999, 99)
    for _ in range(1000):
        params = random_params(rng, mpr=2)
        res = residual(grid, params)
        f = stop_function_k2(grid, params)
        clear = np.abs(res) > 1e-9
        assert np.all(np.sign(f[clear]) == -np.sign(res[clear]))


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------

def test_single_user_collision_channel_fixed_point(regular2):
    report = largest_root(EvolutionParams(1.0, 1, regular2))
    assert report.converged
    assert report.p_star == pytest.approx(0.79681, abs=1e-4)
    assert report.p_star == pytest.approx(1 - np.exp(-2 * report.p_star), abs=1e-9)
    assert report.plr == pytest.approx(report.p_star ** 2, abs=1e-12)
    assert not report.decodable


def test_truncated_exponential_decodes_below_bound(lambda1):
    report = largest_root(EvolutionParams(1.6, 2, lambda1))
    assert report.p_star < 1e-6
    assert report.decodable


def test_largest_root_matches_sign_scan(lambda2):
    params = EvolutionParams(1.65, 2, lambda2)
    report = largest_root(params)
    assert report.converged and not report.decodable

    grid = np.linspace(1e-6, 1.0, 1_000_000)
    last = np.nonzero(residual(grid, params) <= 0.0)[0][-1]
    # residual is positive above the largest root
    root = brentq(lambda q: residual(q, params), grid[last], grid[last + 1], xtol=1e-14)
    assert report.p_star == pytest.approx(root, abs=1e-6)



def test_throughput_equals_load_when_decodable(lambda1):
    assert asymptotic_throughput(EvolutionParams(1.2, 2, lambda1)) == pytest.approx(1.2, abs=1e-9)


def test_throughput_below_load_past_threshold(lambda1):
    assert asymptotic_throughput(EvolutionParams(2.0, 2, lambda1)) < 2.0


# ---------------------------------------------------------------------------
# Certification and threshold
# ---------------------------------------------------------------------------

def test_certificate_holds_just_below_threshold(lambda1):
    params = EvolutionParams(1.67, 2, lambda1)
    report = certify_no_fixed_point(params)
    assert report.certified
    assert report.min_residual > 0.0

    grid = np.linspace(1e-4, 1.0 - 1e-9, 10_000)
    assert np.all(stop_function_k2(grid, params) < 0.0)


def test_certificate_finds_roots_past_threshold(lambda2):
    report = certify_no_fixed_point(EvolutionParams(1.65, 2, lambda2))
    assert not report.certified
    assert report.roots


def test_truncated_exponential_threshold(lambda1):
    g_star = threshold_search(lambda1, 2, 1e-3)
    assert 1.66 <= g_star <= 1.69


def test_collision_channel_threshold(regular2):
    assert threshold_search(regular2, 1, 1e-3) == pytest.approx(0.5, abs=0.01)


def test_threshold_grows_with_mpr(regular2):
    assert threshold_search(regular2, 2, 1e-3) > 0.5


def test_threshold_report_brackets(lambda1):
    report = threshold_report(lambda1, 2, 1e-3)
    assert report.g_lo <= report.g_star <= report.g_hi
    assert report.g_hi - report.g_lo <= 1e-3
    assert report.below.decodable
    assert not report.above.decodable


def test_bad_bracket(regular2):
    with pytest.raises(BracketError):
        threshold_report(regular2, 1, 1e-3, g_hi=0.3)
    with pytest.raises(ValidationError):
        threshold_report(regular2, 1, 0.0)
