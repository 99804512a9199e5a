"""
config.py
---------
Loads and exposes configuration for the IRSA toolkit.

Every default mirrors the published operating point (K = 2, a* = 1.73,
eps* = 0.01, L = 5, M = 1000, P_c = 0.1, sigma^2 = 1). Only run-control
values can be overridden from the environment; numerical constants are
fixed so results stay comparable between machines.
"""

# std modules
import sys
from dataclasses import dataclass
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent.resolve()))

# universal imports
from utils.config import default_threads, optional_env

# ---------------------------------------------------------------------------
# Environment variables  (all optional)
# ---------------------------------------------------------------------------

SEED       = optional_env("IRSA_SEED", 20240101, int)
TRIALS     = optional_env("IRSA_TRIALS", 200, int)
THREADS    = optional_env("IRSA_THREADS", default_threads(), int)
OUTPUT_DIR = optional_env("IRSA_OUTPUT_DIR", Path.cwd(), Path)

# ---------------------------------------------------------------------------
# Bundled data
# ---------------------------------------------------------------------------

BASE_DIR          = Path(__file__).parent.resolve()
DISTRIBUTIONS_DIR = BASE_DIR / "distributions"
MANIFESTS_DIR     = BASE_DIR / "manifests"

# ---------------------------------------------------------------------------
# Config dataclass  (frozen = immutable after construction)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Config:
    # Design
    mpr:            int     # K
    a_star:         float   # exponential parameter of the designed distribution
    epsilon_init:   float   # a* search initial step
    epsilon_target: float   # a* search target precision
    truncation:     int     # L, maximum repetition rate

    # Density evolution
    de_tol:           float
    de_max_iters:     int
    decode_tolerance: float  # p* below this counts as decodable
    bisection_steps:  int
    g_lo:             float
    g_tol:            float

    # Grid scans
    scan_points:  int
    refine_steps: int
    p_scan_upper: float
    fd_step:      float

    # Simulation
    num_users: int
    trials:    int
    seed:      int
    threads:   int

    # Energy
    p_tx:        float
    p_c:         float
    noise_power: float
    l_max:       int
    table_l_max: int

    # Paths
    output_dir:        Path
    distributions_dir: Path
    manifests_dir:     Path


def load_var() -> Config:
    return Config(
        mpr=2,
        a_star=1.73,
        epsilon_init=0.1,
        epsilon_target=0.01,
        truncation=5,

        de_tol=1e-12,
        de_max_iters=100_000,
        decode_tolerance=1e-6,
        bisection_steps=60,
        g_lo=1e-3,
        g_tol=1e-4,

        scan_points=10_000,
        refine_steps=60,
        p_scan_upper=1.0 - 1e-6,
        fd_step=1e-7,

        num_users=1000,
        trials=TRIALS,
        seed=SEED,
        threads=THREADS,

        p_tx=50.0,
        p_c=0.1,
        noise_power=1.0,
        l_max=20,
        table_l_max=7,

        output_dir=OUTPUT_DIR,
        distributions_dir=DISTRIBUTIONS_DIR,
        manifests_dir=MANIFESTS_DIR,
    )
