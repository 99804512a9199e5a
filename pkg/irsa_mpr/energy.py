"""
energy.py
---------
Energy consumption and energy efficiency of the truncated-exponential distribution as a
function of its maximum repetition rate L.

With the frame sized for its design load (N = M / D_L), the per-user
energy per frame is

    E_L = P_tx (A_L + B_L * M P_c / P_tx),   A_L = S_L / D_L,   B_L = 1 / D_L

and the efficiency is log2(1 + P_tx / sigma^2) / E_L. E_{L+1} < E_L exactly
when the ladder value dA_L / |dB_L| is below r = M P_c / P_tx, so the optimum
L* is the first rung at or above r.
"""

from __future__ import annotations

# std modules
from dataclasses import dataclass

import numpy as np

# universal imports
from utils.config import logger

# local imports
from design import A_STAR, exponential_partial_sums
from errors import ValidationError

# ---------------------------------------------------------------------------
# Published ladder values (dA_L / |dB_L|, L = 1..7)
# ---------------------------------------------------------------------------

PUBLISHED_LADDER = (0.8649, 2.2298, 3.8042, 5.5065, 7.0526, 7.2, 9.0)

L_MAX = 20

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerModel:
    p_tx:        float   # W, transmit power per slot
    p_c:         float   # W, idle/circuit power per slot
    noise_power: float   # W, sigma^2
    num_users:   int     # M

    def __post_init__(self):
        if not self.p_tx > 0.0:
            raise ValidationError(f"p_tx must be positive, got {self.p_tx!r}")
        if not self.p_c >= 0.0:
            raise ValidationError(f"p_c must be non-negative, got {self.p_c!r}")
        if not self.noise_power > 0.0:
            raise ValidationError(f"noise power must be positive, got {self.noise_power!r}")
        if self.num_users < 1:
            raise ValidationError(f"need at least one user, got {self.num_users}")

    @property
    def ratio(self) -> float:
        """r = M P_c / P_tx."""
        return self.num_users * self.p_c / self.p_tx

    @property
    def rate(self) -> float:
        """log2(1 + P_tx / sigma^2), bits per slot per unit bandwidth."""
        return float(np.log2(1.0 + self.p_tx / self.noise_power))


@dataclass(frozen=True)
class EnergyProfile:
    truncation:  int     # L
    coeff_a:     float   # A_L
    coeff_b:     float   # B_L
    consumption: float   # E_L
    efficiency:  float   # Gamma_L


@dataclass(frozen=True)
class RepetitionChoice:
    l_star:    int
    saturated: bool   # ratio beyond the last rung checked

    def __int__(self) -> int:
        return self.l_star


@dataclass(frozen=True)
class EnergySweep:
    profiles: tuple[EnergyProfile, ...]
    choice:   RepetitionChoice


@dataclass(frozen=True)
class Table1Row:
    truncation:     int
    ratio:          float
    published:      float | None
    relative_delta: float | None


# ---------------------------------------------------------------------------
# Coefficients and energy
# ---------------------------------------------------------------------------

def coefficients(truncation: int, a_star: float = A_STAR) -> tuple[float, float]:
    """(A_L, B_L); A_L is the mean degree, B_L the inverse load bound."""
    s_l, d_l = exponential_partial_sums(a_star, truncation)
    return s_l / d_l, 1.0 / d_l


def slots_per_frame(truncation: int, num_users: int, a_star: float = A_STAR) -> float:
    """N_L = M / D_L, the frame length at the design load."""
    _, d_l = exponential_partial_sums(a_star, truncation)
    return num_users / d_l


def energy(truncation: int, model: PowerModel, a_star: float = A_STAR) -> float:
    coeff_a, coeff_b = coefficients(truncation, a_star)
    return model.p_tx * (coeff_a + coeff_b * model.ratio)


def efficiency(truncation: int, model: PowerModel, a_star: float = A_STAR) -> float:
    return model.rate / energy(truncation, model, a_star)


def profile(truncation: int, model: PowerModel, a_star: float = A_STAR) -> EnergyProfile:
    coeff_a, coeff_b = coefficients(truncation, a_star)
    consumption = model.p_tx * (coeff_a + coeff_b * model.ratio)
    return EnergyProfile(
        truncation=truncation,
        coeff_a=coeff_a,
        coeff_b=coeff_b,
        consumption=consumption,
        efficiency=model.rate / consumption,
    )


# ---------------------------------------------------------------------------
# Ladder and optimum
# ---------------------------------------------------------------------------

def delta_ratio(truncation: int, a_star: float = A_STAR) -> float:
    """dA_L / |dB_L| = sum_{i=1}^{L} a^i (L + 1 - i) / (i+1)!."""
    if int(truncation) != truncation or truncation < 1:
        raise ValidationError(f"L must be a positive integer, got {truncation!r}")
    total = 0.0
    term = a_star / 2.0
    for i in range(1, truncation + 1):
        total += term * (truncation + 1 - i)
        term = term * a_star / (i + 2)
    return total


def optimal_L(model: PowerModel, a_star: float = A_STAR, l_max: int = L_MAX) -> RepetitionChoice:
    """
    First L whose ladder value reaches r = M P_c / P_tx. A tie keeps the
    smaller L; r beyond the ladder at l_max saturates at l_max.
    """
    if l_max < 1:
        raise ValidationError(f"l_max must be at least 1, got {l_max}")
    r = model.ratio
    for truncation in range(1, l_max + 1):
        if delta_ratio(truncation, a_star) >= r:
            return RepetitionChoice(l_star=truncation, saturated=False)

    logger.warning(f"M*P_c/P_tx = {r:.4g} exceeds the ladder at L={l_max}; L* saturated")
    return RepetitionChoice(l_star=l_max, saturated=True)


def energy_sweep(model: PowerModel, a_star: float = A_STAR, l_max: int = L_MAX) -> EnergySweep:
    return EnergySweep(
        profiles=tuple(profile(truncation, model, a_star) for truncation in range(1, l_max + 1)),
        choice=optimal_L(model, a_star, l_max),
    )


def table1(a_star: float = A_STAR, l_max: int = 7) -> list[float]:
    return [delta_ratio(truncation, a_star) for truncation in range(1, l_max + 1)]


def table1_report(a_star: float = A_STAR, l_max: int = 7) -> list[Table1Row]:
    rows = []
    for truncation, ratio in enumerate(table1(a_star, l_max), start=1):
        published = PUBLISHED_LADDER[truncation - 1] if truncation <= len(PUBLISHED_LADDER) else None
        rows.append(Table1Row(
            truncation=truncation,
            ratio=ratio,
            published=published,
            relative_delta=None if published is None else (ratio - published) / published,
        ))
    return rows
