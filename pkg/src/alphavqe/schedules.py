"""Measurement schedules and closed-form measurement/depth trade-off laws.

A schedule maps the current belief N(mu, sigma^2) to the next circuit setting.
All schedules here pick theta = mu - sigma and differ only in the repetition
count m:

* AlphaQPE           m = a (1/sigma)^alpha, alpha in [0, 1].  alpha = 0 is
                     statistical sampling, alpha = 1 full phase estimation.
* RFPE               m = ceil(1.25 / sigma).
* BetaQPE            m = min(ceil(scale / sigma), d_max); rides the depth
                     budget once reached.
* StatisticalSampling  m = 1.

The number of measurements needed to shrink the expected deviation from 1 to
epsilon under AlphaQPE is (natural logs throughout)

    f(epsilon, alpha) = (2 / (1 - alpha)) (epsilon^(-2 (1 - alpha)) - 1)   alpha < 1
    f(epsilon, 1)     = 4 log(1 / epsilon)

and a coherence-depth budget D on m caps the useful exponent at
alpha_max = min(log(D) / log(1/epsilon), 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes import ExperimentSetting, NormalBelief, variance_gain

__all__ = [
    "AlphaQPE",
    "RFPE",
    "BetaQPE",
    "StatisticalSampling",
    "SchedulePolicy",
    "next_setting",
    "predicted_iterations",
    "alpha_max",
    "n_min",
    "n_min_restarts",
    "analytic_risk_curve",
    "DepthReport",
    "depth_accounting",
]


def _check_depth_cap(depth_cap) -> None:
    if depth_cap is not None and not depth_cap >= 1.0:
        raise ValueError(f"depth_cap must be >= 1, got {depth_cap}")


@dataclass(frozen=True)
class AlphaQPE:
    """m = scale * (1/sigma)^alpha, optionally clamped to depth_cap."""

    alpha: float
    scale: float = 1.0
    depth_cap: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        _check_depth_cap(self.depth_cap)

    def raw_m(self, sigma: float) -> float:
        return self.scale * sigma ** (-self.alpha)


@dataclass(frozen=True)
class RFPE:
    """m = ceil(scale / sigma) with the customary scale 1.25."""

    scale: float = 1.25
    depth_cap: float | None = None

    def __post_init__(self) -> None:
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        _check_depth_cap(self.depth_cap)

    def raw_m(self, sigma: float) -> float:
        return float(np.ceil(self.scale / sigma))


@dataclass(frozen=True)
class BetaQPE:
    """m = min(ceil(scale / sigma), d_max); scale 1.25 offered as an option."""

    d_max: float
    scale: float = 1.0
    depth_cap: float | None = None

    def __post_init__(self) -> None:
        if not self.d_max >= 1.0:
            raise ValueError(f"d_max must be >= 1, got {self.d_max}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        _check_depth_cap(self.depth_cap)

    def raw_m(self, sigma: float) -> float:
        return min(float(np.ceil(self.scale / sigma)), float(self.d_max))


@dataclass(frozen=True)
class StatisticalSampling:
    """m = 1 always; precision comes from repetition alone."""

    depth_cap: float | None = None

    def raw_m(self, sigma: float) -> float:
        return 1.0


SchedulePolicy = AlphaQPE | RFPE | BetaQPE | StatisticalSampling


def next_setting(policy: SchedulePolicy, belief: NormalBelief) -> ExperimentSetting:
    """Next circuit setting under the policy: its m rule plus theta = mu - sigma."""
    m = policy.raw_m(belief.sigma)
    if policy.depth_cap is not None:
        m = min(m, float(policy.depth_cap))
    return ExperimentSetting(m=m, theta=belief.mu - belief.sigma)


def predicted_iterations(epsilon: float, alpha: float) -> float:
    """Measurements to contract the expected deviation from 1 to epsilon.

    Continuous in alpha: the alpha -> 1 limit of the alpha < 1 branch equals
    the alpha = 1 value 4 log(1/epsilon).
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    log_inv = np.log(1.0 / epsilon)
    if alpha == 1.0:
        return float(4.0 * log_inv)
    return float(2.0 / (1.0 - alpha) * np.expm1(2.0 * (1.0 - alpha) * log_inv))


def alpha_max(epsilon: float, d_max: float) -> float:
    """Largest exponent whose final repetition count stays within the depth budget."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not d_max >= 1.0:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    return float(min(np.log(d_max) / np.log(1.0 / epsilon), 1.0))


def n_min(epsilon: float, d_max: float) -> float:
    """Fewest measurements to reach epsilon with every m <= d_max (single run)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not d_max >= 1.0:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    log_inv = np.log(1.0 / epsilon)
    if d_max < 1.0 / epsilon:
        beta = np.log(d_max) / log_inv
        return float(2.0 / (1.0 - beta) * ((1.0 / (epsilon * d_max)) ** 2 - 1.0))
    return float(4.0 * log_inv)


def n_min_restarts(epsilon: float, d_max: float) -> float:
    """Fewest measurements when the exponent may be raised across restarts.

    Run alpha = 1 until the repetition count would exceed d_max, then hold m
    at the budget (alpha = 0 scaling) for the remainder.  Never larger than
    `n_min`, with equality exactly when d_max >= 1/epsilon.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not d_max >= 1.0:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    log_inv = np.log(1.0 / epsilon)
    if d_max < 1.0 / epsilon:
        return float(2.0 * ((1.0 / (epsilon * d_max)) ** 2 - 1.0) + 4.0 * np.log(d_max))
    return float(4.0 * log_inv)


def analytic_risk_curve(k, k0: float, r_k0: float, alpha: float, scale: float = 1.0):
    """Expected posterior deviation r_k continued from the anchor (k0, r_k0).

    For alpha < 1 the logistic-style closed form

        log r_k = log r_k0 - log(1 + r_k0^(2(1-alpha)) (1-alpha)/2 (k - k0))
                              / (2 (1 - alpha))

    is used; for alpha = 1 each measurement contracts the deviation by the
    exact factor sqrt(1 - variance_gain(scale)).  Accepts scalar or array k.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < k0):
        raise ValueError("k must be >= k0")
    if not 0.0 < r_k0 <= 1.0:
        raise ValueError(f"r_k0 must lie in (0, 1], got {r_k0}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 1.0:
        contraction = 1.0 - variance_gain(scale)
        out = r_k0 * contraction ** (0.5 * (k - k0))
    else:
        two_1ma = 2.0 * (1.0 - alpha)
        log_r = np.log(r_k0) - np.log1p(r_k0**two_1ma * (1.0 - alpha) / 2.0 * (k - k0)) / two_1ma
        out = np.exp(log_r)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DepthReport:
    """Resource ledger for a trace, in units of one base-operator application.

    The rounded fields use the circuit-mode repetition counts max(1, round(m));
    the raw fields keep the schedule's real-valued m.
    """

    n_measurements: int
    max_m: float
    max_m_rounded: int
    max_depth: float
    max_depth_rounded: float
    total_depth: float
    total_depth_rounded: float


def depth_accounting(trace, depth_of_u: float) -> DepthReport:
    """Summarize measurement count and coherent depth for an estimation trace."""
    if not trace.rows:
        raise ValueError("cannot account for an empty trace")
    if not depth_of_u > 0.0:
        raise ValueError(f"depth_of_u must be positive, got {depth_of_u}")
    ms = np.array([row.m for row in trace.rows], dtype=float)
    ms_rounded = np.maximum(1, np.rint(ms)).astype(int)
    return DepthReport(
        n_measurements=len(trace.rows),
        max_m=float(ms.max()),
        max_m_rounded=int(ms_rounded.max()),
        max_depth=float(ms.max() * depth_of_u),
        max_depth_rounded=float(ms_rounded.max() * depth_of_u),
        total_depth=float(ms.sum() * depth_of_u),
        total_depth_rounded=float(ms_rounded.sum() * depth_of_u),
    )
