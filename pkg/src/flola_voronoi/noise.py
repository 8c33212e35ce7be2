"""Noise statistics for the exploitation score under Gaussian output noise.

Observed responses are ``y_i = f(p_i) + eps_i`` with ``eps_i ~ N(0, lam)``;
``lam`` is a variance throughout. The score computed from noisy responses
is bounded by the deterministic score plus ``X = sum_i |eps_i - eps_r|``
over the T neighbors. Each term ``zeta_i = |eps_i - eps_r|`` follows a
folded normal distribution with mean ``2*sqrt(lam/pi)`` and variance
``2*lam*(1 - 2/pi)``.

Closed forms vs. simulation
---------------------------
``noise_sum_mean_formula`` and ``noise_sum_variance_formula`` are the
closed-form expressions this toolkit reports for the moments of ``X``.
They are reproduced verbatim and are NOT consistent with the empirical
moments: linearity of expectation gives ``E[X] = T * 2*sqrt(lam/pi)``
(1.1284 at T=1, lam=1) while the closed form yields 0.6802, and the
variance expression subtracts a first moment where a squared one would be
dimensionally consistent (it even goes negative for lam below ~0.02).
``simulate_noise_sum`` is the Monte-Carlo reference; reports always show
both side by side so the gap stays visible rather than silently
reconciled.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class NoiseSumStats:
    """Moments of the noise-sum variable ``X`` at one ``(T, lam)`` cell.

    ``mean_se`` and ``variance_se`` are asymptotic standard errors of the
    Monte-Carlo estimates (zero for closed-form entries).
    """

    mean: float
    variance: float
    t: int
    lam: float
    draws: int = 0
    mean_se: float = 0.0
    variance_se: float = 0.0


def _check_lambda(lam):
    lam = float(lam)
    if lam < 0 or not math.isfinite(lam):
        raise ConfigError("noise variance lambda must be finite and >= 0")
    return lam


def _check_t(t):
    t = int(t)
    if t < 1:
        raise ConfigError("neighborhood size T must be >= 1")
    return t


def zeta_stats(lam):
    """Mean and variance of one noise term ``zeta = |eps_i - eps_r|``.

    ``eps_i - eps_r`` is N(0, 2*lam), so its absolute value is folded
    normal with mean ``2*sqrt(lam/pi)`` and variance ``2*lam*(1-2/pi)``.
    """
    lam = _check_lambda(lam)
    return 2.0 * math.sqrt(lam / math.pi), 2.0 * lam * (1.0 - 2.0 / math.pi)


def u_term(t):
    """Polynomial ``(t-1)^2 + 1`` appearing in the closed-form mean."""
    return float((_check_t(t) - 1) ** 2 + 1)


def v_term(t):
    """Polynomial ``t^2 - 2t + 2`` appearing in the closed-form variance."""
    t = _check_t(t)
    return float(t * t - 2 * t + 2)


def noise_sum_mean_formula(t, lam):
    """Closed-form mean reported for ``X``; see the module note on the gap
    to the empirical mean."""
    t = _check_t(t)
    lam = _check_lambda(lam)
    return (
        (2.0 / math.pi)
        * math.sqrt(lam * (math.pi - 2.0))
        * (t + (t - 1) * math.sqrt(u_term(t)))
    )


def noise_sum_variance_formula(t, lam):
    """Closed-form variance reported for ``X``; subtracts the closed-form
    mean, so it can go negative for very small ``lam``."""
    t = _check_t(t)
    lam = _check_lambda(lam)
    leading = 2.0 * lam * (math.pi - 2.0) * (4.0 * (t - 1) + 5.0 * math.pi * v_term(t))
    return leading / math.pi**2 - noise_sum_mean_formula(t, lam)


def simulate_noise_sum(t, lam, draws, seed) -> NoiseSumStats:
    """Monte-Carlo moments of ``X = sum_{i=1..T} |eps_i - eps_r|``.

    One shared ``eps_r`` per draw, all noise i.i.d. N(0, lam). The result
    is deterministic for a given seed. Standard errors use the sample
    fourth moment for the variance estimate.
    """
    t = _check_t(t)
    lam = _check_lambda(lam)
    draws = int(draws)
    if draws < 1:
        raise ConfigError("draws must be >= 1")
    rng = np.random.default_rng(seed)
    sd = math.sqrt(lam)
    eps_r = rng.normal(0.0, sd, size=draws)
    eps = rng.normal(0.0, sd, size=(draws, t))
    x = np.abs(eps - eps_r[:, None]).sum(axis=1)

    mean = float(x.mean())
    if draws < 2:
        return NoiseSumStats(mean, 0.0, t, lam, draws)
    variance = float(x.var(ddof=1))
    mean_se = math.sqrt(variance / draws)
    centered = x - mean
    m4 = float(np.mean(centered**4))
    var_of_var = (m4 - variance**2 * (draws - 3) / (draws - 1)) / draws
    variance_se = math.sqrt(max(var_of_var, 0.0))
    return NoiseSumStats(mean, variance, t, lam, draws, mean_se, variance_se)


def add_noise(value, lam, rng) -> float:
    """Perturb a response with N(0, lam) noise from the caller's generator.

    ``lam == 0`` returns the value unchanged without consuming the stream.
    """
    lam = _check_lambda(lam)
    value = float(value)
    if lam == 0.0:
        return value
    return value + rng.normal(0.0, math.sqrt(lam))
