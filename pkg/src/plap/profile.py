"""Closed-form power-law far-field profile for pure-power instances.

When both radial weights are single powers, ``f_i(r) = c_i * r^(m_i)``, the
pure-power companion system (growth laws replaced by ``s^(k_j)``) admits an
exact solution pair

    u0(r) = C_lam * r^lam,      v0(r) = C_mu * r^mu,

whose exponents solve a 2x2 linear system and whose amplitudes follow from a
matching power balance.  Every positive increasing solution of the original
system approaches this profile in ratio as ``r -> inf``, which is what the
verification module measures.

The algebra rests on one identity: the radial p-Laplacian maps a pure power
to a pure power,

    Lp[C r^lam] = sign(lam C) |lam C|^(p-1) (lam (p-1) + n - p) r^((p-1) lam - p),

implemented by ``p_laplace_power``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .model import ValidatedSystem

__all__ = [
    "NotPurePowerCoefficients",
    "PowerProfile",
    "p_laplace_power",
    "solve_exponents",
    "solve_amplitudes",
    "solve_profile",
    "profile_eval",
    "profile_residual",
]

Scalar = Union[float, np.ndarray]


class NotPurePowerCoefficients(ValueError):
    """A closed-form profile needs single-power radial weights c * r^m."""


@dataclass(frozen=True)
class PowerProfile:
    """Exact far-field solution ``(C_lam r^lam, C_mu r^mu)`` of the companion system.

    ``b_lam = lam (p-1) + n - p`` and ``b_mu`` are the p-Laplace factors of the
    two powers; admissibility guarantees ``lam, mu > 1`` and hence both factors
    and both amplitudes are strictly positive.
    """

    lam: float
    mu: float
    c_lam: float
    c_mu: float
    b_lam: float
    b_mu: float


def p_laplace_power(coeff: float, lam: float, p: float, n: int) -> tuple[float, float]:
    """Radial p-Laplacian of ``coeff * r^lam`` as a single power of r.

    Returns ``(amplitude, exponent)`` with
    ``amplitude = sign(lam coeff) |lam coeff|^(p-1) (lam (p-1) + n - p)`` and
    ``exponent = (p-1) lam - p``.  The signed power keeps the formula valid
    for decreasing powers (negative ``lam * coeff``), e.g. the p-harmonic
    power ``r^((p-n)/(p-1))`` maps to amplitude zero.
    """
    q = lam * coeff
    amplitude = math.copysign(abs(q) ** (p - 1.0), q) * (lam * (p - 1.0) + n - p)
    exponent = (p - 1.0) * lam - p
    return amplitude, exponent


def _pure_power_weights(system: ValidatedSystem) -> tuple[float, float, float, float]:
    f1, f2 = system.params.f1, system.params.f2
    if not (f1.is_pure_power and f2.is_pure_power):
        raise NotPurePowerCoefficients(
            "closed-form profile requires single-term radial weights; got "
            f"{len(f1.terms)} term(s) in f1 and {len(f2.terms)} in f2"
        )
    (c1, m1), = f1.terms
    (c2, m2), = f2.terms
    if c1 <= 0.0 or c2 <= 0.0:
        raise NotPurePowerCoefficients("pure-power weights must have positive coefficients")
    return c1, m1, c2, m2


def solve_exponents(system: ValidatedSystem) -> tuple[float, float]:
    """Profile exponents (lam, mu) from the linear power-matching system.

    Matching powers of r on both sides of the two equations gives

        (p-1-alpha) lam - k1 mu = p - alpha + m1
        -k3 lam + (p-1-k2) mu   = p - k3 + m2

    whose determinant is the (positive) subcriticality margin.  Both solutions
    exceed 1 strictly for every admissible instance.
    """
    c1, m1, c2, m2 = _pure_power_weights(system)
    p, alpha = system.params.p, system.params.alpha
    k1, k2, k3 = system.k1, system.k2, system.k3
    det = (p - 1.0 - alpha) * (p - 1.0 - k2) - k1 * k3
    lam = ((p - alpha + m1) * (p - 1.0 - k2) + k1 * (p - k3 + m2)) / det
    mu = ((p - 1.0 - alpha) * (p + m2) + k3 * (1.0 + m1)) / det
    if not (lam > 1.0 and mu > 1.0):  # guaranteed algebraically; guard anyway
        raise ArithmeticError(f"profile exponents out of range: lam={lam}, mu={mu}")
    return lam, mu


def solve_amplitudes(system: ValidatedSystem, lam: float, mu: float) -> tuple[float, float]:
    """Profile amplitudes (C_lam, C_mu), computed in logarithmic form.

    Substituting the powers into the companion system couples the two
    amplitudes through

        (lam C_lam)^(p-1-alpha) = c1 / (mu^k1 b_lam) * (mu C_mu)^k1
        (mu  C_mu)^(p-1-k2)     = c2 / (mu^k2 b_mu)  * (lam C_lam)^k3

    a linear 2x2 system in the logarithms of ``lam C_lam`` and ``mu C_mu``.
    Solving in log space avoids overflow when the subcriticality margin is
    small and the amplitudes are extreme.
    """
    c1, m1, c2, m2 = _pure_power_weights(system)
    p, n, alpha = system.params.p, system.params.n, system.params.alpha
    k1, k2, k3 = system.k1, system.k2, system.k3
    b_lam = lam * (p - 1.0) + n - p
    b_mu = mu * (p - 1.0) + n - p
    e1 = math.log(c1) - k1 * math.log(mu) - math.log(b_lam)
    e2 = math.log(c2) - k2 * math.log(mu) - math.log(b_mu)
    det = (p - 1.0 - alpha) * (p - 1.0 - k2) - k1 * k3
    log_lc = ((p - 1.0 - k2) * e1 + k1 * e2) / det
    log_mc = ((p - 1.0 - alpha) * e2 + k3 * e1) / det
    return math.exp(log_lc) / lam, math.exp(log_mc) / mu


def solve_profile(system: ValidatedSystem) -> PowerProfile:
    """Exponents, amplitudes and p-Laplace factors of the far-field profile."""
    lam, mu = solve_exponents(system)
    c_lam, c_mu = solve_amplitudes(system, lam, mu)
    p, n = system.params.p, system.params.n
    return PowerProfile(
        lam=lam,
        mu=mu,
        c_lam=c_lam,
        c_mu=c_mu,
        b_lam=lam * (p - 1.0) + n - p,
        b_mu=mu * (p - 1.0) + n - p,
    )


def profile_eval(profile: PowerProfile, r: Scalar) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """Profile values and gradients ``(u0, v0, u0', v0')`` at radius ``r >= 0``.

    Both exponents exceed 1, so values and gradients vanish at the origin.
    """
    u0 = profile.c_lam * r**profile.lam
    v0 = profile.c_mu * r**profile.mu
    du0 = profile.lam * profile.c_lam * r ** (profile.lam - 1.0)
    dv0 = profile.mu * profile.c_mu * r ** (profile.mu - 1.0)
    return u0, v0, du0, dv0


def profile_residual(
    profile: PowerProfile,
    system: ValidatedSystem,
    r_samples: Sequence[float],
) -> float:
    """Worst relative defect of the profile in the companion system.

    For each sample radius and each equation the residual compares the
    p-Laplacian of the profile component against the right-hand side built
    from the profile itself.  Both sides are single signed powers of r, so the
    comparison is done through their logarithms:

        defect = |lhs - rhs| / max(|lhs|, |rhs|) = 1 - exp(-|log lhs - log rhs|)

    which is exact for positive sides and immune to overflow for large
    exponents.  A correct profile scores at rounding level; perturbing an
    amplitude by epsilon moves the residual to O(epsilon).
    """
    c1, m1, c2, m2 = _pure_power_weights(system)
    p, n, alpha = system.params.p, system.params.n, system.params.alpha
    k1, k2, k3 = system.k1, system.k2, system.k3
    lam, mu, c_lam, c_mu = profile.lam, profile.mu, profile.c_lam, profile.c_mu

    amp1, expo1 = p_laplace_power(c_lam, lam, p, n)
    amp2, expo2 = p_laplace_power(c_mu, mu, p, n)
    if amp1 <= 0.0 or amp2 <= 0.0:
        return math.inf  # not even the right sign structure

    log_r = np.log(np.asarray(r_samples, dtype=float))
    # first equation: c1 r^m1 * (v0)^k1 * (u0')^alpha
    log_lhs1 = math.log(amp1) + expo1 * log_r
    log_rhs1 = (
        math.log(c1)
        + k1 * math.log(c_mu)
        + alpha * math.log(lam * c_lam)
        + (m1 + mu * k1 + (lam - 1.0) * alpha) * log_r
    )
    # second equation: c2 r^m2 * (v0)^k2 * (u0')^k3
    log_lhs2 = math.log(amp2) + expo2 * log_r
    log_rhs2 = (
        math.log(c2)
        + k2 * math.log(c_mu)
        + k3 * math.log(lam * c_lam)
        + (m2 + mu * k2 + (lam - 1.0) * k3) * log_r
    )
    gap = max(
        float(np.max(np.abs(log_lhs1 - log_rhs1))),
        float(np.max(np.abs(log_lhs2 - log_rhs2))),
    )
    return -math.expm1(-gap)
