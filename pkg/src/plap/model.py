"""Problem definition and validation for coupled radial p-Laplace systems.

The systems handled by this package couple two positive radial unknowns
``(u, v)`` on a ball through the p-Laplace operator, a gradient power on the
first equation, and polynomial-type growth laws:

    div(|grad u|^(p-2) grad u) = f1(|x|) * g1(v) * |grad u|^alpha
    div(|grad v|^(p-2) grad v) = f2(|x|) * g2(v) * g3(|grad u|)

Both radial weights ``f1, f2`` and growth laws ``g1, g2, g3`` are finite sums
of nonnegative real powers with nonnegative coefficients.  Each growth law is
normalised so that its highest power enters with coefficient exactly one; the
exponent of that power is the law's *degree* ``k``.  Normalisation pins down
the far-field behaviour ``g(s)/s^k -> 1`` and, because every other exponent
lies in ``[0, k]``, gives two structural facts the comparison machinery
downstream relies on:

* ``g(s*t)/t^k`` is non-increasing in ``t`` for fixed ``s >= 1``, and
* ``g(t) >= t^k`` for every ``t >= 0``.

An instance is *admissible* when

    0 <= alpha < p - 1      (increasing positive solutions can exist at all)
    (p-1-alpha)*(p-1-k2) > k1*k3    (the coupling is subcritical)

with both inequalities strict.  ``validate_system`` enforces exactly these
two gates; the degenerate but useful case of constant ``g1`` or ``g2``
(degree zero) is accepted.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "MalformedNonlinearity",
    "GradientExponentTooLarge",
    "ExistenceConditionViolated",
    "CoefficientFunction",
    "Nonlinearity",
    "SystemParams",
    "ValidatedSystem",
    "validate_system",
    "eval_nonlinearity",
    "growth_quotient",
    "limiting_system",
    "system_from_config",
    "delta_constant",
]

Scalar = Union[float, "numpy.ndarray"]  # noqa: F821 - numpy only needed at call sites


class MalformedNonlinearity(ValueError):
    """A growth law violates the structural normalisation rules."""


class GradientExponentTooLarge(ValueError):
    """alpha >= p - 1: no non-constant increasing positive radial solution exists."""


class ExistenceConditionViolated(ValueError):
    """(p-1-alpha)*(p-1-k2) <= k1*k3: the coupled system is not subcritical."""


def _normalise_terms(terms: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    """Sort term pairs by exponent, merge exact duplicates, drop zero coefficients."""
    cleaned: dict[float, float] = {}
    for pair in terms:
        coeff, expo = float(pair[0]), float(pair[1])
        cleaned[expo] = cleaned.get(expo, 0.0) + coeff
    merged = tuple(
        (c, e) for e, c in sorted(cleaned.items(), key=lambda item: item[0]) if c != 0.0
    )
    return merged


@dataclass(frozen=True)
class CoefficientFunction:
    """Radial weight ``r -> sum_i c_i * r^(m_i)`` with ``c_i >= 0`` and ``m_i >= 0``.

    Nonnegative coefficients and exponents keep the weight continuous,
    non-decreasing and positive on (0, inf), which the monotonicity of the
    solutions rests on.  At least one coefficient must be positive.  The
    convention ``0^0 = 1`` applies, so a constant weight is ``[(c, 0)]``.
    """

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        merged = _normalise_terms(self.terms)
        if not merged:
            raise ValueError("coefficient function needs at least one positive term")
        for coeff, expo in merged:
            if coeff < 0.0:
                raise ValueError(f"negative coefficient {coeff} in radial weight")
            if expo < 0.0:
                raise ValueError(f"negative exponent {expo} in radial weight")
        object.__setattr__(self, "terms", merged)

    @classmethod
    def pure_power(cls, coeff: float = 1.0, expo: float = 0.0) -> "CoefficientFunction":
        return cls(((float(coeff), float(expo)),))

    @property
    def is_pure_power(self) -> bool:
        return len(self.terms) == 1

    def __call__(self, r: Scalar) -> Scalar:
        total = 0.0
        for coeff, expo in self.terms:
            total = total + coeff * r**expo
        return total


@dataclass(frozen=True)
class Nonlinearity:
    """Growth law ``s -> sum_i a_i * s^(e_i)`` normalised at its top power.

    Construction enforces: all coefficients nonnegative, all exponents
    nonnegative, and the term with the largest exponent (the *degree*) has
    coefficient exactly 1.  Terms sharing an exponent are merged first, and
    zero-coefficient terms are dropped.  A degree-zero law is the constant 1.
    """

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        merged = _normalise_terms(self.terms)
        if not merged:
            raise MalformedNonlinearity("growth law has no nonzero terms")
        for coeff, expo in merged:
            if coeff < 0.0:
                raise MalformedNonlinearity(f"negative coefficient {coeff} in growth law")
            if expo < 0.0:
                raise MalformedNonlinearity(f"negative exponent {expo} in growth law")
        if merged[-1][0] != 1.0:
            raise MalformedNonlinearity(
                f"leading coefficient must be exactly 1, got {merged[-1][0]} "
                f"at exponent {merged[-1][1]}"
            )
        object.__setattr__(self, "terms", merged)

    @classmethod
    def pure_power(cls, degree: float) -> "Nonlinearity":
        return cls(((1.0, float(degree)),))

    @property
    def degree(self) -> float:
        """The largest exponent k; governs the far-field growth g(s) ~ s^k."""
        return self.terms[-1][1]

    @property
    def is_constant(self) -> bool:
        return self.degree == 0.0

    def __call__(self, s: Scalar) -> Scalar:
        total = 0.0
        for coeff, expo in self.terms:
            total = total + coeff * s**expo
        return total

    def quotient(self, s: Scalar, t: Scalar) -> Scalar:
        """Evaluate ``g(s*t) / t^degree`` without forming the large products.

        Written as ``sum_i a_i * s^(e_i) * t^(e_i - k)`` every factor stays in
        range even when ``t`` is enormous.  For fixed ``s >= 1`` the result is
        non-increasing in ``t`` and tends to ``s^k`` as ``t -> inf``.
        """
        k = self.degree
        total = 0.0
        for coeff, expo in self.terms:
            total = total + coeff * s**expo * t ** (expo - k)
        return total


def eval_nonlinearity(g: Nonlinearity, s: Scalar) -> Scalar:
    """Value of the growth law at ``s >= 0`` (with the ``0^0 = 1`` convention)."""
    return g(s)


def growth_quotient(g: Nonlinearity, s: Scalar, t: Scalar) -> Scalar:
    """Overflow-safe ``g(s*t) / t^degree`` for ``s >= 1``, ``t > 0``."""
    return g.quotient(s, t)


@dataclass(frozen=True)
class SystemParams:
    """Scalar parameters and radial weights of one system instance.

    ``p > 1`` is the diffusion exponent, ``n >= 2`` the space dimension,
    ``alpha >= 0`` the gradient power on the first equation and ``r_max``
    the target radius of integration.
    """

    p: float
    n: int
    alpha: float
    f1: CoefficientFunction
    f2: CoefficientFunction
    r_max: float

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise ValueError(f"diffusion exponent p must exceed 1, got {self.p}")
        if isinstance(self.n, numbers.Real) and float(self.n) == int(self.n):
            object.__setattr__(self, "n", int(self.n))
        else:
            raise ValueError(f"dimension n must be an integer, got {self.n}")
        if self.n < 2:
            raise ValueError(f"dimension n must be at least 2, got {self.n}")
        if self.alpha < 0.0:
            raise ValueError(f"gradient exponent alpha must be >= 0, got {self.alpha}")
        if not self.r_max > 0.0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")


def delta_constant(p: float, n: int, alpha: float) -> float:
    """The weight exponent delta = (n-1)(p-1-alpha)/(p-1) of the first flux."""
    return (n - 1) * (p - 1.0 - alpha) / (p - 1.0)


@dataclass(frozen=True)
class ValidatedSystem:
    """A system instance that passed both admissibility gates.

    Carries the derived constant ``delta`` so downstream code never has to
    recompute it.  Degrees of the growth laws are exposed as ``k1, k2, k3``
    and the (strictly positive) subcriticality margin as ``existence_margin``.
    """

    params: SystemParams
    g1: Nonlinearity
    g2: Nonlinearity
    g3: Nonlinearity
    delta: float

    @property
    def k1(self) -> float:
        return self.g1.degree

    @property
    def k2(self) -> float:
        return self.g2.degree

    @property
    def k3(self) -> float:
        return self.g3.degree

    @property
    def existence_margin(self) -> float:
        p, alpha = self.params.p, self.params.alpha
        return (p - 1.0 - alpha) * (p - 1.0 - self.k2) - self.k1 * self.k3


def validate_system(
    params: SystemParams,
    g1: Nonlinearity,
    g2: Nonlinearity,
    g3: Nonlinearity,
) -> ValidatedSystem:
    """Check the two admissibility gates and return the validated instance.

    Raises ``GradientExponentTooLarge`` when ``alpha >= p - 1`` (beyond that
    threshold every positive increasing radial solution is constant, so there
    is nothing to integrate), and ``ExistenceConditionViolated`` when
    ``(p-1-alpha)*(p-1-k2) <= k1*k3`` (boundary included: the far-field
    profile degenerates there).  Structural defects of the growth laws are
    caught at construction time; constant ``g1``/``g2`` (degree zero) are
    legitimate degenerate couplings and are accepted.
    """
    p, alpha = params.p, params.alpha
    if alpha >= p - 1.0:
        raise GradientExponentTooLarge(
            f"gradient exponent alpha={alpha} >= p-1={p - 1.0}: in this regime no "
            "non-constant positive increasing radial solution exists"
        )
    margin = (p - 1.0 - alpha) * (p - 1.0 - g2.degree) - g1.degree * g3.degree
    if margin <= 0.0:
        raise ExistenceConditionViolated(
            f"(p-1-alpha)*(p-1-k2) - k1*k3 = {margin} must be strictly positive "
            f"(p={p}, alpha={alpha}, k1={g1.degree}, k2={g2.degree}, k3={g3.degree})"
        )
    return ValidatedSystem(
        params=params,
        g1=g1,
        g2=g2,
        g3=g3,
        delta=delta_constant(p, params.n, alpha),
    )


def limiting_system(system: ValidatedSystem) -> ValidatedSystem:
    """The pure-power companion: each growth law replaced by ``s^k``.

    Solutions of the original system converge to solutions of this companion
    in ratio; it is the natural comparison partner for trajectory ordering.
    """
    return validate_system(
        system.params,
        Nonlinearity.pure_power(system.k1),
        Nonlinearity.pure_power(system.k2),
        Nonlinearity.pure_power(system.k3),
    )


def _terms_from_config(raw: object, field: str) -> tuple[tuple[float, float], ...]:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ValueError(f"config field '{field}' must be a non-empty list of [coeff, expo] pairs")
    pairs = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValueError(f"config field '{field}' entries must be [coeff, expo] pairs")
        pairs.append((float(item[0]), float(item[1])))
    return tuple(pairs)


def system_from_config(cfg: Mapping) -> ValidatedSystem:
    """Build and validate a system from a plain configuration mapping.

    Expected fields: ``p``, ``n``, ``alpha``, ``r_max`` (numbers) and
    ``f1``, ``f2``, ``g1``, ``g2``, ``g3`` (lists of ``[coeff, expo]`` pairs).
    Raises ``ValueError`` subclasses on missing or malformed fields and the
    admissibility errors of ``validate_system`` on inadmissible parameters.
    """
    for field in ("p", "n", "alpha", "r_max", "f1", "f2", "g1", "g2", "g3"):
        if field not in cfg:
            raise ValueError(f"config field '{field}' is missing")
    params = SystemParams(
        p=float(cfg["p"]),
        n=cfg["n"],
        alpha=float(cfg["alpha"]),
        f1=CoefficientFunction(_terms_from_config(cfg["f1"], "f1")),
        f2=CoefficientFunction(_terms_from_config(cfg["f2"], "f2")),
        r_max=float(cfg["r_max"]),
    )
    return validate_system(
        params,
        Nonlinearity(_terms_from_config(cfg["g1"], "g1")),
        Nonlinearity(_terms_from_config(cfg["g2"], "g2")),
        Nonlinearity(_terms_from_config(cfg["g3"], "g3")),
    )
