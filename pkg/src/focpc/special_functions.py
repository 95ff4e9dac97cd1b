"""Gamma, two-parameter Mittag-Leffler and alpha-exponential functions.

Only the power-series representation of the Mittag-Leffler function is
used, so evaluation is restricted to real arguments with ``|z| <= 50``.
Terms are accumulated in ascending order with :func:`math.fsum`, which
keeps the partial sums correctly rounded and makes repeated calls
bit-identical.

Conventions
-----------
``1/Gamma`` is taken to be zero at the poles ``0, -1, -2, ...``.  With
``beta = 0`` the ``n = 0`` term therefore vanishes and
``E_{1,0}(z) = z * exp(z)``.  With ``alpha = 0`` the series degenerates to
the geometric series ``sum z**n / Gamma(beta)`` which only converges for
``|z| < 1``.

The series converges for every ``z`` but its practical range depends on
``alpha``: small orders need many terms (``ConvergenceError`` once
``max_terms`` is exhausted), and large negative ``z`` suffers cancellation,
reported as ``ConvergenceError`` when the rounding error of the terms
exceeds ``CANCELLATION_LIMIT`` relative to ``max(1, |E|)``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from focpc.errors import ConvergenceError, DomainError
from focpc.grid import check_order

__all__ = [
    "MLParams",
    "CANCELLATION_LIMIT",
    "Z_MAX",
    "alpha_exponential",
    "gamma",
    "mittag_leffler",
    "rgamma",
]

#: Largest ``|z|`` accepted by :func:`mittag_leffler`.
Z_MAX = 50.0

#: Accepted rounding error of the summed terms, relative to ``max(1, |E|)``.
CANCELLATION_LIMIT = 1e-8


def gamma(x: float) -> float:
    """Euler gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma is only provided for x > 0, got {x!r}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma ``1/Gamma(x)``, zero at non-positive integers."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    if x > 0.0:
        return 1.0 / gamma(x)
    return 1.0 / math.gamma(x)


@dataclass(frozen=True)
class MLParams:
    """Parameters of ``E_{alpha,beta}`` and of its series truncation.

    ``tol`` is an absolute bound on the magnitude of the last retained
    term, ``max_terms`` caps the number of terms.
    """

    alpha: float
    beta: float = 1.0
    tol: float = 1e-14
    max_terms: int = 200

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise DomainError(f"alpha must be >= 0, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")
        if self.alpha == 0.0 and self.beta == 0.0:
            raise DomainError("alpha and beta cannot both be zero")
        if not self.tol > 0.0:
            raise DomainError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_terms) < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms!r}")


def _term(z: float, n: int, alpha: float, beta: float) -> float:
    arg = n * alpha + beta
    r = rgamma(arg)
    if r == 0.0 or z == 0.0:
        return r if n == 0 else 0.0
    try:
        return z**n * r
    except OverflowError:
        pass
    # z**n overflows before Gamma does: evaluate in log space
    mag = n * math.log(abs(z)) - math.lgamma(arg)
    if mag > 709.0:
        raise ConvergenceError(
            f"Mittag-Leffler term n={n} overflows for z={z!r}, alpha={alpha!r}"
        )
    sign = -1.0 if (z < 0.0 and n % 2 == 1) else 1.0
    return sign * math.exp(mag)


def mittag_leffler(params: MLParams, z: float) -> float:
    """Evaluate ``E_{alpha,beta}(z) = sum_n z**n / Gamma(n*alpha + beta)``.

    Summation stops at the first term (not at a pole of Gamma) whose
    magnitude drops below ``params.tol``; that term is included.

    Raises
    ------
    DomainError
        ``|z| > Z_MAX``, or ``alpha = 0`` with ``|z| >= 1``.
    ConvergenceError
        ``max_terms`` terms were summed without reaching ``tol``, or the
        sum is dominated by cancellation error.
    """
    z = float(z)
    if not math.isfinite(z) or abs(z) > Z_MAX:
        raise DomainError(f"mittag_leffler requires |z| <= {Z_MAX}, got {z!r}")
    alpha, beta = float(params.alpha), float(params.beta)
    if alpha == 0.0 and abs(z) >= 1.0:
        raise DomainError(
            f"E_(0,beta)(z) is a geometric series and diverges for |z| >= 1 (z={z!r})"
        )

    terms = []
    for n in range(int(params.max_terms)):
        t = _term(z, n, alpha, beta)
        terms.append(t)
        if abs(t) < params.tol and rgamma(n * alpha + beta) != 0.0:
            total = math.fsum(terms)
            noise = sys.float_info.epsilon * math.fsum(abs(x) for x in terms)
            if noise > CANCELLATION_LIMIT * max(1.0, abs(total)):
                raise ConvergenceError(
                    f"Mittag-Leffler series E_({alpha},{beta})({z}) loses significance "
                    f"(rounding error ~{noise:.1e} against value {total:.3e})"
                )
            return total
    raise ConvergenceError(
        f"Mittag-Leffler series E_({alpha},{beta})({z}) not converged "
        f"after {params.max_terms} terms (last term {terms[-1]:.3e})"
    )


def alpha_exponential(alpha: float, a: float, t: float, tol: float = 1e-14) -> float:
    """Scalar alpha-exponential ``t**(alpha-1) * E_{alpha,alpha}(a * t**alpha)``.

    For ``alpha = 1`` this is ``exp(a*t)``.  Requires ``t > 0``.
    """
    alpha = check_order(alpha)
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"alpha_exponential requires t > 0, got {t!r}")
    params = MLParams(alpha=alpha, beta=alpha, tol=tol)
    return t ** (alpha - 1.0) * mittag_leffler(params, a * t**alpha)
