"""Time stepping for Caputo initial-value and right-sided adjoint problems.

Both solvers share one fractional Adams-Bashforth-Moulton march (product
rectangle predictor, one product-trapezoidal corrector pass, PECE).  The
backward solver runs the same march on the reflected time axis
``s = t0 + tf - t``, i.e. it solves the Volterra form

    p(t) = p(tf) + 1/Gamma(alpha) * int_t^tf (tau - t)**(alpha-1) rhs(tau, p(tau)) dtau

of the terminal-value problem.  When ``p(tf) = 0`` this coincides with the
right Riemann-Liouville problem; for a nonzero terminal value it keeps the
terminal value as a pointwise node value, so a component with zero
right-hand side stays constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from focpc import special_functions as sf
from focpc.errors import DivergenceError, DomainError
from focpc.grid import GridFunction, TimeGrid, check_order

__all__ = [
    "AdjointSpec",
    "DIVERGENCE_LIMIT",
    "IVPSpec",
    "linear_transition",
    "solve_adjoint_backward",
    "solve_caputo_ivp",
]

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12

VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IVPSpec:
    """``D_C^alpha x = rhs(t, x)`` on ``grid`` with ``x(t0) = x0``.

    ``rhs`` is assumed Lipschitz in ``x`` on the region the solution visits.
    """

    rhs: VectorField
    x0: np.ndarray
    grid: TimeGrid
    alpha: float


@dataclass(frozen=True)
class AdjointSpec:
    """Terminal-value problem ``D_right^alpha p = rhs(t, p)``, ``p(tf) = p_terminal``."""

    rhs: VectorField
    p_terminal: np.ndarray
    grid: TimeGrid
    alpha: float


def _as_vector(x0) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x0, dtype=float))
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise DomainError(f"initial/terminal value must be a finite vector, got {x0!r}")
    return v


def abm_march(
    rhs_at: Callable[[int, np.ndarray], np.ndarray],
    x0: np.ndarray,
    n_steps: int,
    h: float,
    alpha: float,
) -> np.ndarray:
    """Fractional Adams-Bashforth-Moulton PECE march on a uniform grid.

    ``rhs_at(k, x)`` evaluates the right-hand side at node ``k``.  Returns an
    array of shape ``(n_steps + 1, d)`` whose first row is ``x0``.
    """
    d = x0.shape[0]
    x = np.empty((n_steps + 1, d))
    f = np.empty((n_steps + 1, d))
    x[0] = x0
    f[0] = rhs_at(0, x0)

    m = np.arange(n_steps + 1, dtype=float)
    a1 = alpha + 1.0
    # predictor weight for lag m = n - j
    b = (m + 1.0) ** alpha - m**alpha
    # corrector weight for lag m >= 1 (j >= 1); index 0 unused
    c = np.concatenate(([0.0], (m[1:] + 1.0) ** a1 - 2.0 * m[1:] ** a1 + (m[1:] - 1.0) ** a1))
    pred_scale = h**alpha * sf.rgamma(alpha + 1.0)
    corr_scale = h**alpha * sf.rgamma(alpha + 2.0)

    for n in range(n_steps):
        hist = f[: n + 1]
        xp = x0 + pred_scale * (b[n::-1] @ hist)
        # corrector: j = 0 endpoint, j = 1..n interior (lag n+1-j), j = n+1 current
        a0 = n**a1 - (n - alpha) * (n + 1.0) ** alpha
        acc = a0 * hist[0]
        if n:
            acc = acc + c[n:0:-1] @ hist[1:]
        fp = rhs_at(n + 1, xp)
        xn = x0 + corr_scale * (acc + fp)
        if not np.all(np.isfinite(xn)) or np.max(np.abs(xn)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"solution norm exceeded {DIVERGENCE_LIMIT:g} at step {n + 1}"
            )
        x[n + 1] = xn
        f[n + 1] = rhs_at(n + 1, xn)
    return x


def solve_caputo_ivp(spec: IVPSpec) -> GridFunction:
    """March ``D_C^alpha x = rhs(t, x)`` forward from ``x0`` with ABM PECE."""
    alpha = check_order(spec.alpha)
    x0 = _as_vector(spec.x0)
    t = spec.grid.nodes

    def rhs_at(k, x):
        return np.asarray(spec.rhs(t[k], x), dtype=float).reshape(x0.shape)

    values = abm_march(rhs_at, x0, spec.grid.n_steps, spec.grid.h, alpha)
    return GridFunction(spec.grid, values)


def solve_adjoint_backward(spec: AdjointSpec) -> GridFunction:
    """Integrate the adjoint terminal-value problem backwards from ``tf``.

    ``alpha = 1`` reduces to ``-dp/dt = rhs``.  The terminal node holds
    ``p_terminal`` exactly.
    """
    alpha = check_order(spec.alpha)
    p_t = _as_vector(spec.p_terminal)
    t = spec.grid.nodes
    n = spec.grid.n_steps

    def rhs_at(k, p):
        return np.asarray(spec.rhs(t[n - k], p), dtype=float).reshape(p_t.shape)

    values = abm_march(rhs_at, p_t, n, spec.grid.h, alpha)
    return GridFunction(spec.grid, values[::-1])


def linear_transition(alpha: float, a: float, t: float, tau: float, tol: float = 1e-14) -> float:
    """Scalar fractional transition ``Phi_alpha(tau, t) = e_alpha(a, tau - t)`` for ``t < tau``.

    Singular at ``t = tau`` unless ``alpha = 1``, where it equals 1.
    """
    alpha = check_order(alpha)
    if t == tau and alpha == 1.0:
        return 1.0
    if not t < tau:
        raise DomainError(f"linear_transition needs t < tau, got t={t!r}, tau={tau!r}")
    return sf.alpha_exponential(alpha, a, tau - t, tol=tol)
