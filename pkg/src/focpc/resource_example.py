"""Resource-management benchmark with a closed-form optimal solution.

A resource ``x > 0`` grows as ``D_C^alpha x = u x``; the fraction ``1 - u``
not reinvested is harvested, and the harvest ``I^alpha ((1 - u) x)`` at
``T`` is maximised over ``u(t) in [0, 1]``.  The optimal control is
bang-bang: ``u* = 1`` (reinvest everything) before the switching time
``t* = T - Gamma(alpha + 1)**(1/alpha)`` and ``u* = 0`` afterwards.

With the augmented state ``(y, x)``, ``D_C^alpha y = (1 - u) x`` and cost
``-y(T)``, the adjoint of ``y`` is identically 1 and the adjoint ``p1`` of
``x`` is

* ``(T - t)**alpha / Gamma(alpha + 1)`` on ``[t*, T]``,
* ``e_alpha(1, t* - t)`` on ``[0, t*)``.

For ``alpha < 1`` the second branch blows up as ``t -> t*`` and does not
attain the value 1 there; it is only meaningful away from the switch.

:func:`analytic_state` holds ``x`` at its switch value on ``[t*, T]``.  That
is exact for ``alpha = 1``; for ``alpha < 1`` the Caputo memory makes the
true solution of ``D_C^alpha x = 0`` after a growth phase decay, so the
constant tail is a convention of the closed form, not a trajectory of the
dynamics.  Compare against solvers on ``[0, t*]`` only.

The growth rate in ``x* = x0 E_alpha(a t**alpha)`` is taken as ``a = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from focpc import special_functions as sf
from focpc.errors import DomainError, PreconditionError
from focpc.grid import check_order
from focpc.pmp import Box, ProblemSpec, reduce_to_mayer

__all__ = [
    "ResourceParams",
    "analytic_adjoint_p1",
    "analytic_adjoint_p2",
    "analytic_control",
    "analytic_state",
    "make_mayer_spec",
    "make_problem_spec",
    "switch_time",
]


def _critical_horizon(alpha: float) -> float:
    return sf.gamma(alpha + 1.0) ** (1.0 / alpha)


@dataclass(frozen=True)
class ResourceParams:
    alpha: float
    T: float = 2.0
    x0: float = 1.0

    def __post_init__(self) -> None:
        check_order(self.alpha)
        if not (math.isfinite(self.x0) and self.x0 > 0.0):
            raise PreconditionError(f"initial resource must be positive, got x0={self.x0!r}")
        crit = _critical_horizon(self.alpha)
        if not (math.isfinite(self.T) and self.T > crit):
            raise PreconditionError(
                f"horizon must satisfy T > Gamma(alpha+1)^(1/alpha) = {crit:.15g} "
                f"for alpha={self.alpha!r}, got T={self.T!r}"
            )


def switch_time(params: ResourceParams) -> float:
    """``t* = T - Gamma(alpha + 1)**(1/alpha)``, in ``(0, T)``."""
    return params.T - _critical_horizon(params.alpha)


def analytic_control(params: ResourceParams, t: float) -> float:
    """1 before the switch, 0 from the switch on (the switch instant included)."""
    if not 0.0 <= t <= params.T:
        raise DomainError(f"t must lie in [0, T], got {t!r}")
    return 1.0 if t < switch_time(params) else 0.0


def analytic_state(params: ResourceParams, t: float, tol: float = 1e-14) -> float:
    """``x0 E_alpha(t**alpha)`` up to ``t*``, then frozen at its value at ``t*``."""
    if not 0.0 <= t <= params.T:
        raise DomainError(f"t must lie in [0, T], got {t!r}")
    ts = min(t, switch_time(params))
    return params.x0 * sf.mittag_leffler(sf.MLParams(params.alpha, 1.0, tol), ts**params.alpha)


def analytic_adjoint_p1(params: ResourceParams, t: float, tol: float = 1e-14) -> float:
    """Adjoint of the resource component (see the module docstring for the branches)."""
    if not 0.0 <= t <= params.T:
        raise DomainError(f"t must lie in [0, T], got {t!r}")
    ts = switch_time(params)
    a = params.alpha
    if t >= ts:
        return (params.T - t) ** a / sf.gamma(a + 1.0)
    return sf.alpha_exponential(a, 1.0, ts - t, tol=tol)


def analytic_adjoint_p2(params: ResourceParams, t: float) -> float:
    """Adjoint of the harvest component: constant 1."""
    return 1.0


def make_problem_spec(params: ResourceParams) -> ProblemSpec:
    """Lagrange form: cost ``-I^alpha((1 - u) x)`` at ``T``, dynamics ``u x``, ``u in [0, 1]``."""

    def dynamics(t, x, u):
        return u * x

    def jac(t, x, u):
        return np.array([[u[0]]])

    def harvest(t, x, u):
        return float((1.0 - u[0]) * x[0])

    def harvest_grad(t, x, u):
        return np.array([1.0 - u[0]])

    return ProblemSpec(
        dynamics=dynamics,
        dynamics_jacobian_x=jac,
        control_set=Box(0.0, 1.0),
        x0=np.array([params.x0]),
        t0=0.0,
        tf=params.T,
        alpha=params.alpha,
        lagrangian=harvest,
        lagrangian_grad_x=harvest_grad,
        cost_sign=-1.0,
    )


def make_mayer_spec(params: ResourceParams) -> ProblemSpec:
    """Augmented state ``(y, x)``, dynamics ``((1-u) x, u x)``, cost ``-y(T)``."""
    return reduce_to_mayer(make_problem_spec(params))
