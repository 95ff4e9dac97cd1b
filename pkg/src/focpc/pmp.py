"""Fractional optimal control problems and their Pontryagin conditions.

A problem in Mayer form is

    minimise g(x(tf))  s.t.  D_C^alpha x = f(t, x, u),  x(t0) = x0,  u(t) in Omega(t),

with Pontryagin function ``H(t, x, p, u) = p . f(t, x, u)``.  A candidate
optimum comes with a covector ``p`` solving

    D_right^alpha p = p^T D_x f(t, x*, u*),   p(tf) = -grad g(x*(tf)),

and ``u*(t)`` maximising ``H(t, x*(t), p(t), .)`` over ``Omega(t)``.  The
minus sign in the terminal condition is what makes *maximisation* of ``H``
the right condition for a *minimisation* problem.

:func:`forward_backward_sweep` looks for a process satisfying these
conditions by fixed-point iteration.  Problems with a running cost
(Lagrange form, cost ``I^alpha L`` at ``tf``) are first converted with
:func:`reduce_to_mayer`.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from focpc.errors import DomainError
from focpc.fde_solver import abm_march
from focpc.frac_operators import rl_integral_left
from focpc.grid import GridFunction, TimeGrid, check_order

__all__ = [
    "Box",
    "FiniteSet",
    "ProblemSpec",
    "SweepOptions",
    "SweepResult",
    "evaluate_cost",
    "forward_backward_sweep",
    "hamiltonian",
    "maximize_hamiltonian",
    "reduce_to_mayer",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box of controls.

    Maximisation only inspects the vertices, which is exact when the
    Hamiltonian is affine in the control.  ``resolution`` > 2 switches to a
    uniform tensor grid with that many points per axis.
    """

    lower: np.ndarray
    upper: np.ndarray
    resolution: int = 2

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DomainError("box bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("box bounds must be finite")
        if np.any(lo > hi):
            raise DomainError(f"empty box: lower {lo} exceeds upper {hi}")
        if self.resolution < 2:
            raise DomainError("box resolution must be at least 2")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def candidates(self) -> np.ndarray:
        axes = [np.unique(np.linspace(l, u, self.resolution)) for l, u in zip(self.lower, self.upper)]
        return np.array(list(itertools.product(*axes)), dtype=float)

    def project(self, u: np.ndarray) -> np.ndarray:
        return np.clip(u, self.lower, self.upper)

    def contains(self, u: np.ndarray, atol: float = 0.0) -> bool:
        return bool(np.all(u >= self.lower - atol) and np.all(u <= self.upper + atol))


@dataclass(frozen=True, eq=False)
class FiniteSet:
    """Explicit list of admissible control values (rows)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise DomainError("a finite control set needs at least one candidate")
        # lexicographic order so that argmax ties resolve to the smallest control
        order = np.lexsort(v.T[::-1])
        object.__setattr__(self, "values", v[order])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def candidates(self) -> np.ndarray:
        return self.values

    def project(self, u: np.ndarray) -> np.ndarray:
        dist = np.sum((self.values - u) ** 2, axis=1)
        return self.values[int(np.argmin(dist))]

    def contains(self, u: np.ndarray, atol: float = 0.0) -> bool:
        return bool(np.any(np.all(np.abs(self.values - u) <= atol, axis=1)))


ControlSet = Union[Box, FiniteSet]


@dataclass(frozen=True)
class ProblemSpec:
    """A fractional optimal control problem.

    In Mayer form ``terminal_cost``/``terminal_cost_grad`` are set and
    ``lagrangian`` is ``None``.  In Lagrange form the cost is
    ``cost_sign * I^alpha L(t, x, u)`` evaluated at ``tf``; ``cost_sign = -1``
    expresses maximisation of an accumulated quantity.  ``lagrangian_grad_x``
    falls back to central finite differences when omitted.

    ``control_set`` is either a fixed set or a callable ``t -> set``.
    Hypotheses assumed but not checked: ``g`` is C^1, ``f`` is C^1 and
    Lipschitz in ``x``, continuous in ``(t, u)``, and bounded on the
    admissible controls.
    """

    dynamics: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    dynamics_jacobian_x: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    control_set: Union[ControlSet, Callable[[float], ControlSet]]
    x0: np.ndarray
    t0: float
    tf: float
    alpha: float
    terminal_cost: Optional[Callable[[np.ndarray], float]] = None
    terminal_cost_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lagrangian: Optional[Callable[[float, np.ndarray, np.ndarray], float]] = None
    lagrangian_grad_x: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None
    cost_sign: float = 1.0

    def __post_init__(self) -> None:
        check_order(self.alpha)
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        if not self.tf > self.t0:
            raise DomainError(f"need tf > t0, got t0={self.t0!r}, tf={self.tf!r}")
        if self.lagrangian is None and (self.terminal_cost is None or self.terminal_cost_grad is None):
            raise DomainError("a problem needs a terminal cost with gradient or a lagrangian")

    @property
    def is_mayer(self) -> bool:
        return self.lagrangian is None

    @property
    def dim(self) -> int:
        return self.x0.shape[0]

    def omega(self, t: float) -> ControlSet:
        cs = self.control_set
        return cs if isinstance(cs, (Box, FiniteSet)) else cs(t)


@dataclass(frozen=True)
class SweepOptions:
    """Stopping rule and damping of the forward-backward sweep.

    ``relaxation`` is the weight kept on the previous control; it is not
    applied to finite control sets, where a convex combination of two
    admissible controls is generally not admissible.
    """

    max_iters: int = 500
    tol: float = 1e-6
    relaxation: float = 0.5
    u_init: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if not self.tol > 0.0:
            raise DomainError("tol must be positive")
        if not 0.0 <= self.relaxation < 1.0:
            raise DomainError("relaxation must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class SweepResult:
    control: GridFunction
    state: GridFunction
    adjoint: GridFunction
    cost: float
    iterations: int
    converged: bool
    control_change_norm: float
    change_history: Sequence[float] = field(default_factory=tuple)


def _fd_grad(fun, t, x, u, eps=1e-7):
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        step = eps * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (fun(t, xp, u) - fun(t, xm, u)) / (2.0 * step)
    return g


def reduce_to_mayer(spec: ProblemSpec) -> ProblemSpec:
    """Append the running cost as a leading state ``y`` with ``D_C^alpha y = L``, ``y(t0) = 0``.

    The augmented state is ``(y, x)``, the dynamics ``(L, f)`` and the
    terminal cost ``cost_sign * y(tf)`` plus any terminal cost already
    present.  ``spec`` itself is left untouched.
    """
    if spec.lagrangian is None:
        raise DomainError("reduce_to_mayer needs a problem with a lagrangian")
    L = spec.lagrangian
    L_x = spec.lagrangian_grad_x or (lambda t, x, u: _fd_grad(L, t, x, u))
    f, f_x = spec.dynamics, spec.dynamics_jacobian_x
    g, g_x = spec.terminal_cost, spec.terminal_cost_grad
    sign = float(spec.cost_sign)
    d = spec.dim

    def dynamics(t, z, u):
        x = z[1:]
        return np.concatenate(([L(t, x, u)], np.asarray(f(t, x, u), dtype=float).reshape(d)))

    def jacobian(t, z, u):
        x = z[1:]
        J = np.zeros((d + 1, d + 1))
        J[0, 1:] = L_x(t, x, u)
        J[1:, 1:] = np.asarray(f_x(t, x, u), dtype=float).reshape(d, d)
        return J

    def cost(z):
        return sign * z[0] + (g(z[1:]) if g is not None else 0.0)

    def cost_grad(z):
        grad = np.zeros(d + 1)
        grad[0] = sign
        if g_x is not None:
            grad[1:] = g_x(z[1:])
        return grad

    return replace(
        spec,
        dynamics=dynamics,
        dynamics_jacobian_x=jacobian,
        x0=np.concatenate(([0.0], spec.x0)),
        terminal_cost=cost,
        terminal_cost_grad=cost_grad,
        lagrangian=None,
        lagrangian_grad_x=None,
        cost_sign=1.0,
    )


def hamiltonian(spec: ProblemSpec, t: float, x: np.ndarray, p: np.ndarray, u) -> float:
    """Pontryagin function ``p . f(t, x, u)``."""
    return float(np.dot(p, spec.dynamics(t, x, np.atleast_1d(u))))


def maximize_hamiltonian(spec: ProblemSpec, t: float, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Admissible control maximising ``H(t, x, p, .)``; ties go to the smallest control."""
    cands = spec.omega(t).candidates()
    values = np.array([hamiltonian(spec, t, x, p, v) for v in cands])
    return cands[int(np.argmax(values))].copy()


def _initial_control(spec: ProblemSpec, grid: TimeGrid, opts: SweepOptions) -> np.ndarray:
    t = grid.nodes
    if opts.u_init is not None:
        u = np.asarray(opts.u_init, dtype=float)
        if u.ndim == 1:
            u = np.broadcast_to(u, (len(t), u.shape[0])) if u.shape[0] != len(t) else u[:, None]
        return np.array([spec.omega(tk).project(uk) for tk, uk in zip(t, u)])
    rows = []
    for tk in t:
        cs = spec.omega(tk)
        rows.append(cs.lower.copy() if isinstance(cs, Box) else cs.values[0].copy())
    return np.array(rows)


def _forward(spec: ProblemSpec, grid: TimeGrid, u: np.ndarray) -> np.ndarray:
    t = grid.nodes
    d = spec.dim

    def rhs_at(k, x):
        return np.asarray(spec.dynamics(t[k], x, u[k]), dtype=float).reshape(d)

    return abm_march(rhs_at, spec.x0, grid.n_steps, grid.h, spec.alpha)


def _backward(spec: ProblemSpec, grid: TimeGrid, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    t = grid.nodes
    n = grid.n_steps
    p_terminal = 0.0 - np.asarray(spec.terminal_cost_grad(x[-1]), dtype=float).reshape(spec.dim)

    def rhs_at(k, p):
        j = n - k
        return p @ np.asarray(spec.dynamics_jacobian_x(t[j], x[j], u[j]), dtype=float)

    p = abm_march(rhs_at, p_terminal, n, grid.h, spec.alpha)[::-1]
    p[-1] = p_terminal
    return p


def _maximize_all(spec: ProblemSpec, grid: TimeGrid, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.array([maximize_hamiltonian(spec, tk, xk, pk) for tk, xk, pk in zip(grid.nodes, x, p)])


def forward_backward_sweep(
    spec: ProblemSpec, grid: TimeGrid, opts: Optional[SweepOptions] = None
) -> SweepResult:
    """Fixed-point iteration on the state, adjoint and maximum conditions.

    Each iteration solves the state equation forward with the current
    control, the adjoint equation backward, maximises ``H`` node-wise and
    relaxes the control towards the maximiser.  Once the sup-norm change
    drops below ``opts.tol`` the control is replaced by the unrelaxed
    maximiser and state and adjoint are recomputed for it, so the returned
    triple satisfies the maximum condition node by node.

    If ``max_iters`` is exhausted the last iterate is returned with
    ``converged=False``.  :class:`~focpc.errors.DivergenceError` from the
    solvers propagates.
    """
    opts = opts or SweepOptions()
    if not spec.is_mayer:
        raise DomainError("forward_backward_sweep needs a Mayer-form problem; use reduce_to_mayer")
    if not (np.isclose(grid.t0, spec.t0) and np.isclose(grid.tf, spec.tf)):
        raise DomainError("grid does not span the problem horizon")
    theta = opts.relaxation
    u = _initial_control(spec, grid, opts)
    finite = [isinstance(spec.omega(tk), FiniteSet) for tk in grid.nodes]

    history = []
    converged = False
    change = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        x = _forward(spec, grid, u)
        p = _backward(spec, grid, x, u)
        u_hat = _maximize_all(spec, grid, x, p)
        u_new = np.empty_like(u)
        for k, tk in enumerate(grid.nodes):
            if finite[k]:
                u_new[k] = u_hat[k]
            else:
                u_new[k] = spec.omega(tk).project(theta * u[k] + (1.0 - theta) * u_hat[k])
        change = float(np.max(np.abs(u_new - u)))
        history.append(change)
        log.debug("sweep iteration %d: control change %.3e", it, change)
        u = u_new
        if change < opts.tol:
            converged = True
            u = u_hat
            break

    x = _forward(spec, grid, u)
    p = _backward(spec, grid, x, u)
    cost = float(spec.terminal_cost(x[-1]))
    log.info("sweep finished: converged=%s iterations=%d cost=%.12g", converged, it, cost)
    return SweepResult(
        control=GridFunction(grid, u),
        state=GridFunction(grid, x),
        adjoint=GridFunction(grid, p),
        cost=cost,
        iterations=it,
        converged=converged,
        control_change_norm=change,
        change_history=tuple(history),
    )


def evaluate_cost(spec: ProblemSpec, x: GridFunction, u: GridFunction) -> float:
    """Lagrange-form cost ``cost_sign * I^alpha L(t, x(t), u(t))`` at ``tf``."""
    if spec.lagrangian is None:
        raise DomainError("evaluate_cost needs a problem with a lagrangian")
    if x.grid != u.grid:
        raise DomainError("state and control must live on the same grid")
    integrand = np.array(
        [spec.lagrangian(tk, xk, uk) for tk, xk, uk in zip(x.t, x.values, u.values)]
    )
    integral = rl_integral_left(x.with_values(integrand), spec.alpha).values[-1, 0]
    extra = spec.terminal_cost(x.values[-1]) if spec.terminal_cost is not None else 0.0
    return float(spec.cost_sign * integral + extra)
