"""Discretised fractional operators on uniform grids, for orders in (0, 1].

* left Riemann-Liouville integral: product-trapezoidal rule (piecewise
  linear interpolation of the integrand, exact kernel moments);
* left Caputo derivative: L1 scheme;
* right Riemann-Liouville derivative and integral: grid reflection onto the
  left-sided code path.

The remaining functions measure how well these discretisations satisfy
classical identities of fractional calculus (composition, integration by
parts, Gronwall bound, mean value, Taylor expansion); the validation suite
and the tests are built on them.

Convolution sums go through :func:`numpy.convolve`, whose reduction order
does not depend on the data, so every operator is bit-reproducible.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from focpc import special_functions as sf
from focpc.errors import DomainError, PreconditionError
from focpc.grid import GridFunction, check_order, reflect

__all__ = [
    "caputo_left",
    "check_composition",
    "check_integration_by_parts",
    "check_mean_value",
    "gronwall_bound",
    "product_trapezoid_weights",
    "rl_derivative_right",
    "rl_integral_left",
    "rl_integral_right",
    "taylor_partial_sum",
    "trapezoid",
]


def product_trapezoid_weights(order: float, k: int) -> np.ndarray:
    """Weights ``w_j``, ``j = 0..k``, with ``I^order f(t_k) ~ h**order * sum w_j f_j``.

    Valid for any ``order > 0`` (not only fractional orders); the factor
    ``1/Gamma(order + 2)`` is folded in.
    """
    if k == 0:
        return np.zeros(1)
    q1 = order + 1.0
    m = np.arange(k, 0, -1, dtype=float)  # m = k - j for j = 0..k-1
    w = np.empty(k + 1)
    w[1:k] = (m[1:] + 1.0) ** q1 - 2.0 * m[1:] ** q1 + (m[1:] - 1.0) ** q1
    w[0] = (k - 1.0) ** q1 - (k - 1.0 - order) * float(k) ** order
    w[k] = 1.0
    return w * sf.rgamma(order + 2.0)


def _rl_integral_values(values: np.ndarray, order: float, h: float) -> np.ndarray:
    """Product-trapezoidal ``I^order`` at every node; ``values`` has shape (n+1, d)."""
    n = values.shape[0] - 1
    q1 = order + 1.0
    m = np.arange(n + 1, dtype=float)
    # interior weight for lag m >= 1; lag 0 (the current node) has weight 1
    c = np.empty(n + 1)
    c[0] = 1.0
    c[1:] = (m[1:] + 1.0) ** q1 - 2.0 * m[1:] ** q1 + (m[1:] - 1.0) ** q1
    # the j = 0 endpoint weight differs from the interior one
    endpoint = np.zeros(n + 1)
    endpoint[1:] = (m[1:] - 1.0) ** q1 - (m[1:] - 1.0 - order) * m[1:] ** order
    scale = h**order * sf.rgamma(order + 2.0)
    out = np.empty_like(values)
    for i in range(values.shape[1]):
        f = values[:, i]
        acc = np.convolve(c, f)[: n + 1]
        acc[1:] += (endpoint[1:] - c[1:]) * f[0]
        acc[0] = 0.0
        out[:, i] = scale * acc
    return out


def rl_integral_left(f: GridFunction, alpha: float) -> GridFunction:
    """Left Riemann-Liouville integral ``I^alpha f`` at every node (``0`` at ``t0``)."""
    alpha = check_order(alpha)
    return f.with_values(_rl_integral_values(f.values, alpha, f.grid.h))


def rl_integral_right(f: GridFunction, alpha: float) -> GridFunction:
    """Right Riemann-Liouville integral over ``[t, tf]`` (``0`` at ``tf``)."""
    return reflect(rl_integral_left(reflect(f), alpha))


def caputo_left(f: GridFunction, alpha: float) -> GridFunction:
    """Left Caputo derivative by the L1 scheme.

    The node ``t0`` receives the value computed at ``t1``.  For ``alpha == 1``
    the ordinary derivative is returned (central differences inside,
    one-sided at the ends).
    """
    alpha = check_order(alpha)
    h = f.grid.h
    if alpha == 1.0:
        return f.with_values(np.gradient(f.values, h, axis=0, edge_order=1))
    n = f.grid.n_steps
    j = np.arange(n, dtype=float)
    b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    scale = h ** (-alpha) * sf.rgamma(2.0 - alpha)
    df = np.diff(f.values, axis=0)
    out = np.empty_like(f.values)
    for i in range(f.dim):
        out[1:, i] = scale * np.convolve(b, df[:, i])[:n]
    out[0] = out[1]
    return f.with_values(out)


def rl_derivative_right(f: GridFunction, alpha: float) -> GridFunction:
    """Right Riemann-Liouville derivative ``(-d/dt) I_right^(1-alpha) f``.

    Computed on the reflected grid as ``d/ds`` of the left integral of order
    ``1 - alpha``, differentiated with second-order finite differences.
    The value at ``tf`` is finite but meaningless whenever ``f(tf) != 0``
    (the continuum derivative is singular there).
    """
    alpha = check_order(alpha)
    if alpha == 1.0:
        raise DomainError(
            "rl_derivative_right is defined for 0 < alpha < 1; "
            "for alpha = 1 use -d/dt directly"
        )
    g = _rl_integral_values(f.values[::-1], 1.0 - alpha, f.grid.h)
    d = np.gradient(g, f.grid.h, axis=0, edge_order=2)
    return f.with_values(d[::-1])


def trapezoid(f: GridFunction) -> np.ndarray:
    """Composite trapezoidal integral over the whole grid, per component."""
    return np.trapezoid(f.values, dx=f.grid.h, axis=0)


def check_composition(f: GridFunction, alpha: float) -> float:
    """Max-norm residual of ``I^alpha (D_C^alpha f) - (f - f(t0))`` over all nodes."""
    alpha = check_order(alpha)
    lhs = rl_integral_left(caputo_left(f, alpha), alpha).values
    return float(np.max(np.abs(lhs - (f.values - f.values[0]))))


def check_integration_by_parts(f: GridFunction, g: GridFunction, alpha: float) -> float:
    """Residual of fractional integration by parts on the grid interval.

    ``|int g D_C^alpha f - int f D_right^alpha g - [I_right^(1-alpha) g * f]|``,
    with all time integrals evaluated by the trapezoidal rule.  Scalar
    functions only.
    """
    alpha = check_order(alpha)
    if alpha == 1.0:
        raise DomainError("integration by parts check needs 0 < alpha < 1")
    if f.dim != 1 or g.dim != 1:
        raise DomainError("integration by parts check takes scalar grid functions")
    dcf = caputo_left(f, alpha).values
    drg = rl_derivative_right(g, alpha).values
    lhs = trapezoid(f.with_values(g.values * dcf))[0]
    rhs = trapezoid(f.with_values(f.values * drg))[0]
    boundary = rl_integral_right(g, 1.0 - alpha).values[:, 0] * f.values[:, 0]
    return float(abs(lhs - rhs - (boundary[-1] - boundary[0])))


def gronwall_bound(
    a_fn: GridFunction,
    b_fn: GridFunction,
    alpha: float,
    n_series: int = 30,
    term_tol: float = 1e-14,
) -> GridFunction:
    """Right-hand side of the generalised Bellman-Gronwall inequality.

    Evaluates ``a(t) + sum_{n=1..n_series} (b(t) Gamma(alpha))**n I^(n alpha) a(t)``
    node-wise, using the product-trapezoidal rule for each ``I^(n alpha)``
    (``(t-s)**(n alpha - 1)/Gamma(n alpha)`` is exactly the kernel of that
    integral).  Summation stops early once a term's sup-norm drops below
    ``term_tol``.
    """
    alpha = check_order(alpha)
    a = a_fn.values[:, 0]
    b = b_fn.values[:, 0]
    if a_fn.dim != 1 or b_fn.dim != 1:
        raise DomainError("gronwall_bound takes scalar grid functions")
    if np.any(a < 0.0) or np.any(b < 0.0):
        raise PreconditionError("gronwall_bound requires nonnegative a and b")
    if np.any(np.diff(b) < 0.0):
        raise PreconditionError("gronwall_bound requires a nondecreasing b")
    if n_series < 0:
        raise DomainError("n_series must be nonnegative")
    scale = b * sf.gamma(alpha)
    terms = [a]
    factor = np.ones_like(a)
    for n in range(1, n_series + 1):
        factor = factor * scale
        term = factor * _rl_integral_values(a[:, None], n * alpha, a_fn.grid.h)[:, 0]
        terms.append(term)
        if np.max(np.abs(term)) < term_tol:
            break
    return a_fn.with_values(np.sum(np.array(terms), axis=0))


def check_mean_value(f: GridFunction, alpha: float, x_index: int) -> float:
    """Ratio ``I^alpha f(x) / ((x - t0)**alpha / Gamma(1 + alpha))`` at node ``x_index``.

    The fractional mean value theorem places this ratio in the range of
    ``f`` over ``[t0, x]``.
    """
    alpha = check_order(alpha)
    if not 0 < x_index <= f.grid.n_steps:
        raise DomainError(f"x_index must lie in 1..{f.grid.n_steps}, got {x_index}")
    integral = float(rl_integral_left(f.with_values(f.values[:, :1]), alpha).values[x_index, 0])
    width = x_index * f.grid.h
    return integral * sf.gamma(1.0 + alpha) / width**alpha


def taylor_partial_sum(alpha: float, n: int, coeffs: Sequence[float], a: float, x: float) -> float:
    """Generalised Taylor polynomial ``sum_{k<=n} coeffs[k] (x-a)**(k alpha) / Gamma(k alpha + 1)``.

    ``coeffs[k]`` is the sequential Caputo derivative of order ``k*alpha`` at ``a``.
    """
    alpha = check_order(alpha)
    if n < 0 or len(coeffs) < n + 1:
        raise DomainError(f"need n >= 0 and at least n+1 coefficients (n={n}, got {len(coeffs)})")
    if x < a:
        raise DomainError("taylor_partial_sum requires x >= a")
    d = x - a
    return math.fsum(
        coeffs[k] * (d ** (k * alpha) if k else 1.0) / sf.gamma(k * alpha + 1.0)
        for k in range(n + 1)
    )
