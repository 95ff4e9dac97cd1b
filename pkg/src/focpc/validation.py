"""Property suite run by ``focpc validate``.

Every check is deterministic (fixed grids and seeds) and reports the
measured quantity next to the threshold it is held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from focpc import frac_operators as fo
from focpc import special_functions as sf
from focpc.grid import GridFunction, TimeGrid

__all__ = ["CheckResult", "FAMILIES", "run_checks"]

SEED = 20240917


@dataclass(frozen=True)
class CheckResult:
    family: str
    name: str
    measured: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.family:<12} {self.name:<44} measured={self.measured:.3e}  limit={self.threshold:.3e}"


def _sample(n: int, fn, t0: float = 0.0, tf: float = 1.0) -> GridFunction:
    return GridFunction.from_callable(TimeGrid(t0, tf, n), fn)


def _mittag_leffler() -> Iterable[CheckResult]:
    err = max(abs(sf.mittag_leffler(sf.MLParams(1.0, 1.0), z) - math.exp(z)) for z in (-2, -1, 0, 1, 2))
    yield CheckResult("mittag", "E_{1,1}(z) = exp(z), z in -2..2", err, 1e-8, err <= 1e-8)
    err = abs(sf.mittag_leffler(sf.MLParams(1.0, 2.0), 1.0) - (math.e - 1.0))
    yield CheckResult("mittag", "E_{1,2}(1) = e - 1", err, 1e-10, err <= 1e-10)
    err = abs(sf.mittag_leffler(sf.MLParams(0.0, 1.0), 0.5) - 2.0)
    yield CheckResult("mittag", "E_{0,1}(0.5) = 2", err, 1e-12, err <= 1e-12)
    grid = (0.3, 0.5, 0.9, 1.0)
    err = max(
        abs(sf.mittag_leffler(sf.MLParams(a, b), 0.0) - 1.0 / math.gamma(b)) for a in grid for b in grid
    )
    yield CheckResult("mittag", "E_{a,b}(0) = 1/Gamma(b)", err, 1e-12, err <= 1e-12)


def _composition() -> Iterable[CheckResult]:
    square = lambda t: t**2  # noqa: E731
    coarse = fo.check_composition(_sample(1000, square), 0.5)
    fine = fo.check_composition(_sample(2000, square), 0.5)
    yield CheckResult("composition", "I^a D^a t^2 = t^2, a=0.5, N=1000", coarse, 0.01, coarse <= 0.01)
    yield CheckResult("composition", "residual shrinks when h is halved", fine / coarse, 1.0, fine < coarse)
    const = fo.check_composition(_sample(200, lambda t: np.full_like(t, 3.0)), 0.7)
    yield CheckResult("composition", "constant function, a=0.7", const, 1e-12, const <= 1e-12)
    linear = fo.check_composition(_sample(100, lambda t: t), 1.0)
    yield CheckResult("composition", "f=t, a=1, N=100", linear, 1e-10, linear <= 1e-10)


def _integration_by_parts() -> Iterable[CheckResult]:
    n = 2000
    r1 = fo.check_integration_by_parts(_sample(n, lambda t: t), _sample(n, np.ones_like), 0.5)
    yield CheckResult("parts", "f=t, g=1, a=0.5, N=2000", r1, 0.02, r1 <= 0.02)
    r2 = fo.check_integration_by_parts(_sample(n, lambda t: t**2), _sample(n, lambda t: 1.0 - t), 0.5)
    yield CheckResult("parts", "f=t^2, g=1-t, a=0.5, N=2000", r2, 0.05, r2 <= 0.05)
    r0 = fo.check_integration_by_parts(_sample(n, np.zeros_like), _sample(n, np.cos), 0.5)
    yield CheckResult("parts", "f=0", r0, 1e-12, r0 <= 1e-12)


def discrete_gronwall_sequence(
    grid: TimeGrid, alpha: float, a: float, b: float, c: np.ndarray
) -> np.ndarray:
    """Grid function obeying ``u <= a + b Gamma(alpha) I^alpha u`` in discrete form.

    ``u_k = c_k (a + b Gamma(alpha) I_h^alpha u (t_k))`` with ``c_k in [0, 1]``,
    solved node by node (the product-trapezoidal weight of ``u_k`` itself
    is moved to the left-hand side).  ``c = 1`` gives the extremal sequence.
    """
    n = grid.n_steps
    K = b * math.gamma(alpha) * grid.h**alpha
    u = np.zeros(n + 1)
    u[0] = c[0] * a
    for k in range(1, n + 1):
        w = fo.product_trapezoid_weights(alpha, k)
        hist = K * (w[:k] @ u[:k])
        u[k] = c[k] * (a + hist) / (1.0 - c[k] * K * w[k])
    return u


def _gronwall() -> Iterable[CheckResult]:
    alpha, a, b = 0.5, 1.0, 1.0
    grid = TimeGrid(0.0, 1.0, 400)
    a_fn = GridFunction(grid, np.full(len(grid), a))
    b_fn = GridFunction(grid, np.full(len(grid), b))
    bound = fo.gronwall_bound(a_fn, b_fn, alpha, n_series=80).values[:, 0]
    rng = np.random.default_rng(SEED)
    worst = -np.inf
    resid = -np.inf
    for trial in range(6):
        c = np.ones(len(grid)) if trial == 0 else rng.uniform(0.0, 1.0, len(grid))
        u = discrete_gronwall_sequence(grid, alpha, a, b, c)
        rhs = a + b * math.gamma(alpha) * fo.rl_integral_left(GridFunction(grid, u), alpha).values[:, 0]
        resid = max(resid, float(np.max(u - rhs)))
        worst = max(worst, float(np.max(u - bound)))
    yield CheckResult("gronwall", "sequences satisfy the discrete inequality", resid, 1e-12, resid <= 1e-12)
    yield CheckResult("gronwall", "u <= bound + 10h, a=b=1, a=0.5", worst, 10 * grid.h, worst <= 10 * grid.h)
    exact = math.e
    one = GridFunction(grid, np.ones(len(grid)))
    err = abs(fo.gronwall_bound(one, one, 1.0).values[-1, 0] - exact)
    yield CheckResult("gronwall", "a=b=1, a=1 gives e^t at t=1", err, 0.01, err <= 0.01)


def _mean_value() -> Iterable[CheckResult]:
    rng = np.random.default_rng(SEED)
    n = 400
    grid = TimeGrid(0.0, 1.0, n)
    slack = 5 * grid.h
    worst = -np.inf
    for _ in range(20):
        coeffs = rng.uniform(-1.0, 1.0, int(rng.integers(2, 6)))
        alpha = float(rng.uniform(0.1, 1.0))
        k = int(rng.integers(1, n + 1))
        f = GridFunction(grid, np.polyval(coeffs, grid.nodes))
        r = fo.check_mean_value(f, alpha, k)
        seg = f.values[: k + 1, 0]
        worst = max(worst, seg.min() - r, r - seg.max())
    yield CheckResult("mean_value", "ratio within [min f, max f], 20 polynomials", worst, slack, worst <= slack)


def _taylor() -> Iterable[CheckResult]:
    alpha, x = 0.5, 0.5
    ones = [1.0] * 9
    mismatch = 0.0
    for n in range(9):
        truncated = math.fsum((x ** (k * alpha) if k else 1.0) / math.gamma(k * alpha + 1.0) for k in range(n + 1))
        mismatch = max(mismatch, abs(fo.taylor_partial_sum(alpha, n, ones, 0.0, x) - truncated))
    yield CheckResult("taylor", "partial sums of E_a(x^a) equal series", mismatch, 0.0, mismatch == 0.0)
    full = sf.mittag_leffler(sf.MLParams(alpha), x**alpha)
    rem = [abs(full - fo.taylor_partial_sum(alpha, n, ones, 0.0, x)) for n in range(1, 9)]
    steps = max(b - a for a, b in zip(rem, rem[1:]))
    yield CheckResult("taylor", "remainder decreases for n = 1..8", steps, 0.0, steps < 0.0)


FAMILIES: dict[str, Callable[[], Iterable[CheckResult]]] = {
    "mittag": _mittag_leffler,
    "composition": _composition,
    "parts": _integration_by_parts,
    "gronwall": _gronwall,
    "mean_value": _mean_value,
    "taylor": _taylor,
}


def run_checks(only: Optional[Iterable[str]] = None) -> list[CheckResult]:
    names = list(FAMILIES) if only is None else list(only)
    unknown = [n for n in names if n not in FAMILIES]
    if unknown:
        raise KeyError(f"unknown property families: {', '.join(unknown)}")
    results: list[CheckResult] = []
    for name in names:
        results.extend(FAMILIES[name]())
    return results
