"""Covariance-matrix-adaptation evolution strategy over a box-bounded domain.

Coordinates are normalized to the unit box spanned by the bounds, so a
single step size serves all parameters; the default initial step is 5% of
each bound range. Sampling is driven by a seeded generator and the whole
run is reproducible bit-for-bit for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import OptimizationError

__all__ = ["OptTrace", "OptResult", "CmaEs", "optimize"]

_RESAMPLE_TRIES = 10


@dataclass
class OptTrace:
    """Per-evaluation record of an optimization run."""

    seed: int
    xs: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    best_costs: list = field(default_factory=list)
    termination: str = "running"

    def record(self, x, cost):
        best = self.best_costs[-1] if self.best_costs else math.inf
        self.xs.append(np.array(x, dtype=float))
        self.costs.append(float(cost))
        self.best_costs.append(min(best, float(cost)) if math.isfinite(cost) else best)

    @property
    def n_evals(self) -> int:
        return len(self.costs)

    def as_arrays(self):
        return (
            np.array(self.xs, dtype=float),
            np.array(self.costs, dtype=float),
            np.array(self.best_costs, dtype=float),
        )


@dataclass(frozen=True)
class OptResult:
    x: np.ndarray
    cost: float
    trace: OptTrace


class CmaEs:
    """Ask/tell CMA-ES in normalized [0, 1]^n coordinates."""

    def __init__(self, x0, sigma0: float, popsize: int, seed: int = 0):
        self.n = len(x0)
        self.mean = np.asarray(x0, dtype=float).copy()
        self.sigma = float(sigma0)
        self.lam = int(popsize)
        if self.lam < 4:
            raise ValueError(f"population size must be at least 4, got {popsize}")
        self.rng = np.random.default_rng(seed)

        self.mu = self.lam // 2
        w = np.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mu_eff = 1.0 / np.sum(self.weights**2)
        n, mu_eff = self.n, self.mu_eff
        self.c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
        self.d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + self.c_sigma
        self.c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
        self.c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
        self.c_mu = min(
            1.0 - self.c_1,
            2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff),
        )
        self.chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

        self.cov = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.generation = 0
        self._decompose()

    def _decompose(self):
        self.cov = 0.5 * (self.cov + self.cov.T)
        eigvals, eigvecs = np.linalg.eigh(self.cov)
        eigvals = np.maximum(eigvals, 1e-20)
        self._b = eigvecs
        self._d = np.sqrt(eigvals)

    def ask(self) -> np.ndarray:
        """Sample a population; out-of-bounds candidates are resampled up to
        10 times, then clamped to the unit box."""
        xs = np.empty((self.lam, self.n))
        for k in range(self.lam):
            x = None
            for _ in range(_RESAMPLE_TRIES):
                z = self.rng.standard_normal(self.n)
                cand = self.mean + self.sigma * (self._b @ (self._d * z))
                if np.all((cand >= 0.0) & (cand <= 1.0)):
                    x = cand
                    break
            if x is None:
                x = np.clip(cand, 0.0, 1.0)
            xs[k] = x
        return xs

    def tell(self, xs: np.ndarray, costs: np.ndarray) -> None:
        order = np.argsort(costs, kind="stable")
        sel = xs[order[: self.mu]]
        old_mean = self.mean
        self.mean = self.weights @ sel
        step = (self.mean - old_mean) / self.sigma

        inv_sqrt_step = self._b @ ((self._b.T @ step) / self._d)
        self.p_sigma = (1.0 - self.c_sigma) * self.p_sigma + math.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff
        ) * inv_sqrt_step
        self.generation += 1
        norm = np.linalg.norm(self.p_sigma)
        denom = math.sqrt(1.0 - (1.0 - self.c_sigma) ** (2.0 * self.generation))
        h_sigma = 1.0 if norm / denom < (1.4 + 2.0 / (self.n + 1.0)) * self.chi_n else 0.0

        self.p_c = (1.0 - self.c_c) * self.p_c + h_sigma * math.sqrt(
            self.c_c * (2.0 - self.c_c) * self.mu_eff
        ) * step
        ys = (sel - old_mean) / self.sigma
        rank_mu = (self.weights[:, None] * ys).T @ ys
        self.cov = (
            (1.0 - self.c_1 - self.c_mu) * self.cov
            + self.c_1
            * (np.outer(self.p_c, self.p_c) + (1.0 - h_sigma) * self.c_c * (2.0 - self.c_c) * self.cov)
            + self.c_mu * rank_mu
        )
        self.sigma *= math.exp((self.c_sigma / self.d_sigma) * (norm / self.chi_n - 1.0))
        self._decompose()


def optimize(
    fn,
    x0,
    bounds,
    popsize: int = 12,
    seed: int = 0,
    max_evals: int = 2000,
    sigma0: float = 0.05,
    stagnation_tol: float = 1e-6,
    stagnation_gens: int = 20,
) -> OptResult:
    """Minimize ``fn`` over finite box bounds with CMA-ES.

    Stops on the evaluation budget or when the best cost improves by less
    than ``stagnation_tol`` over ``stagnation_gens`` generations. Non-finite
    costs are treated as worst-case; a generation with no finite cost aborts
    with :class:`OptimizationError` carrying the partial trace.
    """
    x0 = np.asarray(x0, dtype=float)
    lo = np.asarray([b[0] for b in bounds], dtype=float)
    hi = np.asarray([b[1] for b in bounds], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
        raise ValueError("bounds must be finite with positive extent")
    if x0.shape != lo.shape:
        raise ValueError("x0 and bounds dimensions differ")
    span = hi - lo

    def to_unit(x):
        return (x - lo) / span

    def to_real(u):
        return lo + u * span

    es = CmaEs(np.clip(to_unit(x0), 0.0, 1.0), sigma0, popsize, seed)
    trace = OptTrace(seed=seed)
    best_x = x0.copy()
    best_cost = math.inf
    gen_best_history: list[float] = []

    while trace.n_evals < max_evals:
        us = es.ask()
        costs = np.empty(len(us))
        for k, u in enumerate(us):
            if trace.n_evals >= max_evals:
                us, costs = us[: k], costs[: k]
                break
            x = to_real(u)
            cost = float(fn(x))
            trace.record(x, cost)
            costs[k] = cost
            if math.isfinite(cost) and cost < best_cost:
                best_cost = cost
                best_x = x
        if len(us) < es.lam:
            break  # budget exhausted mid-generation; no update from a partial population
        finite = np.isfinite(costs)
        if not finite.any():
            trace.termination = "all-invalid"
            raise OptimizationError("entire population evaluated to non-finite cost", trace=trace)
        worst = costs[finite].max()
        costs = np.where(finite, costs, worst + 1.0)
        es.tell(us, costs)
        gen_best_history.append(best_cost)
        if len(gen_best_history) > stagnation_gens:
            if gen_best_history[-stagnation_gens - 1] - best_cost < stagnation_tol:
                trace.termination = "stagnation"
                break
    if trace.termination == "running":
        trace.termination = "max_evals"
    return OptResult(x=best_x, cost=best_cost, trace=trace)
