"""Two-stage parameter optimization: an adaptive first-order warm-up
followed by BFGS refinement with Armijo backtracking.

All routines take a single objective callable ``fn(theta) -> (loss, grad)``
and track the best iterate ever evaluated, so the reported loss is never
worse than any point actually visited. Everything is deterministic: no
randomness lives in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonFiniteLossError


@dataclass
class OptimConfig:
    """Iteration budgets and step sizes for the two-stage scheme plus the
    slower fine-tuning pass applied to candidate-pool entries."""

    t1_iters: int = 150
    t2_iters: int = 150
    t3_iters: int = 100
    lr_first: float = 0.05
    lr_finetune: float = 0.005
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5

    def __post_init__(self):
        if min(self.t1_iters, self.t2_iters, self.t3_iters) < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.lr_first <= 0 or self.lr_finetune <= 0:
            raise ValueError("learning rates must be > 0")
        if self.lr_finetune >= self.lr_first:
            raise ValueError("lr_finetune must be smaller than lr_first")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")


@dataclass
class OptimResult:
    final_params: np.ndarray
    final_loss: float
    iterations_used: int
    converged: bool


class _BestTracker:
    def __init__(self, theta, loss):
        self.theta = np.array(theta, copy=True)
        self.loss = float(loss)

    def offer(self, theta, loss):
        # ties prefer the most recent point, so a converged iterate wins
        # over an equal-loss line-search trial
        if np.isfinite(loss) and loss <= self.loss:
            self.loss = float(loss)
            self.theta = np.array(theta, copy=True)


def _check_start(loss):
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss is {loss} at the initial parameters")


def uniform_init(rng, count, low=-1.0, high=1.0):
    """Default parameter initialization: i.i.d. uniform draws."""
    return rng.uniform(low, high, size=count)


def minimize_first_order(fn, init, iters, lr, beta1=0.9, beta2=0.999,
                         eps=1e-8):
    """Adam-style momentum descent with bias correction.

    Runs exactly ``iters`` steps (or stops early on a non-finite loss) and
    returns the best iterate seen.
    """
    theta = np.array(init, dtype=float, copy=True)
    loss, grad = fn(theta)
    _check_start(loss)
    best = _BestTracker(theta, loss)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    used = 0
    for t in range(1, iters + 1):
        if not np.all(np.isfinite(grad)):
            break
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        loss, grad = fn(theta)
        used = t
        if not np.isfinite(loss):
            break
        best.offer(theta, loss)
    return OptimResult(best.theta, best.loss, used, converged=False)


def minimize_bfgs(fn, init, iters, grad_tol, armijo_c=1e-4,
                  backtrack_factor=0.5, max_backtracks=50,
                  trace: Optional[list] = None):
    """BFGS with an inverse-Hessian approximation and Armijo backtracking.

    Stops when the gradient norm drops below ``grad_tol`` or the iteration
    budget is spent. The curvature update is skipped whenever
    s'y <= 1e-10 * |s||y| (the previous approximation is kept); the test is
    relative because s and y shrink together near a minimum and an absolute
    cutoff would freeze the approximation and stall convergence. A failed
    line search (50 backtracks) returns the best iterate found so far.
    """
    theta = np.array(init, dtype=float, copy=True)
    loss, grad = fn(theta)
    _check_start(loss)
    best = _BestTracker(theta, loss)
    n = theta.size
    H = np.eye(n)
    identity = np.eye(n)
    used = 0
    converged = bool(np.linalg.norm(grad) <= grad_tol)
    for k in range(iters):
        if converged:
            break
        if not np.all(np.isfinite(grad)):
            break
        p = -H @ grad
        dd = float(grad @ p)
        if dd >= 0:
            # approximation lost descent property; restart from steepest descent
            H = np.eye(n)
            p = -grad
            dd = -float(grad @ grad)
        step = 1.0
        accepted = False
        for _ in range(max_backtracks):
            cand = theta + step * p
            cand_loss, cand_grad = fn(cand)
            if np.isfinite(cand_loss):
                best.offer(cand, cand_loss)
            if np.isfinite(cand_loss) and cand_loss <= loss + armijo_c * step * dd:
                accepted = True
                break
            step *= backtrack_factor
        if not accepted:
            break
        if trace is not None:
            trace.append({"loss_before": loss, "loss_after": cand_loss,
                          "step": step, "directional_derivative": dd})
        s = step * p
        y = cand_grad - grad
        theta, loss, grad = cand, cand_loss, cand_grad
        used = k + 1
        sty = float(s @ y)
        if sty > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sty
            outer_sy = np.outer(s, y)
            H = (identity - rho * outer_sy) @ H @ (identity - rho * outer_sy.T)
            H += rho * np.outer(s, s)
        if np.all(np.isfinite(grad)) and np.linalg.norm(grad) <= grad_tol:
            converged = True
    return OptimResult(best.theta, best.loss, used, converged)


def two_stage_minimize(fn, init, cfg: OptimConfig):
    """First-order warm-up for t1 iterations, then BFGS for t2."""
    first = minimize_first_order(fn, init, cfg.t1_iters, cfg.lr_first)
    second = minimize_bfgs(fn, first.final_params, cfg.t2_iters, cfg.grad_tol,
                           cfg.armijo_c, cfg.backtrack_factor)
    # the BFGS tracker starts at the stage-one best, so this never worsens it
    return OptimResult(second.final_params, second.final_loss,
                       first.iterations_used + second.iterations_used,
                       second.converged)
