"""Update machinery: Adam with linear warmup, the slow-learner EMA, diagonal
Fisher regularization, and memory-gradient projection."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import Batch, Network, loss_and_grad


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    base_lr: float = 1e-2
    warmup_ratio: float = 0.2
    total_steps: int = 1

    @classmethod
    def fresh(cls, n_params: int, base_lr: float, warmup_ratio: float,
              total_steps: int) -> "AdamState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params),
                   base_lr=base_lr, warmup_ratio=warmup_ratio,
                   total_steps=total_steps)

    def copy(self) -> "AdamState":
        return replace(self, m=self.m.copy(), v=self.v.copy())


def lr_at(state: AdamState, step: int) -> float:
    """Linear ramp over the first ceil(warmup_ratio * total_steps) steps,
    constant base_lr afterwards."""
    if state.total_steps < 1:
        raise ValueError("total_steps must be >= 1")
    w = math.ceil(state.warmup_ratio * state.total_steps)
    if w > 0 and step <= w:
        return state.base_lr * step / w
    return state.base_lr


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray):
    """One bias-corrected Adam update; returns (new theta, new state)."""
    if theta.shape != grad.shape:
        raise ValueError("theta/grad length mismatch")
    if not np.all(np.isfinite(grad)):
        raise ArithmeticError("non-finite gradient, update rejected")
    new = state.copy()
    new.step = state.step + 1
    new.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    new.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    mhat = new.m / (1.0 - state.beta1 ** new.step)
    vhat = new.v / (1.0 - state.beta2 ** new.step)
    lr = lr_at(state, new.step)
    return theta - lr * mhat / (np.sqrt(vhat) + state.eps), new


def sgd_step(state: AdamState, theta: np.ndarray, grad: np.ndarray):
    """Plain gradient descent with the same warmup schedule (the literal
    Algorithm-1 style update); reuses AdamState for step/schedule bookkeeping."""
    if theta.shape != grad.shape:
        raise ValueError("theta/grad length mismatch")
    if not np.all(np.isfinite(grad)):
        raise ArithmeticError("non-finite gradient, update rejected")
    new = state.copy()
    new.step = state.step + 1
    return theta - lr_at(state, new.step) * grad, new


def ema_update(theta_l: np.ndarray, theta_w: np.ndarray, lam: float) -> np.ndarray:
    """Slow-learner update: lam * theta_l + (1 - lam) * theta_w."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if theta_l.shape != theta_w.shape:
        raise ValueError("parameter length mismatch")
    if lam == 0.0:
        return theta_w.copy()
    if lam == 1.0:
        return theta_l.copy()
    return lam * theta_l + (1.0 - lam) * theta_w


@dataclass
class GradRef:
    g_ref: np.ndarray


def agem_project(g: np.ndarray, ref: GradRef) -> np.ndarray:
    """Project g onto the half-space of non-negative inner product with the
    reference memory gradient; pass through unchanged when already there."""
    g_ref = ref.g_ref
    if g.shape != g_ref.shape:
        raise ValueError("gradient length mismatch")
    denom = float(g_ref @ g_ref)
    if denom == 0.0:
        return g
    dot = float(g @ g_ref)
    if dot >= 0.0:
        return g
    return g - (dot / denom) * g_ref


@dataclass
class EwcState:
    theta_star: np.ndarray
    fisher: np.ndarray
    lambda_ewc: float


def ewc_fisher(net: Network, theta: np.ndarray, dataset: Batch,
               rng=None) -> np.ndarray:
    """Empirical diagonal Fisher: mean over samples of the squared per-sample
    log-likelihood gradient. Deterministic; rng accepted for interface parity
    but unused (the full dataset is visited)."""
    total = np.zeros_like(theta)
    for i in range(dataset.n):
        one = Batch(dataset.X[i : i + 1], dataset.y[i : i + 1])
        _, g = loss_and_grad(net, theta, one)
        total += g * g  # grad of -log p == grad of single-sample CE
    return total / dataset.n


def ewc_penalty_grad(theta: np.ndarray, states: list[EwcState]):
    """Quadratic anchoring penalty summed over past tasks and its gradient."""
    penalty = 0.0
    grad = np.zeros_like(theta)
    for st in states:
        if st.theta_star.shape != theta.shape:
            raise ValueError("parameter length mismatch")
        diff = theta - st.theta_star
        penalty += 0.5 * st.lambda_ewc * float(st.fisher @ (diff * diff))
        grad += st.lambda_ewc * st.fisher * diff
    return penalty, grad
