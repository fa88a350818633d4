"""Mode-connectivity probes: linear interpolation between checkpoints,
accuracy sweeps along the path, weight distance, linear CKA, and the 2-D
embedding-deviation landscape."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Batch, Network, forward, predict_accuracy


@dataclass
class LambdaSweep:
    transition: int
    lambda_grid: np.ndarray
    Ap: np.ndarray
    An: np.ndarray
    Aall: np.ndarray


@dataclass
class LandscapeGrid:
    theta0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    a_grid: np.ndarray
    b_grid: np.ndarray
    values: np.ndarray


def default_lambda_grid(points: int = 21) -> np.ndarray:
    if points < 2:
        raise ValueError("grid needs at least the two endpoints")
    return np.linspace(0.0, 1.0, points)


def interpolate(theta_a: np.ndarray, theta_b: np.ndarray, lam: float) -> np.ndarray:
    """(1 - lam) * theta_a + lam * theta_b; endpoints returned bit-exact."""
    if theta_a.shape != theta_b.shape:
        raise ValueError("parameter layout mismatch")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if lam == 0.0:
        return theta_a.copy()
    if lam == 1.0:
        return theta_b.copy()
    return (1.0 - lam) * theta_a + lam * theta_b


def sweep_lambda(theta_t: np.ndarray, theta_t1: np.ndarray, net: Network,
                 past_evals: list[Batch], new_eval: Batch,
                 grid: np.ndarray | None = None,
                 transition: int = 0) -> LambdaSweep:
    """Accuracy along the linear path between two adjacent checkpoints.

    Ap: mean over the past tasks' eval sets; An: the new task; Aall: unweighted
    mean over all t+1 tasks.
    """
    if grid is None:
        grid = default_lambda_grid()
    grid = np.asarray(grid, dtype=np.float64)
    if len(past_evals) == 0:
        raise ValueError("need at least one past eval set")
    Ap = np.empty(len(grid))
    An = np.empty(len(grid))
    Aall = np.empty(len(grid))
    t = len(past_evals)
    for i, lam in enumerate(grid):
        theta = interpolate(theta_t, theta_t1, float(lam))
        past = [predict_accuracy(net, theta, ev) for ev in past_evals]
        new = predict_accuracy(net, theta, new_eval)
        Ap[i] = np.mean(past)
        An[i] = new
        Aall[i] = (sum(past) + new) / (t + 1)
    return LambdaSweep(transition, grid, Ap, An, Aall)


def weight_distance(theta_a: np.ndarray, theta_b: np.ndarray) -> float:
    """Euclidean distance between two parameter vectors."""
    if theta_a.shape != theta_b.shape:
        raise ValueError("parameter layout mismatch")
    return float(np.sqrt(np.sum((theta_a - theta_b) ** 2)))


def linear_cka(X: np.ndarray, Y: np.ndarray) -> float:
    """Linear centered kernel alignment between two feature matrices (rows are
    paired samples). Invariant to orthogonal transforms and isotropic scaling."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y must be 2-D with matching row counts")
    if X.shape[0] < 2:
        raise ValueError("need at least two samples")
    Xc = X - X.mean(axis=0, keepdims=True)
    Yc = Y - Y.mean(axis=0, keepdims=True)
    xnorm = np.linalg.norm(Xc.T @ Xc)
    ynorm = np.linalg.norm(Yc.T @ Yc)
    if xnorm == 0.0 or ynorm == 0.0:
        raise ValueError("degenerate (constant) representation")
    cross = np.linalg.norm(Yc.T @ Xc) ** 2
    return float(cross / (xnorm * ynorm))


def landscape_grid(theta0: np.ndarray, d1: np.ndarray, d2: np.ndarray,
                   a_grid, b_grid, net: Network, probe: Batch) -> LandscapeGrid:
    """Mean squared embedding deviation of theta0 + a*d1 + b*d2 from theta0
    over a probe batch; exactly zero at the origin by construction."""
    if theta0.shape != d1.shape or theta0.shape != d2.shape:
        raise ValueError("parameter layout mismatch")
    a_grid = np.asarray(a_grid, dtype=np.float64)
    b_grid = np.asarray(b_grid, dtype=np.float64)
    _, z0 = forward(net, theta0, probe.X)
    values = np.empty((len(a_grid), len(b_grid)))
    for i, a in enumerate(a_grid):
        for j, b in enumerate(b_grid):
            if a == 0.0 and b == 0.0:
                values[i, j] = 0.0
                continue
            _, z = forward(net, theta0 + a * d1 + b * d2, probe.X)
            values[i, j] = np.mean((z - z0) ** 2)
    return LandscapeGrid(theta0, d1, d2, a_grid, b_grid, values)
