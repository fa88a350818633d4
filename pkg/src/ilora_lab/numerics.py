"""Deterministic dense linear algebra, seeded RNG, and a finite-difference oracle.

All numeric state is float64 numpy. The matmul kernel accumulates over the
inner dimension in ascending order so results are bit-identical to a naive
triple loop, independent of BLAS build details.

RNG contract (xorshift64*, seeded through splitmix64):

    state' = xorshift64*(state)
    u64    = (state' * 0x2545F4914F6CDD1D) mod 2^64
    f      = (u64 >> 11) * 2^-53          # uniform in [0, 1)

Reference stream for seed=1, first five uniforms:
    0.29404672187536496, 0.8432913574055981, 0.37141301636381596,
    0.23114710925829274, 0.8590431711703592
(regenerate with ``RngState(1).next_float()``).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_XORSHIFT_MULT = 0x2545F4914F6CDD1D
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RngState:
    """xorshift64* generator; single-owner mutable, no platform entropy."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        state = _splitmix64(self.seed)
        if state == 0:
            state = _SPLITMIX_GAMMA
        self._state = state

    def next_u64(self) -> int:
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK64
        x ^= (x >> 27)
        self._state = x
        return (x * _XORSHIFT_MULT) & _MASK64

    def next_float(self) -> float:
        """Uniform in [0, 1), 53 bits of mantissa."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n). One uniform draw per call."""
        if n <= 0:
            raise ValueError("next_below requires n >= 1")
        return int(self.next_float() * n)

    def choose_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from [0, n), ascending. Consumes exactly k draws."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return sorted(idx[:k])

    def gauss_pair(self) -> tuple[float, float]:
        """One Box-Muller pair; consumes exactly two uniforms."""
        u1 = self.next_float()
        u2 = self.next_float()
        if u1 == 0.0:
            u1 = 2.0 ** -53
        r = math.sqrt(-2.0 * math.log(u1))
        a = 2.0 * math.pi * u2
        return r * math.cos(a), r * math.sin(a)


def as_matrix(data) -> np.ndarray:
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected 2-D matrix, got ndim={m.ndim}")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Deterministic product: accumulation over k ascending, bit-equal to the
    naive triple loop."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]))
    for k in range(a.shape[1]):
        out += a[:, k : k + 1] * b[k : k + 1, :]
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("non-finite entries in matmul result")
    return out


def gaussian_fill(rng: RngState, rows: int, cols: int,
                  mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """rows x cols matrix of i.i.d. Gaussians via Box-Muller.

    Consumes 2*ceil(rows*cols/2) uniform draws; the trailing value of an odd
    request's final pair is discarded.
    """
    if std < 0:
        raise ValueError("std must be >= 0")
    n = rows * cols
    vals = np.empty(n)
    for i in range(0, n - 1, 2):
        vals[i], vals[i + 1] = rng.gauss_pair()
    if n % 2 == 1:
        vals[n - 1], _ = rng.gauss_pair()
    return (mean + std * vals).reshape(rows, cols)


def finite_diff_grad(loss_fn, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient oracle: (f(t+h e_i) - f(t-h e_i)) / 2h."""
    if h <= 0:
        raise ValueError("h must be > 0")
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        bump = np.zeros_like(theta)
        bump[i] = h
        fp = loss_fn(theta + bump)
        fm = loss_fn(theta - bump)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ArithmeticError("non-finite loss value in finite_diff_grad")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad
