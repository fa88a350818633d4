"""Episodic memory: per-task reservoir of raw rows with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Batch
from .numerics import RngState


@dataclass
class ReplayBuffer:
    rho: float = 0.1
    stratified: bool = False
    stores: list[tuple[np.ndarray, np.ndarray, int]] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")

    @property
    def size(self) -> int:
        return sum(len(y) for _, y, _ in self.stores)

    @property
    def task_ids(self) -> list[int]:
        return [tid for _, _, tid in self.stores]

    def ingest_task(self, task_data: Batch, task_id: int, rng: RngState) -> None:
        """Keep a uniform without-replacement sample of floor(rho * n) rows
        (at least one when rho > 0), preserving original row order."""
        if task_id in self.task_ids:
            raise ValueError(f"task {task_id} already ingested")
        n = task_data.n
        k = int(self.rho * n)
        if self.rho > 0.0 and n > 0:
            k = max(k, 1)
        if k == 0:
            self.stores.append((task_data.X[:0].copy(),
                                task_data.y[:0].copy(), task_id))
            return
        idx = rng.choose_without_replacement(n, k)
        self.stores.append((task_data.X[idx].copy(),
                            task_data.y[idx].copy(), task_id))

    def sample(self, batch_size: int, rng: RngState) -> Batch:
        """batch_size rows uniform with replacement over the stored union,
        or stratified per task when configured."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        if self.stratified:
            nonempty = [(X, y) for X, y, _ in self.stores if len(y) > 0]
            rows_x, rows_y = [], []
            for i in range(batch_size):
                X, y = nonempty[rng.next_below(len(nonempty))]
                j = rng.next_below(len(y))
                rows_x.append(X[j])
                rows_y.append(y[j])
            return Batch(np.array(rows_x), np.array(rows_y, dtype=np.int64))
        all_x = np.concatenate([X for X, _, _ in self.stores if len(X)])
        all_y = np.concatenate([y for _, y, _ in self.stores if len(y)])
        idx = [rng.next_below(len(all_y)) for _ in range(batch_size)]
        return Batch(all_x[idx], all_y[idx])
