"""AdamW with decoupled weight decay, plus a reduce-on-plateau scheduler."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import ParameterStore


class DivergedError(RuntimeError):
    """Raised when a gradient or loss stops being finite."""


@dataclass
class AdamW:
    lr: float = 1e-3
    weight_decay: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    moments: dict = field(default_factory=dict)

    def step(self, store: ParameterStore) -> None:
        """Apply one decoupled-weight-decay update to every parameter."""
        self.step_count += 1
        t = self.step_count
        for name, param in store.items():
            g = param.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise DivergedError(f"diverged: non-finite gradient in {name}")
            if name not in self.moments:
                self.moments[name] = (np.zeros_like(param.data), np.zeros_like(param.data))
            m, v = self.moments[name]
            m = self.beta1 * m + (1 - self.beta1) * g
            v = self.beta2 * v + (1 - self.beta2) * g * g
            self.moments[name] = (m, v)
            m_hat = m / (1 - self.beta1 ** t)
            v_hat = v / (1 - self.beta2 ** t)
            param.data = param.data * (1 - self.lr * self.weight_decay)
            param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state(self) -> dict:
        return {
            "step_count": self.step_count,
            "moments": {k: (m.copy(), v.copy()) for k, (m, v) in self.moments.items()},
        }


@dataclass
class ReduceOnPlateau:
    """Halving-style scheduler: decay lr after `patience` epochs without
    improvement of the monitored metric (lower is better)."""

    factor: float = 0.5
    patience: int = 10
    best: float = float("inf")
    stale_epochs: int = 0

    def step(self, metric: float, lr: float) -> float:
        if metric < self.best:
            self.best = metric
            self.stale_epochs = 0
            return lr
        self.stale_epochs += 1
        if self.stale_epochs > self.patience:
            self.stale_epochs = 0
            return lr * self.factor
        return lr
