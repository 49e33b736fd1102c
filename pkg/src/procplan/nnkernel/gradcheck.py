"""Central finite-difference gradient verification.

The checker perturbs parameter entries one at a time, so the loss callable
must be deterministic and re-runnable. Large tensors can be subsampled with a
seeded coordinate draw; the report carries the worst relative error seen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ParameterStore


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    checked: int

    def ok(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def _rel_error(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale < 1e-7:
        # Both effectively zero: compare absolutely against the FD noise floor.
        return 0.0 if abs(a - b) < 1e-9 else abs(a - b)
    return abs(a - b) / max(scale, 1e-6)


def finite_diff_check(loss_fn, store: ParameterStore, h: float = 1e-5,
                      max_coords_per_param: int | None = None,
                      seed: int = 0) -> GradCheckReport:
    """Compare analytic gradients of `loss_fn(store)` against central
    differences, coordinate by coordinate.

    loss_fn must build a fresh graph, call backward, and return the scalar
    loss; gradients are read from the store afterwards.
    """
    store.zero_grad()
    loss_fn(store)
    analytic = {name: p.grad.copy() for name, p in store.items()}

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_param = ""
    checked = 0
    for name, param in store.items():
        flat = param.data.reshape(-1)
        n = flat.size
        if max_coords_per_param is not None and n > max_coords_per_param:
            coords = rng.choice(n, size=max_coords_per_param, replace=False)
        else:
            coords = np.arange(n)
        grad_flat = analytic[name].reshape(-1)
        for c in coords:
            original = flat[c]
            flat[c] = original + h
            store.zero_grad()
            up = float(loss_fn(store).data)
            flat[c] = original - h
            store.zero_grad()
            down = float(loss_fn(store).data)
            flat[c] = original
            fd = (up - down) / (2 * h)
            err = _rel_error(fd, float(grad_flat[c]))
            checked += 1
            if err > worst:
                worst = err
                worst_param = f"{name}[{c}]"
    store.zero_grad()
    return GradCheckReport(max_rel_error=worst, worst_param=worst_param, checked=checked)
