"""Damped Newton iteration on a batch of square systems."""

from __future__ import annotations

from typing import Callable

import numpy as np

System = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def damped_newton(system: System, z: np.ndarray, max_iters: int, scale: float = 1.0,
                  stall_limit: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Run Newton on every row of ``z`` and return the final points and residual norms.

    ``system(z)`` returns ``F`` of shape ``(B, m)`` and ``J`` of shape ``(B, m, m)``.
    Steps use a pseudo-inverse so singular Jacobians do not abort the batch,
    and are halved (up to 12 times) while the residual grows.  Rows that
    converge, or fail to halve their best residual for ``stall_limit``
    iterations, are frozen.
    """
    z = np.array(z, dtype=float)
    F, J = system(z)
    fn = np.linalg.norm(F, axis=1)
    best = fn.copy()
    stall = np.zeros(len(z), dtype=int)
    live = np.arange(len(z))
    for _ in range(max_iters):
        live = live[(fn[live] > 1e-15 * scale) & (stall[live] < stall_limit)]
        if live.size == 0:
            break
        zl, Fl, fl = z[live], F[live], fn[live]
        step = -np.einsum("zij,zj->zi", np.linalg.pinv(J[live], rcond=1e-13), Fl)
        alpha = np.ones(live.size)
        for _ in range(12):
            trial = zl + alpha[:, None] * step
            tF, tJ = system(trial)
            tfn = np.linalg.norm(tF, axis=1)
            worse = ~(tfn <= fl)
            if not np.any(worse):
                break
            alpha = np.where(worse, 0.5 * alpha, alpha)
        z[live], F[live], J[live], fn[live] = trial, tF, tJ, tfn
        improved = fn[live] < 0.5 * best[live]
        stall[live] = np.where(improved, 0, stall[live] + 1)
        best[live] = np.minimum(best[live], fn[live])
    return z, fn
