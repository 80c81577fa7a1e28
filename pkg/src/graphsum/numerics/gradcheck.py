"""Central finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

import numpy as np


def finite_difference_check(fn, params, eps=1e-5, rng=None,
                            max_coords_per_param=16):
    """Compare autodiff gradients of ``fn`` against central differences.

    ``fn`` must rebuild the scalar loss from scratch on every call (it reads
    the current ``.data`` of each parameter) and must be deterministic, so
    dropout has to be disabled. Large tensors are probed at
    ``max_coords_per_param`` sampled coordinates. Returns the worst relative
    error max(|ad - fd|) / max(|ad|, |fd|, 1e-6) over all probed coordinates.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if rng is None:
        rng = np.random.default_rng(0)

    for p in params:
        p.grad = None
    loss = fn()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy()
                for p in params]
    for p in params:
        p.grad = None

    worst = 0.0
    for p, ad in zip(params, analytic):
        flat = p.data.reshape(-1)
        n = flat.shape[0]
        if n <= max_coords_per_param:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords_per_param, replace=False)
        ad_flat = ad.reshape(-1)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            f_plus = fn().item()
            flat[c] = orig - eps
            f_minus = fn().item()
            flat[c] = orig
            fd = (f_plus - f_minus) / (2.0 * eps)
            err = abs(ad_flat[c] - fd) / max(abs(ad_flat[c]), abs(fd), 1e-6)
            if err > worst:
                worst = err
    return worst
