"""Shared helpers for the test suite."""

import numpy as np

from tvaraug import SubProcess, TableInterp, dataset_from_arrays


def random_subprocess(rng, n_points=None, positive_p=True):
    """Draw a SubProcess with rates in (0,1), nonzero gain, positive p."""
    n = n_points or int(rng.integers(3, 51))
    if positive_p:
        p = rng.uniform(0.1, 5.0, size=n)
    else:
        p = rng.uniform(-5.0, 5.0, size=n)
    lam = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
    return SubProcess(
        p=TableInterp(p),
        r1=float(rng.uniform(1e-6, 1.0 - 1e-9)),
        r2=float(rng.uniform(1e-6, 1.0 - 1e-9)),
        lam=float(lam),
        x_tilde0=float(rng.uniform(-3.0, 3.0)),
        noise_std=float(rng.uniform(0.05, 2.0)),
    )


def make_source_dataset(rng, n_units=5, n_steps=60, n_channels=3,
                        noise_scale=0.4):
    """Aligned units around smooth per-channel trends, never near zero."""
    ns = np.arange(n_steps)
    base = np.stack(
        [3.0 + m + np.sin(ns / (4.0 + m)) + 0.01 * m * ns
         for m in range(n_channels)], axis=1)
    units = [base + rng.normal(scale=noise_scale, size=base.shape)
             for _ in range(n_units)]
    names = [f"s{m + 1}" for m in range(n_channels)]
    return dataset_from_arrays(units, names)
