"""Ensemble statistics: per-timestep moments across the units of a dataset.

Mean and covariance are computed across the J units at each timestep with
population normalization (divide by J, not J-1). Accumulation is done on
values shifted by the first unit; this is algebraically identical but keeps
degenerate ensembles exact, in particular the variance of J identical values
comes out as exactly zero.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class EnsembleStats:
    mean_curve: np.ndarray              # (N, M)
    var_curve: np.ndarray               # (N, M), diagonal of the covariance
    full_cov: Optional[np.ndarray] = None   # (N, M, M) when requested

    @property
    def n_steps(self):
        return self.mean_curve.shape[0]

    @property
    def n_channels(self):
        return self.mean_curve.shape[1]


def _stacked(ds):
    return np.stack([np.asarray(u, dtype=float) for u in ds.units])


def moments_from_array(stacked, full=False):
    """Shifted two-pass moments of a (J, N, M) array."""
    shift = stacked[0]
    delta = stacked - shift
    delta_bar = delta.mean(axis=0)
    mean = shift + delta_bar
    dev = delta - delta_bar
    if full:
        j = stacked.shape[0]
        cov = np.einsum("jnm,jnp->nmp", dev, dev) / j
        var = np.ascontiguousarray(np.diagonal(cov, axis1=1, axis2=2))
        return mean, var, cov
    var = np.mean(dev * dev, axis=0)
    return mean, var, None


def ensemble_mean(ds):
    return moments_from_array(_stacked(ds))[0]


def ensemble_cov(ds, full=False):
    _, var, cov = moments_from_array(_stacked(ds), full=full)
    return (var, cov) if full else var


def ensemble_stats(ds, full=False):
    mean, var, cov = moments_from_array(_stacked(ds), full=full)
    return EnsembleStats(mean_curve=mean, var_curve=var, full_cov=cov)
