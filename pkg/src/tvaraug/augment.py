"""End-to-end augmentation workflow and model persistence.

fit() turns an aligned dataset into a model (ensemble statistics, curve
fitting, parameter assembly); augment() draws a batch of synthetic series
from it. Models round-trip through a versioned JSON document whose floats
are serialized with shortest round-trip precision, so a saved model
regenerates bit-identical series for identical seeds.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import ALIGN_BY_TIME, dataset_from_arrays
from .errors import CorruptModel, SchemaVersionMismatch
from .stats import ensemble_stats
from .tvar import (FORMAT_VERSION, MOMENT_MATCHING, build_model, derive_seed,
                   generate_closed, model_from_payload)


@dataclass(frozen=True)
class SyntheticBatch:
    """A batch of generated series plus everything needed to reproduce it."""
    series: np.ndarray          # (L, N, M)
    seed: int
    model_fingerprint: str
    created_at: float = field(default_factory=time.time, compare=False)

    def __post_init__(self):
        if self.series.ndim != 3:
            raise ValueError("series must have shape (L, N, M)")
        if not np.all(np.isfinite(self.series)):
            raise ValueError("series contain non-finite values")

    @property
    def n_samples(self):
        return self.series.shape[0]

    @property
    def n_steps(self):
        return self.series.shape[1]

    @property
    def n_channels(self):
        return self.series.shape[2]


def fit(ds, config=None, fit_mode=MOMENT_MATCHING, interp_mode="table",
        sinusoid_order=None):
    """Fit a model to a dataset: ensemble statistics, then curve fitting.

    A pure function of (dataset, arguments): identical inputs produce a
    model with an identical fingerprint.
    """
    st = ensemble_stats(ds)
    return build_model(st, config=config, fit_mode=fit_mode,
                       interp_mode=interp_mode, sinusoid_order=sinusoid_order,
                       channel_names=ds.channel_names)


def augment(model, n_samples, seed=0):
    """Generate n_samples independent synthetic series.

    Sample i uses the stream seeded by derive_seed(seed, i), so the batch
    is deterministic for fixed (model, n_samples, seed) and sample i is
    the same whether generated alone or as part of a larger batch.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    series = np.stack([generate_closed(model, derive_seed(seed, i))
                       for i in range(n_samples)])
    return SyntheticBatch(series=series, seed=int(seed),
                          model_fingerprint=model.fingerprint)


def batch_to_dataset(batch, channel_names):
    """Wrap a batch as a dataset with unit ids aug_0001, aug_0002, ..."""
    ids = tuple(f"aug_{i + 1:04d}" for i in range(batch.n_samples))
    return dataset_from_arrays(list(batch.series), list(channel_names),
                               alignment=ALIGN_BY_TIME, time_origin=0,
                               unit_ids=ids)


def save_model(model, path):
    """Write a model as versioned JSON (format_version 1)."""
    payload = model.to_payload()
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_model(path):
    """Read a model written by save_model.

    Raises SchemaVersionMismatch for a parseable file declaring a
    different format_version, CorruptModel for anything else that is not
    a well-formed model document.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        payload = json.loads(text)
    except ValueError as exc:
        raise CorruptModel(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise CorruptModel(f"{path}: top level is not an object")
    version = payload.get("format_version")
    if version is None:
        raise CorruptModel(f"{path}: missing format_version")
    if version != FORMAT_VERSION:
        raise SchemaVersionMismatch(
            f"{path}: format_version {version!r}, this reader handles "
            f"{FORMAT_VERSION}")
    try:
        return model_from_payload(payload)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModel(f"{path}: malformed model document ({exc})") from exc
