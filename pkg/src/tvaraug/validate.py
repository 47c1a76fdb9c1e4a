"""Moment-fidelity checks and prognostics metrics.

monte_carlo_moments drives a model through many seeded realizations and
compares the ensemble statistics against the closed-form moments; the
accumulation is shifted by the theoretical mean curve, so the variance at
the deterministic origin comes out exactly zero instead of merely small.
compare_to_source holds a generated batch against the empirical statistics
it was fitted to. Both return a ValidationReport.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, ShapeMismatch
from .tvar import derive_seed, sample_noise, theoretical_cov_diag, \
    theoretical_mean, _closed_from_noise

_CHUNK = 2048


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds for moment checks.

    Defaults assume Monte-Carlo sampling error at K around 50,000. The
    variance check starts at var_min_step because the variance envelope
    (1 - r2^n)^2 is near zero for small n, which makes relative error
    ill-conditioned there.
    """
    mean_z_max: float = 4.0
    mean_fraction: float = 0.99
    var_rel_max: float = 0.05
    var_min_step: int = 5
    cross_corr_max: float = 0.05

    def to_payload(self):
        return {
            "mean_z_max": self.mean_z_max,
            "mean_fraction": self.mean_fraction,
            "var_rel_max": self.var_rel_max,
            "var_min_step": self.var_min_step,
            "cross_corr_max": self.cross_corr_max,
        }


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    n_realizations: int
    mean_gap: np.ndarray        # (N, M) empirical minus reference mean
    mean_z: np.ndarray          # (N, M) gap in estimator standard errors
    var_rel_err: np.ndarray     # (N, M), nan where the reference var is 0
    var_at_origin: float
    max_cross_corr: float
    mean_fraction_ok: float
    mean_ok: bool
    var_ok: bool
    cross_ok: bool
    passed: bool
    low_confidence: bool
    tolerances: Tolerances

    def to_payload(self):
        t = self.tolerances
        checked = self.var_rel_err[t.var_min_step:]
        max_var_err = float(np.nanmax(checked)) if checked.size else 0.0
        finite_z = self.mean_z[np.isfinite(self.mean_z)]
        return {
            "kind": self.kind,
            "n_realizations": self.n_realizations,
            "passed": self.passed,
            "low_confidence": self.low_confidence,
            "checks": {
                "mean": {"ok": self.mean_ok,
                         "fraction_within": self.mean_fraction_ok,
                         "max_abs_z": float(np.max(np.abs(self.mean_z)))
                         if self.mean_z.size else 0.0,
                         "max_abs_z_finite": float(np.max(np.abs(finite_z)))
                         if finite_z.size else 0.0},
                "variance": {"ok": self.var_ok,
                             "max_rel_err_checked": max_var_err,
                             "var_at_origin": self.var_at_origin},
                "cross_correlation": {"ok": self.cross_ok,
                                      "max_abs": self.max_cross_corr},
            },
            "tolerances": t.to_payload(),
        }

    def summary_lines(self):
        p = self.to_payload()
        c = p["checks"]

        def mark(ok):
            return "pass" if ok else "FAIL"

        lines = [
            f"{self.kind} report over {self.n_realizations} realizations",
            f"  mean      {mark(self.mean_ok)}  "
            f"fraction |z| < {self.tolerances.mean_z_max:g}: "
            f"{self.mean_fraction_ok:.4f} "
            f"(need >= {self.tolerances.mean_fraction:g})",
            f"  variance  {mark(self.var_ok)}  max relative error "
            f"(n >= {self.tolerances.var_min_step}): "
            f"{c['variance']['max_rel_err_checked']:.4g} "
            f"(need < {self.tolerances.var_rel_max:g}); "
            f"var at origin: {self.var_at_origin:.4g}",
            f"  cross-corr {mark(self.cross_ok)} max |rho|: "
            f"{self.max_cross_corr:.4g} "
            f"(need < {self.tolerances.cross_corr_max:g})",
            f"  overall   {mark(self.passed)}",
        ]
        if self.low_confidence:
            lines.append("  note: too few realizations for stable "
                         "estimates, result is low-confidence")
        return lines


def _finish_report(kind, k, mean_gap, mean_z, var_rel_err, var_at_origin,
                   max_cross_corr, tolerances, low_confidence):
    t = tolerances
    frac = float(np.mean(np.abs(mean_z) < t.mean_z_max)) if mean_z.size else 1.0
    mean_ok = frac >= t.mean_fraction
    checked = var_rel_err[t.var_min_step:]
    checked = checked[np.isfinite(checked)]
    var_ok = bool(checked.size == 0 or np.max(checked) < t.var_rel_max)
    cross_ok = max_cross_corr < t.cross_corr_max
    return ValidationReport(
        kind=kind, n_realizations=int(k), mean_gap=mean_gap, mean_z=mean_z,
        var_rel_err=var_rel_err, var_at_origin=float(var_at_origin),
        max_cross_corr=float(max_cross_corr), mean_fraction_ok=frac,
        mean_ok=mean_ok, var_ok=var_ok, cross_ok=cross_ok,
        passed=bool(mean_ok and var_ok and cross_ok),
        low_confidence=low_confidence, tolerances=t)


def _z_scores(gap, sd):
    """gap / sd, with exact-zero gaps at zero sd counting as perfect."""
    z = np.empty_like(gap)
    zero = sd == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        z[~zero] = gap[~zero] / sd[~zero]
    z[zero] = np.where(gap[zero] == 0.0, 0.0, np.inf)
    return z


def _rel_err(est, ref):
    out = np.full(ref.shape, np.nan)
    pos = ref > 0.0
    out[pos] = np.abs(est[pos] - ref[pos]) / ref[pos]
    return out


def _cross_corr_max(cov, var):
    """Largest |correlation| over off-diagonal pairs and steps with
    positive variance on both channels."""
    n, m = var.shape
    if m < 2:
        return 0.0
    sd = np.sqrt(np.maximum(var, 0.0))
    denom = sd[:, :, None] * sd[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.abs(cov) / denom
    corr[denom == 0.0] = 0.0
    off = ~np.eye(m, dtype=bool)
    return float(np.max(corr[:, off])) if n else 0.0


def monte_carlo_moments(model, n_realizations, seed=0, tolerances=None,
                        chunk_size=_CHUNK):
    """Check a model's generator against its own closed-form moments.

    Draws n_realizations series (the same seed streams augment() would
    use), accumulates shifted sums chunk by chunk in a fixed order, and
    scores the empirical mean per grid point in units of its estimator
    standard error sqrt(var_theoretical / K). Deterministic for fixed
    (model, n_realizations, seed).
    """
    k = int(n_realizations)
    if k < 100:
        raise ValueError(f"n_realizations must be >= 100, got {k}")
    t = tolerances or Tolerances()
    n, m = model.n_steps, model.n_channels

    ref_mean = theoretical_mean(model, np.arange(n))
    ref_var = theoretical_cov_diag(model, np.arange(n))

    s1 = np.zeros((n, m))
    s2 = np.zeros((n, m))
    sxp = np.zeros((n, m, m))
    done = 0
    while done < k:
        size = min(chunk_size, k - done)
        noise = np.stack([sample_noise(model, derive_seed(seed, done + i))
                          for i in range(size)])
        delta = _closed_from_noise(model, noise) - ref_mean
        s1 += delta.sum(axis=0)
        s2 += (delta * delta).sum(axis=0)
        sxp += np.einsum("knm,knp->nmp", delta, delta)
        done += size

    d_bar = s1 / k
    emp_mean = ref_mean + d_bar
    emp_var = s2 / k - d_bar ** 2
    emp_cov = sxp / k - d_bar[:, :, None] * d_bar[:, None, :]

    mean_gap = emp_mean - ref_mean
    mean_z = _z_scores(mean_gap, np.sqrt(ref_var / k))
    var_rel_err = _rel_err(emp_var, ref_var)
    var_at_origin = float(np.max(np.abs(emp_var[0]))) if n else 0.0
    max_cross = _cross_corr_max(emp_cov, emp_var)

    return _finish_report("monte_carlo", k, mean_gap, mean_z, var_rel_err,
                          var_at_origin, max_cross, t,
                          low_confidence=False)


def compare_to_source(batch, source_stats, tolerances=None):
    """Check a generated batch against the statistics it was fitted to.

    The comparison is meaningful from var_min_step on: below it the
    convergence envelopes have not flattened yet, so the generator is not
    supposed to reproduce the source there (its variance starts at an
    exact zero regardless of the source). Mean gaps are scored in units
    of sqrt(batch variance / L).
    """
    t = tolerances or Tolerances()
    series = batch.series
    k, n, m = series.shape
    mean_src = np.asarray(source_stats.mean_curve, dtype=float)
    var_src = np.asarray(source_stats.var_curve, dtype=float)
    if mean_src.shape != (n, m):
        raise ShapeMismatch(
            f"source stats are {mean_src.shape}, batch is ({n}, {m})")

    shift = series[0]
    delta = series - shift
    d_bar = delta.mean(axis=0)
    emp_mean = shift + d_bar
    dev = delta - d_bar
    emp_var = np.mean(dev * dev, axis=0)
    emp_cov = np.einsum("knm,knp->nmp", dev, dev) / k

    mean_gap = emp_mean - mean_src
    mean_z = _z_scores(mean_gap, np.sqrt(emp_var / k))
    var_rel_err = _rel_err(emp_var, var_src)
    var_at_origin = float(np.max(np.abs(emp_var[0]))) if n else 0.0
    max_cross = _cross_corr_max(emp_cov, emp_var)

    # below var_min_step the mean carries its startup factor, exclude it
    # from the scored region the same way the variance check does
    mean_z[:t.var_min_step] = 0.0

    return _finish_report("source_comparison", k, mean_gap, mean_z,
                          var_rel_err, var_at_origin, max_cross, t,
                          low_confidence=k < 30)


def phm_score(predicted_rul, true_rul):
    """Asymmetric exponential penalty on RUL errors.

    Late predictions (positive error d) cost e^{d/10} - 1 each, early
    ones e^{-d/13} - 1, so lateness is punished harder at equal |d|.
    """
    pred = np.asarray(predicted_rul, dtype=float)
    true = np.asarray(true_rul, dtype=float)
    if pred.shape != true.shape or pred.ndim != 1 or pred.size < 1:
        raise LengthMismatch(
            f"need equal-length 1-d inputs, got {pred.shape} and {true.shape}")
    d = pred - true
    return float(np.sum(np.where(d < 0.0,
                                 np.exp(-d / 13.0) - 1.0,
                                 np.exp(d / 10.0) - 1.0)))


def rmse(predicted, true):
    pred = np.asarray(predicted, dtype=float)
    true = np.asarray(true, dtype=float)
    if pred.shape != true.shape or pred.ndim != 1 or pred.size < 1:
        raise LengthMismatch(
            f"need equal-length 1-d inputs, got {pred.shape} and {true.shape}")
    return float(math.sqrt(np.mean((pred - true) ** 2)))
