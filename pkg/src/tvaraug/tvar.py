"""Core autoregressive machinery.

The process is x(n+1) = A(n) x(n) + B(n) v(n) with diagonal A and B, so
every channel evolves independently and all operations here reduce to
scalar (or per-channel vectorized) arithmetic. The per-channel coefficients
derive from an interpolation function p(n) and convergence rates:

    a(n) = p(n+1) e^{r1^{n+1}} / (p(n) e^{r1^n})
    b(n) = lam p(n+1) e^{r1^{n+1}} sqrt(g(n+1) - g(n))
    g(l) = (1 - r2^l)^2 e^{-2 r1^l}

which give the closed-form moments

    mean(n) = p(n) e^{r1^n} x~(0)
    var(n)  = lam^2 p(n)^2 (1 - r2^n)^2 noise_std^2

A fitted model is the sum of two such sub-processes with parameters chosen
so that one carries only the mean (its noise gain is exactly zero) and the
other only the covariance (its initial state is exactly zero). The mean
side is then set by (p1, r1_mean, x_tilde0), the covariance side by
(p2, r1_cov, r2_cov, lambda2, noise_std), and the two never interact.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (NegativeRadicand, NonFiniteStats, ZeroInterpValue,
                     DegenerateCovariance)
from .interp import TableInterp, fit_direct, fit_sinusoid, interp_from_payload

MOMENT_MATCHING = "moment_matching"
RAW_VARIANCE = "raw_variance"
_FIT_MODES = (MOMENT_MATCHING, RAW_VARIANCE)

FORMAT_VERSION = 1


def _check_rate(name, value):
    if not (0.0 < value < 1.0):
        raise ValueError(f"{name} must be in (0, 1), got {value}")


@dataclass(frozen=True)
class ChannelTvarParams:
    """Gain and convergence parameters of one channel.

    r1_mean drives the mean-side convergence factor e^{r1^n}; r1_cov and
    r2_cov drive the covariance-side factors; lambda2 is the covariance
    gain; x_tilde0 the scaled initial state of the mean side; noise_std
    the perturbation standard deviation. Defaults follow the
    simplest-choice parameterization: every rate 0.01, unit gains,
    noise_std 0.1.
    """
    r1_mean: float = 0.01
    r1_cov: float = 0.01
    r2_cov: float = 0.01
    lambda2: float = 1.0
    x_tilde0: float = 1.0
    noise_std: float = 0.1

    def __post_init__(self):
        _check_rate("r1_mean", self.r1_mean)
        _check_rate("r1_cov", self.r1_cov)
        _check_rate("r2_cov", self.r2_cov)
        if self.lambda2 == 0.0:
            raise ValueError("lambda2 must be nonzero")
        if not self.noise_std > 0.0:
            raise ValueError("noise_std must be positive")

    def to_payload(self):
        return {
            "r1_mean": self.r1_mean, "r1_cov": self.r1_cov,
            "r2_cov": self.r2_cov, "lambda2": self.lambda2,
            "x_tilde0": self.x_tilde0, "noise_std": self.noise_std,
        }


@dataclass(frozen=True)
class SubProcess:
    """A single (non-decoupled) process: one p, one set of rates.

    This is the form the recursion and the unreduced moment expressions
    act on; the fitted model composes two of these per channel.
    """
    p: object                 # InterpFn
    r1: float
    r2: float
    lam: float
    x_tilde0: float
    noise_std: float = 1.0

    def __post_init__(self):
        _check_rate("r1", self.r1)
        _check_rate("r2", self.r2)
        if self.lam == 0.0:
            raise ValueError("lam must be nonzero")
        if not self.noise_std > 0.0:
            raise ValueError("noise_std must be positive")

    def x0(self):
        # x(0) = Gamma^{-1} x~(0) with Gamma = e^{-1}/p(0)
        return math.e * self.p.eval(0) * self.x_tilde0


# ---------------------------------------------------------------------------
# basis functions and recursion coefficients

def basis_f0(p, r1, n):
    """First basis function: p(n+1) e^{r1^{n+1}} / (p(n) e^{r1^n})."""
    n = int(n)
    denom = p.eval(n) * math.exp(r1 ** n)
    if denom == 0.0:
        raise ZeroDivisionError(f"p({n}) = 0, ratio form undefined")
    return p.eval(n + 1) * math.exp(r1 ** (n + 1)) / denom


def basis_f1(p, lam, r1, r2, n):
    """Second basis function.

    lam p(n+1) e^{r1^{n+1}} sqrt((1-r2^{n+1})^2 / e^{2 r1^{n+1}}
                                 - (1-r2^n)^2 / e^{2 r1^n})

    The radicand is non-negative for rates in (0, 1); a negative value
    signals an invalid rate configuration.
    """
    n = int(n)
    rad = ((1.0 - r2 ** (n + 1)) ** 2 / math.exp(2.0 * r1 ** (n + 1))
           - (1.0 - r2 ** n) ** 2 / math.exp(2.0 * r1 ** n))
    if rad < 0.0:
        raise NegativeRadicand(
            f"radicand {rad} < 0 at n={n} (r1={r1}, r2={r2})")
    return lam * p.eval(n + 1) * math.exp(r1 ** (n + 1)) * math.sqrt(rad)


def _g(r1, r2, l):
    # noise-weight potential; non-decreasing in l for rates in (0, 1),
    # also under floating point (each factor is monotone and non-negative)
    return (1.0 - r2 ** l) ** 2 * math.exp(-2.0 * r1 ** l)


def coeff_a(sub, n):
    """Diagonal entry of A(n) = P(n+1)S(n+1)P^{-1}(n)S^{-1}(n)."""
    n = int(n)
    p_n = sub.p.eval(n)
    if p_n == 0.0:
        raise ZeroDivisionError(f"p({n}) = 0, A(n) undefined")
    return (sub.p.eval(n + 1) * math.exp(sub.r1 ** (n + 1))
            / (p_n * math.exp(sub.r1 ** n)))


def coeff_b(sub, n):
    """Diagonal entry of B(n) = Lam P(n+1) S(n+1) [g(n+1)-g(n)]^{1/2}."""
    n = int(n)
    rad = _g(sub.r1, sub.r2, n + 1) - _g(sub.r1, sub.r2, n)
    if rad < 0.0:
        raise NegativeRadicand(
            f"radicand {rad} < 0 at n={n} (r1={sub.r1}, r2={sub.r2})")
    return (sub.lam * sub.p.eval(n + 1) * math.exp(sub.r1 ** (n + 1))
            * math.sqrt(rad))


# ---------------------------------------------------------------------------
# single sub-process forms (oracle paths)

def mean_closed(sub, t):
    """Closed-form mean of x(t): p(t) e^{r1^t} x~(0)."""
    return sub.p.eval(t) * math.exp(sub.r1 ** int(t)) * sub.x_tilde0


def cov_closed(sub, t):
    """Closed-form variance of x(t): lam^2 p(t)^2 (1-r2^t)^2 Phi."""
    t = int(t)
    return (sub.lam ** 2 * sub.p.eval(t) ** 2 * (1.0 - sub.r2 ** t) ** 2
            * sub.noise_std ** 2)


def mean_prod_form(sub, n):
    """Unreduced product-form mean of x(n+1): prod_{k=0}^{n} a(k) x(0)."""
    out = sub.x0()
    for k in range(int(n) + 1):
        out *= coeff_a(sub, k)
    return out


def cov_sum_form(sub, n):
    """Unreduced sum-form variance of x(n+1).

    {b(n)^2 + sum_{l=0}^{n-1} [b(l) prod_{k=l+1}^{n} a(k)]^2} Phi
    """
    n = int(n)
    total = coeff_b(sub, n) ** 2
    for l in range(n):
        term = coeff_b(sub, l)
        for k in range(l + 1, n + 1):
            term *= coeff_a(sub, k)
        total += term ** 2
    return total * sub.noise_std ** 2


def generate_recursive(subs, noise):
    """Iterate x(n+1) = a(n) x(n) + b(n) v(n) with caller-supplied noise.

    subs: one SubProcess per channel. noise: (T, M) realized noise values
    v(0..T-1). Returns a (T+1, M) series starting at x(0) = e p(0) x~(0).
    Requires p(n) != 0 along the way (the ratio form divides by it).
    """
    noise = np.atleast_2d(np.asarray(noise, dtype=float))
    steps, m = noise.shape
    if m != len(subs):
        raise ValueError(f"noise has {m} channels, expected {len(subs)}")
    out = np.empty((steps + 1, m))
    out[0] = [s.x0() for s in subs]
    for t in range(steps):
        for j, s in enumerate(subs):
            out[t + 1, j] = (coeff_a(s, t) * out[t, j]
                             + coeff_b(s, t) * noise[t, j])
    return out


def generate_closed_single(sub, noise):
    """General-term evaluation of one sub-process under given noise.

    x(t) = p(t) e^{r1^t} [x~(0) + lam sum_{l<t} w(l) v(l)], with
    w(l) = sqrt(g(l+1) - g(l)). Algebraically identical to the recursion
    driven by the same noise values.
    """
    noise = np.asarray(noise, dtype=float)
    steps = noise.shape[0]
    ts = np.arange(steps + 1)
    g = (1.0 - sub.r2 ** ts) ** 2 * np.exp(-2.0 * sub.r1 ** ts)
    rad = np.diff(g)
    if np.any(rad < 0.0):
        raise NegativeRadicand("negative noise-weight radicand")
    acc = np.concatenate(([0.0], np.cumsum(np.sqrt(rad) * noise)))
    p_vals = np.array([sub.p.eval(int(t)) for t in ts])
    return p_vals * np.exp(sub.r1 ** ts) * (sub.x_tilde0 + sub.lam * acc)


# ---------------------------------------------------------------------------
# fitted decoupled model

@dataclass(frozen=True)
class ChannelModel:
    p1: object                  # InterpFn for the mean side
    p2: object                  # InterpFn for the covariance side
    params: ChannelTvarParams


@dataclass(frozen=True)
class TvarModel:
    """Immutable fitted model: two interpolation functions per channel."""
    channels: tuple
    channel_names: tuple
    n_steps: int
    fit_mode: str

    def __post_init__(self):
        if self.fit_mode not in _FIT_MODES:
            raise ValueError(f"unknown fit_mode {self.fit_mode!r}")
        if len(self.channel_names) != len(self.channels):
            raise ValueError("one name per channel required")

    @property
    def n_channels(self):
        return len(self.channels)

    def to_payload(self):
        return {
            "format_version": FORMAT_VERSION,
            "fit_mode": self.fit_mode,
            "n_steps": self.n_steps,
            "channel_names": list(self.channel_names),
            "channels": [
                {"p1": c.p1.to_payload(), "p2": c.p2.to_payload(),
                 "params": c.params.to_payload()}
                for c in self.channels
            ],
        }

    @property
    def fingerprint(self):
        blob = json.dumps(self.to_payload(), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _param_vec(model, name):
    return np.array([getattr(c.params, name) for c in model.channels])


def _interp_values(fn, ns):
    """Evaluate an interpolation function at an integer index array."""
    ns = np.asarray(ns, dtype=int)
    if isinstance(fn, TableInterp):
        if ns.size and (ns.min() < 0 or ns.max() >= fn.n_points):
            from .errors import OutOfRange
            raise OutOfRange(
                f"index range [{ns.min()}, {ns.max()}] outside table")
        return fn.values[ns]
    angles = (2.0 * np.pi * np.multiply.outer(ns, fn.freqs) / fn.n_points
              + fn.phases)
    return (np.cos(angles) * fn.mags).sum(axis=-1) / fn.n_points


def theoretical_mean(model, n):
    """Mean of the fitted process: p1(n) e^{r1_mean^n} x_tilde0 per channel.

    Depends on no covariance-side parameter. `n` may be a scalar or an
    index array; the result has one column per channel.
    """
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    r1 = _param_vec(model, "r1_mean")
    xt0 = _param_vec(model, "x_tilde0")
    p1 = np.column_stack([_interp_values(c.p1, ns) for c in model.channels])
    out = p1 * np.exp(r1 ** ns[:, None]) * xt0
    return out[0] if np.isscalar(n) or np.ndim(n) == 0 else out


def theoretical_cov_diag(model, n):
    """Variance of the fitted process per channel.

    p2(n)^2 (1 - r2_cov^n)^2 lambda2^2 noise_std^2; exactly zero at n=0.
    Depends on no mean-side parameter.
    """
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    r2 = _param_vec(model, "r2_cov")
    lam2 = _param_vec(model, "lambda2")
    std = _param_vec(model, "noise_std")
    p2 = np.column_stack([_interp_values(c.p2, ns) for c in model.channels])
    out = p2 ** 2 * (1.0 - r2 ** ns[:, None]) ** 2 * lam2 ** 2 * std ** 2
    return out[0] if np.isscalar(n) or np.ndim(n) == 0 else out


def build_model(stats, config=None, fit_mode=MOMENT_MATCHING,
                interp_mode="table", sinusoid_order=None,
                channel_names=None):
    """Assemble a model from ensemble statistics.

    p1 is fitted to the mean curve. In moment_matching mode (default) the
    covariance curve is normalized, p2(n) = sqrt(var(n)) / (lambda2 *
    noise_std), so the steady-state variance equals the empirical variance
    exactly. raw_variance mode assigns the variance curve to p2 verbatim
    and requires every fitted p1/p2 value to be nonzero (the ratio-form
    coefficients divide by them). With interp_mode="sinusoid" both final
    curves are smoothed by a truncated sinusoidal fit of the given order
    (default N, which is lossless).
    """
    mean = np.asarray(stats.mean_curve, dtype=float)
    var = np.asarray(stats.var_curve, dtype=float)
    if mean.shape != var.shape or mean.ndim != 2:
        raise ValueError("mean_curve and var_curve must both be (N, M)")
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(var))):
        raise NonFiniteStats("ensemble statistics contain non-finite values")
    if np.any(var < 0.0):
        raise NonFiniteStats("variance curve has negative entries")
    n_steps, m = mean.shape

    if fit_mode not in _FIT_MODES:
        raise ValueError(f"unknown fit_mode {fit_mode!r}")
    if interp_mode not in ("table", "sinusoid"):
        raise ValueError(f"unknown interp_mode {interp_mode!r}")

    if config is None:
        params = [ChannelTvarParams() for _ in range(m)]
    elif isinstance(config, ChannelTvarParams):
        params = [config] * m
    else:
        params = list(config)
        if len(params) != m:
            raise ValueError(f"need {m} parameter sets, got {len(params)}")

    if channel_names is None:
        channel_names = [f"ch{i + 1}" for i in range(m)]
    if len(channel_names) != m:
        raise ValueError("one channel name per channel required")

    order = n_steps if sinusoid_order is None else int(sinusoid_order)

    def make_fn(curve):
        if interp_mode == "sinusoid":
            return fit_sinusoid(curve, order)
        return fit_direct(curve)

    degenerate = [name for name, v in zip(channel_names, var.T)
                  if np.all(v == 0.0)]
    if degenerate and fit_mode == MOMENT_MATCHING:
        warnings.warn(
            f"channels {degenerate} have identically zero empirical "
            "variance; generated series will follow the mean "
            "deterministically", DegenerateCovariance, stacklevel=2)

    channels = []
    for j in range(m):
        prm = params[j]
        if fit_mode == MOMENT_MATCHING:
            p2_curve = np.sqrt(var[:, j]) / (prm.lambda2 * prm.noise_std)
        else:
            p2_curve = var[:, j]
        p1_fn = make_fn(mean[:, j])
        p2_fn = make_fn(p2_curve)
        if fit_mode == RAW_VARIANCE:
            for label, fn in (("p1", p1_fn), ("p2", p2_fn)):
                vals = _interp_values(fn, np.arange(n_steps))
                hits = np.flatnonzero(vals == 0.0)
                if hits.size:
                    raise ZeroInterpValue(
                        f"{label} of channel {channel_names[j]!r} is zero "
                        f"at n={int(hits[0])}; raw_variance mode requires "
                        "nonzero interpolation values")
        channels.append(ChannelModel(p1=p1_fn, p2=p2_fn, params=prm))

    return TvarModel(channels=tuple(channels),
                     channel_names=tuple(channel_names),
                     n_steps=n_steps, fit_mode=fit_mode)


def model_from_payload(payload):
    channels = tuple(
        ChannelModel(p1=interp_from_payload(c["p1"]),
                     p2=interp_from_payload(c["p2"]),
                     params=ChannelTvarParams(**c["params"]))
        for c in payload["channels"]
    )
    return TvarModel(channels=channels,
                     channel_names=tuple(payload["channel_names"]),
                     n_steps=int(payload["n_steps"]),
                     fit_mode=payload["fit_mode"])


# ---------------------------------------------------------------------------
# generation

def derive_seed(batch_seed, index):
    """Per-sample stream seed: uint64 drawn from the seed pair.

    Sample i of a batch seeded with s uses the stream seeded by
    SeedSequence([s, i]); this is the whole reproducibility contract,
    identical (model, s, i) always produce the identical series.
    """
    seq = np.random.SeedSequence(entropy=[int(batch_seed), int(index)])
    return int(seq.generate_state(1, np.uint64)[0])


def _noise_weights(model):
    """Per-step noise weights w(l) = sqrt(g(l+1) - g(l)), shape (N-1, M)."""
    ls = np.arange(model.n_steps, dtype=float)[:, None]
    r1 = _param_vec(model, "r1_cov")
    r2 = _param_vec(model, "r2_cov")
    g = (1.0 - r2 ** ls) ** 2 * np.exp(-2.0 * r1 ** ls)
    rad = np.diff(g, axis=0)
    if np.any(rad < 0.0):
        raise NegativeRadicand("negative noise-weight radicand")
    return np.sqrt(rad)


def _closed_from_noise(model, noise):
    """Closed-form series from realized noise values.

    noise has shape (..., N-1, M); the result has shape (..., N, M) with
    x(0) equal to the deterministic mean term and
    x(n+1) = mean(n+1) + p2(n+1) e^{r1_cov^{n+1}} lambda2
             * sum_{l<=n} w(l) v(l).
    """
    n_steps = model.n_steps
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-2:] != (n_steps - 1, model.n_channels):
        raise ValueError(
            f"noise must end in shape ({n_steps - 1}, {model.n_channels})")
    mean = theoretical_mean(model, np.arange(n_steps))
    weights = _noise_weights(model)
    ts = np.arange(1, n_steps, dtype=float)[:, None]
    r1 = _param_vec(model, "r1_cov")
    lam2 = _param_vec(model, "lambda2")
    p2 = np.column_stack([_interp_values(c.p2, np.arange(1, n_steps))
                          for c in model.channels])
    scale = p2 * np.exp(r1 ** ts) * lam2
    acc = np.cumsum(weights * noise, axis=-2)
    out = np.empty(noise.shape[:-2] + (n_steps, model.n_channels))
    out[..., 0, :] = mean[0]
    out[..., 1:, :] = mean[1:] + scale * acc
    return out


def sample_noise(model, seed):
    """Draw the (N-1, M) realized noise block for one stream seed."""
    rng = np.random.default_rng(int(seed))
    std = _param_vec(model, "noise_std")
    return rng.standard_normal((model.n_steps - 1, model.n_channels)) * std


def generate_closed(model, seed):
    """Generate one (N, M) series, deterministic for a fixed seed."""
    return _closed_from_noise(model, sample_noise(model, seed))
