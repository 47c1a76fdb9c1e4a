"""Per-channel interpolation functions over discrete time.

Two representations are supported: a direct value table of length N, and a
truncated sinusoidal expansion obtained by keeping the most significant bins
of the curve's DFT. Both evaluate at integer time indices; the sinusoid form
extends periodically beyond the fitted window.
"""

import numpy as np

from .errors import InvalidOrder, OutOfRange


class TableInterp:
    """Value table, eval(n) returns curve[n] exactly."""

    kind = "table"

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("table requires a non-empty 1-d curve")
        if not np.all(np.isfinite(values)):
            raise ValueError("table values must be finite")
        self.values = values.copy()
        self.values.flags.writeable = False
        self.n_points = int(values.size)

    def eval(self, n):
        n = int(n)
        if n < 0 or n >= self.n_points:
            raise OutOfRange(
                f"table index {n} outside [0, {self.n_points - 1}]")
        return float(self.values[n])

    def eval_grid(self):
        return self.values

    def to_payload(self):
        return {"kind": self.kind, "values": [float(v) for v in self.values]}

    def __eq__(self, other):
        return (isinstance(other, TableInterp)
                and np.array_equal(self.values, other.values))


class SinusoidInterp:
    """Truncated sinusoidal expansion of a length-N curve.

    Stores (freq_index, magnitude, phase) triples from the curve's DFT,
    ordered by non-increasing magnitude. Evaluation sums
    magnitude * cos(2*pi*k*n/N + phase) over the retained bins and divides
    by N, which is the real part of the truncated inverse DFT.
    """

    kind = "sinusoid"

    def __init__(self, n_points, freqs, mags, phases):
        freqs = np.asarray(freqs, dtype=int)
        mags = np.asarray(mags, dtype=float)
        phases = np.asarray(phases, dtype=float)
        if not (freqs.size == mags.size == phases.size):
            raise ValueError("term arrays must have equal length")
        if freqs.size > n_points or len(set(freqs.tolist())) != freqs.size:
            raise ValueError("term count must be <= N with distinct bins")
        if np.any(mags < 0) or not np.all(np.isfinite(mags)):
            raise ValueError("magnitudes must be finite and non-negative")
        self.n_points = int(n_points)
        for a in (freqs, mags, phases):
            a.flags.writeable = False
        self.freqs = freqs
        self.mags = mags
        self.phases = phases

    def eval(self, n):
        n = int(n)
        angles = 2.0 * np.pi * self.freqs * n / self.n_points + self.phases
        return float(np.sum(self.mags * np.cos(angles)) / self.n_points)

    def eval_grid(self):
        ns = np.arange(self.n_points)
        angles = (2.0 * np.pi * np.outer(ns, self.freqs) / self.n_points
                  + self.phases)
        return (np.cos(angles) * self.mags).sum(axis=1) / self.n_points

    def to_payload(self):
        return {
            "kind": self.kind,
            "n_points": self.n_points,
            "terms": [[int(k), float(m), float(p)] for k, m, p in
                      zip(self.freqs, self.mags, self.phases)],
        }

    def __eq__(self, other):
        return (isinstance(other, SinusoidInterp)
                and self.n_points == other.n_points
                and np.array_equal(self.freqs, other.freqs)
                and np.array_equal(self.mags, other.mags)
                and np.array_equal(self.phases, other.phases))


def fit_direct(curve):
    """Wrap an empirical curve as a value table (the default fit)."""
    return TableInterp(curve)


def fit_sinusoid(curve, order):
    """Fit a truncated sinusoidal expansion of the given order.

    The curve's DFT bins are sorted by descending magnitude (ties broken
    toward the lower frequency index) and retained greedily until at least
    `order` bins are kept. A retained non-DC, non-Nyquist bin always pulls
    in its conjugate partner, otherwise the real reconstruction would halve
    that component's amplitude; the realized term count may therefore
    exceed `order` by one, but never exceeds N.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 1 or curve.size < 2:
        raise ValueError("sinusoid fit requires a 1-d curve with N >= 2")
    if not np.all(np.isfinite(curve)):
        raise ValueError("curve must be finite")
    n = curve.size
    order = int(order)
    if order < 1 or order > n:
        raise InvalidOrder(f"order {order} outside [1, {n}]")

    spectrum = np.fft.fft(curve)
    mags = np.abs(spectrum)
    # lexsort keys are applied last-key-major: primary descending magnitude,
    # secondary ascending bin index.
    ranked = np.lexsort((np.arange(n), -mags))

    retained = []
    seen = set()
    for k in ranked:
        if len(retained) >= order:
            break
        k = int(k)
        if k in seen:
            continue
        seen.add(k)
        retained.append(k)
        partner = (n - k) % n
        if partner != k and partner not in seen:
            seen.add(partner)
            retained.append(partner)

    retained = np.array(retained, dtype=int)
    kept_mags = mags[retained]
    kept_phases = np.angle(spectrum[retained])
    # store in non-increasing magnitude order, ties toward lower bin index
    store = np.lexsort((retained, -kept_mags))
    return SinusoidInterp(n, retained[store], kept_mags[store],
                          kept_phases[store])


def eval_interp(fn, n):
    """Evaluate an interpolation function at integer time n."""
    return fn.eval(n)


def interp_from_payload(payload):
    kind = payload.get("kind")
    if kind == "table":
        return TableInterp(payload["values"])
    if kind == "sinusoid":
        terms = payload["terms"]
        freqs = [t[0] for t in terms]
        mags = [t[1] for t in terms]
        phases = [t[2] for t in terms]
        return SinusoidInterp(payload["n_points"], freqs, mags, phases)
    raise ValueError(f"unknown interpolation kind: {kind!r}")
