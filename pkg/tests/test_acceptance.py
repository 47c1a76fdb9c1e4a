"""Acceptance suite: one test per shipped guarantee, at the stated
tolerances. Each test prints a single pass line on success; a failure
reads as the corresponding criterion failing."""

import json
import math
import time

import numpy as np

from tvaraug import (ChannelTvarParams, SubProcess, TableInterp, cov_closed,
                     cov_sum_form, dataset_from_arrays, fit, fit_sinusoid,
                     generate_closed_single, generate_recursive, mean_closed,
                     mean_prod_form, moments_from_array, monte_carlo_moments,
                     phm_score, theoretical_cov_diag, theoretical_mean,
                     write_dataset)
from tvaraug.cli import run
from tvaraug.tvar import ChannelModel, MOMENT_MATCHING, TvarModel

from test_stats import brute_force_moments


def draw_subprocess(rng):
    """Random valid parameters: rates in (0,1), nonzero gain, strictly
    positive p table, N <= 50."""
    n = int(rng.integers(2, 51))
    return SubProcess(
        p=TableInterp(rng.uniform(0.1, 5.0, size=n)),
        r1=float(rng.uniform(1e-6, 1.0 - 1e-9)),
        r2=float(rng.uniform(1e-6, 1.0 - 1e-9)),
        lam=float(rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])),
        x_tilde0=float(rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0])),
        noise_std=float(rng.uniform(0.05, 2.0)),
    )


def test_criterion_1_unreduced_forms_agree_with_closed_forms():
    rng = np.random.default_rng(20260816)
    t0 = time.perf_counter()
    draws = 120
    for _ in range(draws):
        m = int(rng.integers(1, 5))
        subs = [draw_subprocess(rng) for _ in range(m)]
        for sub in subs:
            n = int(rng.integers(0, sub.p.n_points - 1))
            mean_u = mean_prod_form(sub, n)
            mean_c = mean_closed(sub, n + 1)
            assert abs(mean_u - mean_c) < 1e-10 * abs(mean_c)
            cov_u = cov_sum_form(sub, n)
            cov_c = cov_closed(sub, n + 1)
            assert abs(cov_u - cov_c) < 1e-10 * abs(cov_c)
        steps = min(s.p.n_points for s in subs) - 1
        noise = rng.normal(size=(steps, m)) * [s.noise_std for s in subs]
        rec = generate_recursive(subs, noise)
        for j, sub in enumerate(subs):
            closed = generate_closed_single(sub, noise[:, j])
            assert np.max(np.abs(rec[:, j] - closed)) < 1e-8
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(f"criterion 1 PASS: closed vs unreduced mean/cov (<1e-10 rel) "
          f"and recursion vs general term (<1e-8 abs), {draws} draws, "
          f"{elapsed:.2f}s")


def test_criterion_2_noise_weight_telescoping_and_radicand():
    rng = np.random.default_rng(20260817)
    for _ in range(300):
        r1 = float(rng.uniform(1e-6, 1.0 - 1e-9))
        r2 = float(rng.uniform(1e-6, 1.0 - 1e-9))
        n = int(rng.integers(1, 1001))
        ls = np.arange(n + 2, dtype=float)
        g = (1.0 - r2 ** ls) ** 2 * np.exp(-2.0 * r1 ** ls)
        rad = np.diff(g)
        assert np.all(rad >= 0.0)
        total = float(np.sum(rad))
        assert abs(total - g[-1]) <= 1e-12 * max(1.0, abs(g[-1]))
    print("criterion 2 PASS: per-step radicands non-negative and "
          "telescoping to g(n+1) within 1e-12, 300 draws, l <= 1000")


def test_criterion_3_monte_carlo_moment_fidelity():
    # default parameterization, moment-matching fit of a 5-unit source
    rng = np.random.default_rng(12345)
    n_steps, n_channels, n_units = 200, 14, 5
    ns = np.arange(n_steps, dtype=float)
    base = np.stack(
        [3.0 + m * 0.5 + np.sin(ns / (6.0 + m)) + 0.005 * m * ns
         for m in range(n_channels)], axis=1)
    units = [base + rng.normal(scale=0.5, size=base.shape)
             for _ in range(n_units)]
    source = dataset_from_arrays(
        units, [f"s{m + 1}" for m in range(n_channels)])

    model = fit(source)     # defaults: rates 0.01, lambda2 1, noise 0.1
    assert model.fit_mode == MOMENT_MATCHING
    for c in model.channels:
        assert c.params == ChannelTvarParams()

    t0 = time.perf_counter()
    report = monte_carlo_moments(model, 50_000, seed=2026)
    elapsed = time.perf_counter() - t0

    frac = report.mean_fraction_ok
    max_var_err = float(np.nanmax(report.var_rel_err[5:]))
    assert frac >= 0.99
    assert max_var_err < 0.05
    assert report.var_at_origin == 0.0
    assert report.max_cross_corr < 0.05
    assert elapsed < 60.0
    print(f"criterion 3 PASS: K=50000, N=200, M=14: |z|<4 at "
          f"{frac:.4%} of grid, max var rel err {max_var_err:.4f} (n>=5), "
          f"var at origin exactly {report.var_at_origin}, max |rho| "
          f"{report.max_cross_corr:.4f}, {elapsed:.1f}s")


def test_criterion_4_mean_and_covariance_decoupling():
    p1 = np.linspace(0.5, 2.5, 10)
    p2 = np.linspace(2.0, 1.0, 10)
    ns = np.arange(10)

    def model(**kw):
        ch = ChannelModel(p1=TableInterp(p1), p2=TableInterp(p2),
                          params=ChannelTvarParams(**kw))
        return TvarModel(channels=(ch,), channel_names=("c",),
                         n_steps=10, fit_mode=MOMENT_MATCHING)

    mean_side = dict(r1_mean=0.3, x_tilde0=-1.5)
    cov_side = dict(r1_cov=0.2, r2_cov=0.6, lambda2=2.5, noise_std=0.7)
    ref_mean = theoretical_mean(model(**mean_side), ns)
    ref_cov = theoretical_cov_diag(model(**cov_side), ns)

    checked = 0
    for r1c in (0.01, 0.25, 0.99):
        for r2c in (0.01, 0.5, 0.97):
            for lam2 in (0.5, 1.0, 3.0):
                for std in (0.01, 0.1, 2.0):
                    got = theoretical_mean(
                        model(r1_cov=r1c, r2_cov=r2c, lambda2=lam2,
                              noise_std=std, **mean_side), ns)
                    assert np.array_equal(got, ref_mean)
                    checked += 1
    for r1m in (0.01, 0.4, 0.99):
        for xt0 in (-3.0, 0.0, 1.0, 4.5):
            got = theoretical_cov_diag(
                model(r1_mean=r1m, x_tilde0=xt0, **cov_side), ns)
            assert np.array_equal(got, ref_cov)
            checked += 1
    print(f"criterion 4 PASS: mean bit-identical under 81 covariance-side "
          f"settings, variance bit-identical under 12 mean-side settings "
          f"({checked} grid cells)")


def test_criterion_5_sinusoidal_regression():
    rng = np.random.default_rng(20260818)
    for _ in range(40):
        n = int(rng.integers(2, 33))
        curve = rng.normal(scale=rng.uniform(0.5, 20.0), size=n)
        fn = fit_sinusoid(curve, n)
        assert np.max(np.abs(fn.eval_grid() - curve)) < 1e-9
    const = np.full(11, -2.75)
    fn = fit_sinusoid(const, 1)
    assert np.max(np.abs(fn.eval_grid() - const)) < 1e-9
    cosine = np.cos(2 * np.pi * np.arange(8) / 8)
    fn = fit_sinusoid(cosine, 2)
    assert np.max(np.abs(fn.eval_grid() - cosine)) < 1e-9
    print("criterion 5 PASS: P=N exact on 40 random curves (N<=32), "
          "constant at P=1, cos(2*pi*n/8) at P=2, all within 1e-9")


def test_criterion_6_ensemble_statistics_against_brute_force():
    rng = np.random.default_rng(20260819)
    for _ in range(30):
        j = int(rng.integers(1, 7))
        n = int(rng.integers(2, 10))
        m = int(rng.integers(1, 4))
        stacked = rng.normal(scale=rng.uniform(0.5, 5.0), size=(j, n, m))
        mean_bf, cov_bf = brute_force_moments(stacked)
        mean, var, cov = moments_from_array(stacked, full=True)
        assert np.max(np.abs(mean - mean_bf)) < 1e-12
        assert np.max(np.abs(cov - cov_bf)) < 1e-12
        assert np.max(np.abs(
            var - np.diagonal(cov_bf, axis1=1, axis2=2))) < 1e-12
    mean, var, _ = moments_from_array(np.array([[[0.0]], [[2.0]]]))
    assert mean[0, 0] == 1.0
    assert var[0, 0] == 1.0
    print("criterion 6 PASS: ensemble moments match double loops within "
          "1e-12 on 30 random datasets; {0,2} gives variance 1 (1/J "
          "normalization)")


def test_criterion_7_scoring_metrics():
    e_minus_1 = math.e - 1.0
    assert abs(phm_score([10.0], [0.0]) - e_minus_1) < 1e-12
    assert abs(phm_score([0.0], [13.0]) - e_minus_1) < 1e-12
    assert phm_score([42.0], [42.0]) == 0.0
    print("criterion 7 PASS: phm_score(d=10) = phm_score(d=-13) = e-1 "
          "within 1e-12, phm_score(0) = 0")


def test_criterion_8_cli_pipeline_reproducibility(tmp_path):
    rng = np.random.default_rng(424242)
    ds = dataset_from_arrays(
        [np.stack([np.linspace(2, 6, 50) + rng.normal(scale=0.3, size=50),
                   4 + np.cos(np.arange(50) / 7)
                   + rng.normal(scale=0.3, size=50)], axis=1)
         for _ in range(5)],
        ["s1", "s2"])
    src = tmp_path / "source.csv"
    write_dataset(ds, str(src))

    artifacts = {}
    for tag in ("one", "two"):
        d = tmp_path / tag
        d.mkdir()
        model = d / "model.json"
        series = d / "synthetic.csv"
        report = d / "report.json"
        assert run(["fit", str(src), "-o", str(model)]) == 0
        assert run(["generate", str(model), "-L", "5", "--seed", "7",
                    "-o", str(series)]) == 0
        rc = run(["validate", str(model), "-K", "1000", "--seed", "3",
                  "--report", str(report)])
        assert rc in (0, 1)
        artifacts[tag] = (model.read_bytes(), series.read_bytes(),
                          report.read_bytes(), rc)
    assert artifacts["one"] == artifacts["two"]
    print("criterion 8 PASS: fit/generate/validate artifacts "
          "byte-identical across two runs (model JSON, synthetic CSV, "
          "validation report)")
