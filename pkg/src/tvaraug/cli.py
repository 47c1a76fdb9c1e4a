"""Command-line front end: stats, fit, generate, validate.

Every subcommand accepts --config with a JSON file; explicit flags beat
config values, which beat built-in defaults. All randomness flows from
the seed, so fixed inputs produce byte-identical outputs. Exit codes:
0 success, 1 a validation report failed, 2 usage or input errors.
"""

import argparse
import json
import sys

from . import __version__
from .augment import augment, batch_to_dataset, fit, load_model, save_model
from .dataset import (ALIGN_BY_RUL, ALIGN_BY_TIME, ColumnSchema,
                      load_dataset, write_dataset)
from .errors import ConfigError, TvaraugError
from .stats import ensemble_stats
from .tvar import MOMENT_MATCHING, RAW_VARIANCE, ChannelTvarParams
from .validate import Tolerances, compare_to_source, monte_carlo_moments

_PARAM_KEYS = ("r1_mean", "r1_cov", "r2_cov", "lambda2", "x_tilde0",
               "noise_std")
_RATE_KEYS = ("r1_mean", "r1_cov", "r2_cov")


def _reject_unknown(mapping, allowed, context):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {context}")


def _check_params_dict(d, context):
    _reject_unknown(d, _PARAM_KEYS, context)
    for key, value in d.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{context}.{key} must be a number")
        if key in _RATE_KEYS and not (0.0 < value < 1.0):
            raise ConfigError(
                f"{context}.{key} must be in (0, 1), got {value}")
        if key == "lambda2" and value == 0:
            raise ConfigError(f"{context}.lambda2 must be nonzero")
        if key == "noise_std" and not value > 0:
            raise ConfigError(f"{context}.noise_std must be positive")


def load_config(path):
    """Parse and structurally validate a config file.

    Unknown keys anywhere in the document are errors; rate parameters are
    range-checked here, before any data is touched.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except ValueError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _reject_unknown(cfg, ("schema", "alignment", "fit_mode", "interp",
                          "params", "params_per_channel", "n_samples",
                          "seed", "tolerances", "output"), "config")

    schema = cfg.get("schema", {})
    if not isinstance(schema, dict):
        raise ConfigError("config.schema must be an object")
    _reject_unknown(schema, ("unit", "time", "rul", "channels"),
                    "config.schema")
    if "channels" in schema and (
            not isinstance(schema["channels"], list)
            or not all(isinstance(c, str) for c in schema["channels"])):
        raise ConfigError("config.schema.channels must be a list of names")

    if cfg.get("alignment", ALIGN_BY_TIME) not in (ALIGN_BY_TIME,
                                                   ALIGN_BY_RUL):
        raise ConfigError(f"config.alignment must be {ALIGN_BY_TIME!r} "
                          f"or {ALIGN_BY_RUL!r}")
    if cfg.get("fit_mode", MOMENT_MATCHING) not in (MOMENT_MATCHING,
                                                    RAW_VARIANCE):
        raise ConfigError(f"config.fit_mode must be {MOMENT_MATCHING!r} "
                          f"or {RAW_VARIANCE!r}")

    interp = cfg.get("interp", {})
    if not isinstance(interp, dict):
        raise ConfigError("config.interp must be an object")
    _reject_unknown(interp, ("mode", "order"), "config.interp")
    if interp.get("mode", "table") not in ("table", "sinusoid"):
        raise ConfigError("config.interp.mode must be 'table' or 'sinusoid'")

    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("config.params must be an object")
    _check_params_dict(params, "config.params")

    per_channel = cfg.get("params_per_channel", {})
    if not isinstance(per_channel, dict):
        raise ConfigError("config.params_per_channel must be an object")
    for name, overrides in per_channel.items():
        if not isinstance(overrides, dict):
            raise ConfigError(
                f"config.params_per_channel.{name} must be an object")
        _check_params_dict(overrides, f"config.params_per_channel.{name}")

    tol = cfg.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("config.tolerances must be an object")
    _reject_unknown(tol, ("mean_z_max", "mean_fraction", "var_rel_max",
                          "var_min_step", "cross_corr_max"),
                    "config.tolerances")

    output = cfg.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("config.output must be an object")
    _reject_unknown(output, ("stats", "model", "series", "report"),
                    "config.output")

    for key in ("n_samples", "seed"):
        if key in cfg and (not isinstance(cfg[key], int)
                           or isinstance(cfg[key], bool)):
            raise ConfigError(f"config.{key} must be an integer")
    return cfg


def _config_for(args):
    return load_config(args.config) if args.config else {}


def _schema_from(cfg):
    s = cfg.get("schema", {})
    if not s:
        return None
    channels = tuple(s["channels"]) if "channels" in s else None
    return ColumnSchema(unit=s.get("unit", "unit"), time=s.get("time", "time"),
                        rul=s.get("rul", "rul"), channels=channels)


def _alignment_from(args, cfg):
    if getattr(args, "align", None):
        return args.align
    return cfg.get("alignment", ALIGN_BY_TIME)


def _params_for(cfg, channel_names):
    """Resolve base params plus per-channel overrides into one list."""
    base_dict = cfg.get("params", {})
    per_channel = cfg.get("params_per_channel", {})
    try:
        base = ChannelTvarParams(**base_dict)
        if not per_channel:
            return base if base_dict else None
        stray = sorted(set(per_channel) - set(channel_names))
        if stray:
            raise ConfigError(
                f"params_per_channel names {stray} not in the dataset "
                f"channels {list(channel_names)}")
        out = []
        for name in channel_names:
            merged = dict(base_dict)
            merged.update(per_channel.get(name, {}))
            out.append(ChannelTvarParams(**merged))
        return out
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _tolerances_from(cfg):
    tol = cfg.get("tolerances", {})
    try:
        return Tolerances(**tol)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config.tolerances: {exc}") from exc


def _pick(flag_value, cfg, key, default=None):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def _pick_output(flag_value, cfg, key):
    if flag_value is not None:
        return flag_value
    return cfg.get("output", {}).get(key)


def _write_stats_csv(st, time_origin, channel_names, fh):
    fh.write("time,channel,mean,var\n")
    for n in range(st.n_steps):
        for m, name in enumerate(channel_names):
            fh.write(f"{time_origin + n},{name},"
                     f"{float(st.mean_curve[n, m])!r},"
                     f"{float(st.var_curve[n, m])!r}\n")


def _cmd_stats(args):
    cfg = _config_for(args)
    ds = load_dataset(args.data, schema=_schema_from(cfg),
                      alignment=_alignment_from(args, cfg))
    st = ensemble_stats(ds)
    out = _pick_output(args.output, cfg, "stats")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            _write_stats_csv(st, ds.time_origin, ds.channel_names, fh)
    else:
        _write_stats_csv(st, ds.time_origin, ds.channel_names, sys.stdout)
    return 0


def _cmd_fit(args):
    cfg = _config_for(args)
    out = _pick_output(args.output, cfg, "model")
    if not out:
        print("error: fit needs -o/--output or config output.model",
              file=sys.stderr)
        return 2
    fit_mode = _pick(args.fit_mode, cfg, "fit_mode", MOMENT_MATCHING)
    interp_cfg = cfg.get("interp", {})
    interp_mode = args.interp_mode or interp_cfg.get("mode", "table")
    order = args.sinusoid_order
    if order is None:
        order = interp_cfg.get("order")
    ds = load_dataset(args.data, schema=_schema_from(cfg),
                      alignment=_alignment_from(args, cfg))
    params = _params_for(cfg, ds.channel_names)
    model = fit(ds, config=params, fit_mode=fit_mode,
                interp_mode=interp_mode, sinusoid_order=order)
    save_model(model, out)
    print(f"fitted {model.n_channels} channels over {model.n_steps} steps "
          f"({fit_mode}, {interp_mode}) -> {out}")
    return 0


def _cmd_generate(args):
    cfg = _config_for(args)
    out = _pick_output(args.output, cfg, "series")
    if not out:
        print("error: generate needs -o/--output or config output.series",
              file=sys.stderr)
        return 2
    n_samples = _pick(args.n_samples, cfg, "n_samples")
    if n_samples is None:
        print("error: generate needs -L/--n-samples or config n_samples",
              file=sys.stderr)
        return 2
    if n_samples < 1:
        print(f"error: -L must be >= 1, got {n_samples}", file=sys.stderr)
        return 2
    seed = _pick(args.seed, cfg, "seed", 0)
    model = load_model(args.model)
    batch = augment(model, n_samples, seed=seed)
    write_dataset(batch_to_dataset(batch, model.channel_names), out)
    print(f"wrote {batch.n_samples} series of shape "
          f"({batch.n_steps}, {batch.n_channels}) -> {out}")
    return 0


def _cmd_validate(args):
    cfg = _config_for(args)
    tol = _tolerances_from(cfg)
    seed = _pick(args.seed, cfg, "seed", 0)
    k = args.realizations if args.realizations is not None else 2000
    model = load_model(args.model)
    if args.against:
        ds = load_dataset(args.against, schema=_schema_from(cfg),
                          alignment=_alignment_from(args, cfg))
        batch = augment(model, k, seed=seed)
        report = compare_to_source(batch, ensemble_stats(ds), tolerances=tol)
    else:
        report = monte_carlo_moments(model, k, seed=seed, tolerances=tol)
    for line in report.summary_lines():
        print(line)
    out = _pick_output(args.report, cfg, "report")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_payload(), indent=2,
                                sort_keys=True) + "\n")
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tvaraug",
        description="Fit a time-varying autoregressive model to aligned "
                    "multivariate series and generate synthetic ones.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")

    p_stats = sub.add_parser(
        "stats", help="write per-channel ensemble mean/variance curves")
    p_stats.add_argument("data", help="long-format CSV")
    p_stats.add_argument("-o", "--output",
                         help="output CSV (default stdout)")
    p_stats.add_argument("--align", choices=(ALIGN_BY_TIME, ALIGN_BY_RUL))
    add_common(p_stats)
    p_stats.set_defaults(func=_cmd_stats)

    p_fit = sub.add_parser("fit", help="fit a model and save it as JSON")
    p_fit.add_argument("data", help="long-format CSV")
    p_fit.add_argument("-o", "--output", help="model JSON path")
    p_fit.add_argument("--fit-mode",
                       choices=(MOMENT_MATCHING, RAW_VARIANCE))
    p_fit.add_argument("--interp-mode", choices=("table", "sinusoid"))
    p_fit.add_argument("--sinusoid-order", type=int)
    p_fit.add_argument("--align", choices=(ALIGN_BY_TIME, ALIGN_BY_RUL))
    add_common(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_gen = sub.add_parser("generate",
                           help="draw synthetic series from a saved model")
    p_gen.add_argument("model", help="model JSON from fit")
    p_gen.add_argument("-L", "--n-samples", type=int, dest="n_samples")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("-o", "--output", help="output CSV path")
    add_common(p_gen)
    p_gen.set_defaults(func=_cmd_generate)

    p_val = sub.add_parser(
        "validate",
        help="check a model against its closed-form moments, or a "
             "generated batch against source data")
    p_val.add_argument("model", help="model JSON from fit")
    p_val.add_argument("--against", help="source CSV to compare with")
    p_val.add_argument("-K", "--realizations", type=int)
    p_val.add_argument("--seed", type=int)
    p_val.add_argument("--report", help="write the report as JSON here")
    p_val.add_argument("--align", choices=(ALIGN_BY_TIME, ALIGN_BY_RUL))
    add_common(p_val)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (TvaraugError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
