"""Command-line interface: train, test, power, render, calibrate.

Exit codes: 0 success (or "accept" for `test`), 1 reject for `test`,
2 usage/validation/config error, 3 missing file, 4 malformed data or
model file, 5 model incompatible with the supplied data.
"""

from __future__ import annotations

import argparse
import json
import sys

from .classical import STATISTIC_NAMES, statistic_fn
from .engine import TrainConfig, calibrate_cutoff, dnt_test, load_model, save_model, train
from .errors import (
    ConfigError,
    DntError,
    FormatError,
    InvalidArgumentError,
    ModelMismatchError,
)
from .imagesim import METRIC_NAMES, similarity_test_statistic
from .lmnn import LmnnConfig
from .power import RunConfig, emit_table, run_power_study
from .qq import qq_points, rasterize, to_pgm
from .sampling import DistributionSpec, Sample, parse_distribution_label, sample

__all__ = ["entrypoint", "main"]

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_BAD_FORMAT = 4
EXIT_MISMATCH = 5


# ---------------------------------------------------------------------------
# Config files: flat key=value lines or one JSON object


def _read_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be a single object")
        return data
    data: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key=value, got {raw!r}")
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"config line {lineno}: {key!r} nests into a scalar")
        node[parts[-1]] = value.strip()
    return data


def _coerce_int(key: str, value) -> int:
    if isinstance(value, bool) or (not isinstance(value, (int, str))):
        raise ConfigError(f"{key}: expected an integer")
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _coerce_float(key: str, value) -> float:
    if isinstance(value, bool) or (not isinstance(value, (int, float, str))):
        raise ConfigError(f"{key}: expected a number")
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _check_keys(data: dict, valid: tuple[str, ...], where: str) -> None:
    unknown = [k for k in data if k not in valid]
    if unknown:
        raise ConfigError(
            f"{where}: unknown key(s) {', '.join(sorted(unknown))}; "
            f"valid keys are {', '.join(valid)}"
        )


def _spec_from_config(key: str, value) -> DistributionSpec:
    if isinstance(value, str):
        return parse_distribution_label(value)
    if isinstance(value, dict):
        _check_keys(value, ("kind", "params", "case_id"), key)
        if "kind" not in value or "params" not in value:
            raise ConfigError(f"{key}: needs 'kind' and 'params'")
        return DistributionSpec(
            value["kind"], tuple(value["params"]), value.get("case_id")
        )
    raise ConfigError(f"{key}: expected a label string or an object")


_LMNN_KEYS = ("k", "push_weight", "margin", "max_iters", "step_size", "tolerance")


def _lmnn_from_config(data, where: str) -> LmnnConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object of LMNN settings")
    _check_keys(data, _LMNN_KEYS, where)
    kwargs = {}
    for key in ("k", "max_iters"):
        if key in data:
            kwargs[key] = _coerce_int(f"{where}.{key}", data[key])
    for key in ("push_weight", "margin", "step_size", "tolerance"):
        if key in data:
            kwargs[key] = _coerce_float(f"{where}.{key}", data[key])
    return LmnnConfig(**kwargs)


_TRAIN_KEYS = (
    "n",
    "h0_pool",
    "h0_keep_fraction",
    "h1_count",
    "h1_spec",
    "d",
    "extractor",
    "alpha",
    "lmnn",
    "master_seed",
    "fresh_null_count",
)


def train_config_from_dict(data: dict, where: str = "train") -> TrainConfig:
    _check_keys(data, _TRAIN_KEYS, where)
    kwargs = {}
    for key in ("n", "h0_pool", "h1_count", "d", "master_seed", "fresh_null_count"):
        if key in data:
            kwargs[key] = _coerce_int(f"{where}.{key}", data[key])
    for key in ("h0_keep_fraction", "alpha"):
        if key in data:
            kwargs[key] = _coerce_float(f"{where}.{key}", data[key])
    if "extractor" in data:
        kwargs["extractor"] = str(data["extractor"])
    if "h1_spec" in data:
        kwargs["h1_spec"] = _spec_from_config(f"{where}.h1_spec", data["h1_spec"])
    if "lmnn" in data:
        kwargs["lmnn"] = _lmnn_from_config(data["lmnn"], f"{where}.lmnn")
    return TrainConfig(**kwargs)


_RUN_KEYS = ("methods", "reps", "n", "calibration_reps", "train", "master_seed", "out")


def run_config_from_dict(data: dict) -> RunConfig:
    _check_keys(data, _RUN_KEYS, "run config")
    if "methods" not in data:
        raise ConfigError("run config: 'methods' is required")
    methods = data["methods"]
    if isinstance(methods, str):
        methods = tuple(part.strip() for part in methods.split(",") if part.strip())
    elif isinstance(methods, list):
        methods = tuple(str(m) for m in methods)
    else:
        raise ConfigError("methods: expected a list or comma-separated names")
    kwargs: dict = {"methods": methods}
    for key in ("reps", "n", "calibration_reps", "master_seed"):
        if key in data:
            kwargs[key] = _coerce_int(key, data[key])
    if "out" in data:
        kwargs["out"] = str(data["out"])
    if "train" in data:
        if not isinstance(data["train"], dict):
            raise ConfigError("train: expected an object of training settings")
        kwargs["train"] = train_config_from_dict(data["train"])
    return RunConfig(**kwargs)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_train(args) -> int:
    cfg = train_config_from_dict(_read_config_file(args.config), where="config")
    model = train(cfg)
    save_model(model, args.out)
    print(f"model written to {args.out}")
    return EXIT_OK


def _read_sample_file(path: str) -> Sample:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    values = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise FormatError(
                f"{path}:{lineno}: expected one decimal number per line, got {text!r}"
            ) from None
    if len(values) < 3:
        raise FormatError(f"{path}: needs at least 3 values, found {len(values)}")
    return Sample(values)


def _cmd_test(args) -> int:
    model = load_model(args.model)
    x = _read_sample_file(args.data)
    report = dnt_test(x, model)
    print(report.summary())
    return EXIT_REJECT if report.reject else EXIT_OK


def _cmd_power(args) -> int:
    cfg = run_config_from_dict(_read_config_file(args.config))
    out = args.out or cfg.out
    if out is None:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    table = run_power_study(cfg)
    text = emit_table(table, format=args.format)
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    print(f"power table written to {out}")
    return EXIT_OK


def _cmd_render(args) -> int:
    spec = parse_distribution_label(args.dist)
    x = sample(spec, args.n, args.seed)
    raster = rasterize(qq_points(x))
    with open(args.out, "wb") as handle:
        handle.write(to_pgm(raster))
    print(f"raster written to {args.out}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    name = args.stat
    if name in STATISTIC_NAMES:
        fn = statistic_fn(name)
    elif name in METRIC_NAMES:
        def fn(x, metric=name):
            return similarity_test_statistic(x, metric=metric)
    else:
        raise ConfigError(
            f"unknown statistic {name!r}; valid names are "
            f"{', '.join(STATISTIC_NAMES + METRIC_NAMES)}"
        )
    cutoff = calibrate_cutoff(fn, args.n, args.reps, alpha=args.alpha, seed=args.seed)
    print(cutoff)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnt",
        description="Distance-based normality testing and its power-study harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True, help="flat key=value or JSON config")
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("test", help="test newline-delimited reals against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("power", help="run the 15-case power study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output table path")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("render", help="dump one Q-Q raster as binary PGM")
    p.add_argument("--dist", required=True, help="label such as t(2) or laplace")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("calibrate", help="print a Monte-Carlo null cutoff")
    p.add_argument("--stat", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--reps", type=int, default=20_000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_calibrate)
    return parser


def entrypoint(argv: list[str] | None = None) -> int:
    """Parse arguments, dispatch, and map errors to exit codes."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (FormatError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FORMAT
    except FileNotFoundError as exc:
        name = getattr(exc, "filename", None)
        print(f"error: missing file: {name or exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (ConfigError, InvalidArgumentError, DntError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(entrypoint())


if __name__ == "__main__":
    main()
