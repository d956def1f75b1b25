"""Command-line harness.

    shedline run CONFIG [--output PATH] [--format csv|json] [--wall-clock]
    shedline calibrate CONFIG --samples N [--wall-clock]
    shedline score CONFIG URLS_FILE [--output PATH] [--wall-clock]

Exit codes: 0 ok, 2 configuration error, 3 I/O error. ``SHEDLINE_SEED``
overrides the workload seed from the config.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .cache import CacheFormatError, TrustCache
from .engine import process_batch
from .evaluators import EVALUATOR_KINDS, EvaluatorSpec
from .model import ConfigError, LoadParameters, Url, VirtualClock, WallClock
from .monitor import MAX_CAPACITY, CalibrationSample, calibrate_capacity
from .workload import ENGINES, WorkloadSpec, compare_engines, generate_workload

log = logging.getLogger("shedline")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

_TOP_KEYS = {
    "load", "evaluator", "workload", "engines", "cache_path", "output_path",
    "output_format", "shed_fraction", "shared_cache", "safety_factor",
}
_LOAD_KEYS = {
    "u_capacity", "u_threshold", "deadline_normal_us", "deadline_overload_us",
    "extension_weight", "max_extension_factor", "default_trust",
}
_EVALUATOR_KEYS = {"kind", "per_item_cost_us", "score", "script"}
_WORKLOAD_KEYS = {"n_batches", "batch_size_choices", "url_universe", "zipf_exponent", "seed"}


@dataclass(frozen=True)
class HarnessConfig:
    params: LoadParameters
    evaluator: EvaluatorSpec
    workload: WorkloadSpec | None
    engines: tuple[str, ...]
    cache_path: Path | None
    output_path: Path | None
    output_format: str
    shed_fraction: float = 1.0
    shared_cache: bool = False
    safety_factor: float = 1.0


def _section(doc: dict, name: str, allowed: set[str], required: bool = True) -> dict | None:
    value = doc.get(name)
    if value is None:
        if required:
            raise ConfigError(name, "missing section")
        return None
    if not isinstance(value, dict):
        raise ConfigError(name, "must be an object")
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    return value


def _get(section: dict, prefix: str, key: str, kind: type | tuple, default: Any = ...) -> Any:
    if key not in section:
        if default is ...:
            raise ConfigError(key, f"missing {prefix}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) and kind is not bool:
        raise ConfigError(key, f"{prefix}.{key} has the wrong type")
    if not isinstance(value, kind):
        raise ConfigError(key, f"{prefix}.{key} has the wrong type ({type(value).__name__})")
    return value


def parse_config(doc: Any, base_dir: Path = Path(".")) -> HarnessConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")

    number = (int, float)
    load = _section(doc, "load", _LOAD_KEYS)
    params = LoadParameters(
        u_capacity=_get(load, "load", "u_capacity", int),
        u_threshold=_get(load, "load", "u_threshold", int),
        deadline_normal=_get(load, "load", "deadline_normal_us", int),
        deadline_overload=_get(load, "load", "deadline_overload_us", int),
        extension_weight=_get(load, "load", "extension_weight", number, 0.5),
        max_extension_factor=_get(load, "load", "max_extension_factor", number, 2.0),
        default_trust=_get(load, "load", "default_trust", number, 2.5),
    )

    ev = _section(doc, "evaluator", _EVALUATOR_KEYS)
    kind = _get(ev, "evaluator", "kind", str)
    if kind not in EVALUATOR_KINDS:
        raise ConfigError("kind", f"evaluator.kind must be one of {EVALUATOR_KINDS}")
    script = []
    for entry in _get(ev, "evaluator", "script", list, []):
        if not isinstance(entry, dict) or set(entry) != {"url", "trust", "cost_us"}:
            raise ConfigError("script", "entries need exactly url, trust, cost_us")
        script.append((entry["url"], entry["trust"], entry["cost_us"]))
    if kind == "scripted" and not script:
        raise ConfigError("script", "scripted evaluator needs a script")
    evaluator = EvaluatorSpec(
        kind=kind,
        per_item_cost=_get(ev, "evaluator", "per_item_cost_us", int, 0),
        score=_get(ev, "evaluator", "score", number, 2.5),
        script=tuple(script),
    )
    if evaluator.per_item_cost < 0:
        raise ConfigError("per_item_cost_us", "must be >= 0")
    try:
        evaluator.build()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError("evaluator", str(exc)) from None

    wl = _section(doc, "workload", _WORKLOAD_KEYS, required=False)
    workload = None
    if wl is not None:
        seed = _get(wl, "workload", "seed", int, 0)
        env_seed = os.environ.get("SHEDLINE_SEED")
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise ConfigError("SHEDLINE_SEED", f"not an integer: {env_seed!r}") from None
        sizes = _get(wl, "workload", "batch_size_choices", list)
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes):
            raise ConfigError("batch_size_choices", "must be a list of integers")
        workload = WorkloadSpec(
            n_batches=_get(wl, "workload", "n_batches", int),
            batch_size_choices=tuple(sizes),
            url_universe=_get(wl, "workload", "url_universe", int),
            zipf_exponent=_get(wl, "workload", "zipf_exponent", number, 0.0),
            seed=seed,
        )

    engines = _get(doc, "config", "engines", list, ["proposed"])
    if not engines or any(e not in ENGINES for e in engines):
        raise ConfigError("engines", f"must be a non-empty list drawn from {sorted(ENGINES)}")

    def path(key: str) -> Path | None:
        value = _get(doc, "config", key, (str, type(None)), None)
        return None if value is None else base_dir / value

    output_format = _get(doc, "config", "output_format", str, "csv")
    if output_format not in ("csv", "json"):
        raise ConfigError("output_format", "must be csv or json")
    shed_fraction = _get(doc, "config", "shed_fraction", number, 1.0)
    if not 0 <= shed_fraction <= 1:
        raise ConfigError("shed_fraction", "must be in [0, 1]")
    safety = _get(doc, "config", "safety_factor", number, 1.0)
    if not 0 < safety <= 1:
        raise ConfigError("safety_factor", "must be in (0, 1]")

    config = HarnessConfig(
        params=params,
        evaluator=evaluator,
        workload=workload,
        engines=tuple(engines),
        cache_path=path("cache_path"),
        output_path=path("output_path"),
        output_format=output_format,
        shed_fraction=float(shed_fraction),
        shared_cache=_get(doc, "config", "shared_cache", bool, False),
        safety_factor=float(safety),
    )
    _warn_unbudgeted(config)
    return config


def _warn_unbudgeted(config: HarnessConfig) -> None:
    max_cost = config.evaluator.build().max_cost
    normal_cost = config.params.u_capacity * max_cost
    if config.params.deadline_overload < normal_cost:
        log.warning(
            "deadline_overload (%d us) < u_capacity x per-item cost (%d us): "
            "the drop queue will never be evaluated, only averaged",
            config.params.deadline_overload, normal_cost,
        )


def load_config(path: str | os.PathLike) -> HarnessConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(doc, path.parent)


def _clock(args):
    return WallClock() if args.wall_clock else VirtualClock()


def cmd_run(args) -> int:
    config = load_config(args.config)
    if config.workload is None:
        raise ConfigError("workload", "missing section (required by run)")
    fmt = args.format or config.output_format
    output = Path(args.output) if args.output else config.output_path
    if output is None:
        raise ConfigError("output_path", "no output path given")
    initial = None
    if config.cache_path is not None:
        initial = TrustCache.load(config.cache_path, create_if_missing=True)

    table = compare_engines(
        generate_workload(config.workload),
        config.params,
        config.evaluator.build(),
        config.engines,
        seed=config.workload.seed,
        shed_fraction=config.shed_fraction,
        shared_cache=config.shared_cache,
        initial_cache=initial,
        clock_factory=WallClock if args.wall_clock else VirtualClock,
    )
    text = table.to_csv() if fmt == "csv" else json.dumps(table.to_json(), indent=2) + "\n"
    output.write_text(text, encoding="utf-8")
    for engine, agg in table.aggregates.items():
        print(
            f"{engine}: mean elapsed {agg.elapsed_us:.0f} us, "
            f"trust MAE {agg.trust_mae:.4f}, deadlines met: {agg.deadline_met}"
        )
    if table.speedup is not None:
        print(f"speedup (full / proposed): {table.speedup:.3f}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.samples < 1:
        raise ConfigError("samples", f"must be >= 1, got {args.samples}")
    config = load_config(args.config)
    evaluator = config.evaluator.build()
    if config.evaluator.kind == "scripted":
        urls = [Url(u) for u, _, _ in config.evaluator.script]
        urls = (urls * (args.samples // len(urls) + 1))[: args.samples]
    else:
        urls = [Url(f"http://calibration.example/{i}") for i in range(args.samples)]
    clock = _clock(args)
    start = clock.now()
    for url in urls:
        evaluator.evaluate(url, clock)
    total = clock.now() - start
    mean_cost = -(-total // len(urls))  # ceiling keeps the estimate conservative
    if mean_cost == 0:
        log.warning("evaluation cost measured as zero; capacity is unbounded")
        print(MAX_CAPACITY)
        return EXIT_OK
    sample = CalibrationSample(mean_cost, len(urls))
    print(calibrate_capacity(sample, config.params.deadline_normal, config.safety_factor))
    return EXIT_OK


def cmd_score(args) -> int:
    config = load_config(args.config)
    try:
        lines = Path(args.urls_file).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IOError(f"cannot read {args.urls_file}: {exc}") from exc
    urls: dict[Url, None] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            urls[Url(line)] = None
        except ValueError as exc:
            raise ConfigError(f"{args.urls_file}:{line_no}", str(exc)) from None

    if config.cache_path is not None:
        cache = TrustCache.load(config.cache_path, create_if_missing=True)
    else:
        cache = TrustCache()
    report = process_batch(list(urls), config.params, cache, config.evaluator.build(), _clock(args))
    text = "".join(f"{s.url}\t{s.score:.6f}\t{s.provenance.value}\n" for s in report.items)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if config.cache_path is not None:
        cache.save(config.cache_path)
    log.info(
        "%s load, %d urls, elapsed %d us (deadline %d us)",
        report.load_class.value, report.uload, report.elapsed, report.effective_deadline,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--wall-clock", action="store_true",
                        help="charge evaluation cost in real time instead of virtual time")
    common.add_argument("--output", help="output path (overrides the config)")
    common.add_argument("--format", choices=("csv", "json"), help="output format for run")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shedline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="compare engines over a synthetic workload")
    run.add_argument("config")
    run.set_defaults(func=cmd_run)

    cal = sub.add_parser("calibrate", parents=[common], help="recommend u_capacity")
    cal.add_argument("config")
    cal.add_argument("--samples", type=int, default=100)
    cal.set_defaults(func=cmd_calibrate)

    score = sub.add_parser("score", parents=[common], help="score a file of urls")
    score.add_argument("config")
    score.add_argument("urls_file")
    score.set_defaults(func=cmd_score)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="shedline: %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"shedline: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, CacheFormatError) as exc:
        print(f"shedline: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
