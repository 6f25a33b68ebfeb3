"""
Command-line entry point for Colourspace

One subcommand per experiment plus ``validate`` for a directory of suite
configs. A run is described by an :class:`ExperimentConfig` read from
``--config`` and overridden by flags; its report is written as canonical
JSON (or CSV / JSON lines for per-row output) to stdout or ``--output``.

Exit codes: 0 success, 1 failed verdict, 2 usage or config error,
3 budget exceeded.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import __version__
from .core.config import settings
from .core.errors import ColourspaceError, ConfigError
from .routes import run
from .schemas.experiment import ExperimentConfig, ExperimentReport
from .suite import validate_suite

logger = logging.getLogger(__name__)

COMMANDS = {
    "count": "exact number of proper colourings",
    "sample": "uniform or Glauber samples",
    "classify": "loose/thawed/rigid/frozen status per vertex",
    "clusters": "cluster size histogram of the distance-t colouring graph",
    "bounds": "evaluate a named bound with its hypothesis checks",
    "dominate": "domination, negative correlation and tail checks",
    "percolate": "Monte Carlo root activation of s-upward percolation",
    "propagate": "deterministic percolation of one leaf mask",
    "solve": "greedy, local-search and recolouring procedures",
    "freeenergy": "free energy against the tree reference",
}

PERCOLATION_COMMANDS = ("percolate", "propagate")
BOUND_SHORTCUTS = {
    "d": "d",
    "short": "short",
    "deg": "deg",
    "ell": "ell",
    "delta_max": "Delta",
    "mu": "mu",
    "s": "s",
    "f": "f",
}


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def _float_text(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    text = "%.17g" % value
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(value: Any, indent: Optional[int], level: int) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _float_text(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = [(str(k), v) for k, v in value.items()]
        items.sort(key=lambda item: item[0])
        colon = ":" if indent is None else ": "
        parts = [f"{json.dumps(k, ensure_ascii=False)}{colon}{_encode(v, indent, level + 1)}" for k, v in items]
        return _wrap("{", "}", parts, indent, level)
    if isinstance(value, (list, tuple, np.ndarray)):
        parts = [_encode(v, indent, level + 1) for v in value]
        return _wrap("[", "]", parts, indent, level)
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def _wrap(opening: str, closing: str, parts: List[str], indent: Optional[int], level: int) -> str:
    if not parts:
        return opening + closing
    if indent is None:
        return opening + ",".join(parts) + closing
    inner = " " * (indent * (level + 1))
    outer = " " * (indent * level)
    return opening + "\n" + ",\n".join(inner + part for part in parts) + "\n" + outer + closing


def canonical_json(value: Any, indent: Optional[int] = 2) -> str:
    """Sorted keys, 17 significant digits, Infinity/NaN spelled out.

    Parsing the output with :func:`json.loads` and encoding again gives the
    same bytes.
    """
    return _encode(value, indent, 0)


# ---------------------------------------------------------------------------
# Config assembly
# ---------------------------------------------------------------------------


def _ints(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    return [int(part) for part in text.split(",") if part.strip()]


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    return [float(part) for part in text.split(",") if part.strip()]


def _blocks(text: Optional[str]) -> Optional[List[List[int]]]:
    if text is None:
        return None
    return [_ints(block) for block in text.split(";") if block.strip()]


def _bits(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    if set(text) - {"0", "1"}:
        raise ConfigError(f"mask must be a string of 0s and 1s, got '{text}'")
    return [int(ch) for ch in text]


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def parse_config(data: Dict[str, Any], source: str = "config") -> ExperimentConfig:
    """Validate a config dict, turning pydantic errors into field diagnostics"""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"{source}: {problems}")


def _set(target: Dict[str, Any], key: str, value: Any) -> None:
    if value is not None:
        target[key] = value


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file fields overridden by every flag given on the command line"""
    data = load_config_file(args.config) if args.config else {}
    command = args.command
    data["command"] = command
    percolating = command in PERCOLATION_COMMANDS

    graph = dict(data.get("graph") or {})
    graph_flags = {
        "family": args.family,
        "n": args.n,
        "n2": args.n2,
        "copies": args.copies,
        "degree": args.degree,
        "p": args.edge_p,
    }
    if not percolating:
        graph_flags.update(arity=args.arity, depth=args.depth)
    if args.graph_file is not None:
        graph_flags.update(family="from_file", path=args.graph_file)
    for key, value in graph_flags.items():
        _set(graph, key, value)
    if graph:
        _set(graph, "seed", args.seed)
        data["graph"] = graph

    sampler = dict(data.get("sampler") or {})
    _set(sampler, "seed", args.seed)
    _set(sampler, "burnin", args.burnin)
    _set(sampler, "thin", args.thin)
    if command == "sample":
        _set(sampler, "method", args.method)
    else:
        _set(data, "method", args.method)
    data["sampler"] = sampler

    if percolating:
        instance = dict(data.get("percolation") or {})
        for key in ("arity", "depth", "threshold", "p", "model"):
            _set(instance, key, getattr(args, key))
        _set(instance, "mask", _bits(args.mask))
        if instance:
            data["percolation"] = instance
    else:
        _set(data, "p", args.p)
        if args.vertices is not None or args.threshold is not None:
            family = dict(data.get("family") or {})
            _set(family, "vertices", _ints(args.vertices))
            _set(family, "threshold", args.threshold)
            data["family"] = family

    params = dict(data.get("params") or {})
    for flag, name in BOUND_SHORTCUTS.items():
        _set(params, name, getattr(args, flag))
    for item in args.param or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects NAME=VALUE, got '{item}'")
        params[name.strip()] = _floats(value) if "," in value else float(value)
    if command == "bounds":
        _set(params, "delta", args.delta)
    else:
        _set(data, "delta", args.delta)
    if params:
        data["params"] = params

    for key in ("k", "t", "vertex", "colour", "g_depth", "trials", "formula", "list_floor", "max_iterations"):
        _set(data, key, getattr(args, key))
    _set(data, "colouring", _ints(args.colouring))
    _set(data, "colours", _ints(args.colours))
    _set(data, "probabilities", _floats(args.probabilities))
    _set(data, "deltas", _floats(args.deltas))
    _set(data, "partition", _blocks(args.partition))
    _set(data, "output", args.output)
    _set(data, "format", args.format)
    return parse_config(data, args.config or "flags")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def render(report: ExperimentReport, config: ExperimentConfig) -> str:
    if config.format == "json":
        return canonical_json(report.to_payload()) + "\n"
    if report.records is None:
        raise ConfigError(f"'{config.command}' has no per-row output; use --format json")
    if config.format == "jsonl":
        return "".join(canonical_json(record, indent=None) + "\n" for record in report.records)
    return pd.DataFrame(report.records).to_csv(index=False, lineterminator="\n")


def emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    if not path.is_absolute():
        path = settings.OUTPUT_DIR / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Report written to {path}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config; flags override its fields")

    graph = common.add_argument_group("graph")
    graph.add_argument("--family", help="graph family tag, e.g. cycle, star, random_regular")
    graph.add_argument("--n", type=int, help="vertices (leaves for star)")
    graph.add_argument("--n2", type=int, help="second side of complete_bipartite")
    graph.add_argument("--arity", type=int)
    graph.add_argument("--depth", type=int)
    graph.add_argument("--copies", type=int)
    graph.add_argument("--degree", type=int)
    graph.add_argument("--edge-p", dest="edge_p", type=float)
    graph.add_argument("--seed", type=int, help="seed for random graphs and samplers")
    graph.add_argument("--graph-file", dest="graph_file", help="edge-list or JSON graph file")

    instance = common.add_argument_group("instance")
    instance.add_argument("--k", type=int)
    instance.add_argument("--t", type=int)
    instance.add_argument("--vertex", type=int)
    instance.add_argument("--colour", type=int)
    instance.add_argument("--colouring", help="comma-separated colours, one per vertex")
    instance.add_argument("--g-depth", dest="g_depth", type=int)
    instance.add_argument("--trials", type=int)
    instance.add_argument("--method")
    instance.add_argument("--burnin", type=int)
    instance.add_argument("--thin", type=int)
    instance.add_argument("--list-floor", dest="list_floor", type=int)
    instance.add_argument("--max-iterations", dest="max_iterations", type=int)

    bounds = common.add_argument_group("bounds")
    bounds.add_argument("--formula")
    bounds.add_argument("--param", action="append", metavar="NAME=VALUE")
    bounds.add_argument("--d", type=float)
    bounds.add_argument("--short", type=float)
    bounds.add_argument("--deg", type=float)
    bounds.add_argument("--ell", type=float)
    bounds.add_argument("--delta-max", dest="delta_max", type=float)
    bounds.add_argument("--mu", type=float)
    bounds.add_argument("--delta", type=float)
    bounds.add_argument("--s", type=float)
    bounds.add_argument("--f", type=float)

    probability = common.add_argument_group("domination and percolation")
    probability.add_argument("--p", type=float)
    probability.add_argument("--threshold", type=int)
    probability.add_argument("--model", choices=["iid", "adversarial", "explicit", "colouring"])
    probability.add_argument("--mask", help="leaf mask as a string of 0s and 1s")
    probability.add_argument("--vertices", help="comma-separated family vertices")
    probability.add_argument("--colours", help="comma-separated colour set")
    probability.add_argument("--probabilities", help="comma-separated Bernoulli probabilities")
    probability.add_argument("--partition", help="blocks separated by ';', e.g. 0,1,2;3,4,5")
    probability.add_argument("--deltas", help="comma-separated deviations")

    output = common.add_argument_group("output")
    output.add_argument("--output", help="report path, relative to COLOURSPACE_OUTPUT_DIR")
    output.add_argument("--format", choices=["json", "csv", "jsonl"])
    output.add_argument("--jobs", type=int, help="worker threads for Monte Carlo batches")
    output.add_argument("--timing", action="store_true", help="record wall-clock duration in the report")
    output.add_argument("--log-level", dest="log_level")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colourspace",
        description="Exact counting, sampling and geometry of proper colourings of sparse graphs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for name, help_text in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text)

    validate = subparsers.add_parser("validate", help="run every config in a suite directory")
    validate.add_argument("path", nargs="?", default="suite")
    validate.add_argument("--timing", action="store_true")
    validate.add_argument("--log-level", dest="log_level")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        if args.command == "validate":
            result = validate_suite(args.path, timing=args.timing)
            emit(canonical_json(result.to_payload()) + "\n", None)
            return 0 if result.passed else 1

        if args.jobs is not None:
            if args.jobs < 1:
                raise ConfigError(f"--jobs must be at least 1, got {args.jobs}")
            settings.JOBS = args.jobs
        config = build_config(args)
        report = run(config, timing=args.timing)
        emit(render(report, config), config.output)
        if not report.passed:
            failed = sorted(name for name, ok in report.verdicts.items() if not ok)
            logger.warning(f"Failed verdicts: {', '.join(failed)}")
        return 0 if report.passed else 1
    except ColourspaceError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e}")
        return 2


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
