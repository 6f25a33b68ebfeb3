"""
Suite validation for Colourspace

A suite is a directory of experiment configs. Each config may carry an
``expect`` block mapping dotted paths into its report payload to expected
values:

    "measured.count": "30"                               exact match
    "measured.log_count": {"value": 15.9, "rel_tol": 1e-3}
    "measured.estimate": {"le": "bounds.percolation"}     path or number
    "measured.frozen": {"ge": 1}

A config passes when every expectation holds and every verdict is true.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from .core.errors import ColourspaceError, SuiteError
from .routes import run
from .schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

_MISSING = object()


def lookup(payload: Dict[str, Any], path: str) -> Any:
    """Follow ``a.b.0.c`` through nested dicts and lists"""
    node: Any = payload
    for part in path.split("."):
        if isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, list) and part.lstrip("-").isdigit() and -len(node) <= int(part) < len(node):
            node = node[int(part)]
        else:
            return _MISSING
    return node


def _resolve(payload: Dict[str, Any], operand: Union[str, float, int]) -> Any:
    if isinstance(operand, str):
        return lookup(payload, operand)
    return operand


def check_expectation(payload: Dict[str, Any], path: str, expected: Any) -> Optional[str]:
    """None when the expectation holds, else a one-line reason"""
    actual = lookup(payload, path)
    if actual is _MISSING:
        return f"{path}: missing from report"

    if isinstance(expected, dict) and "value" in expected:
        target = expected["value"]
        rel_tol = expected.get("rel_tol", 1e-9)
        abs_tol = expected.get("abs_tol", 0.0)
        try:
            ok = math.isclose(float(actual), float(target), rel_tol=rel_tol, abs_tol=abs_tol)
        except (TypeError, ValueError):
            return f"{path}: {actual!r} is not numeric"
        return None if ok else f"{path}: {actual!r} not within {rel_tol} of {target!r}"

    if isinstance(expected, dict) and ("le" in expected or "ge" in expected):
        for op in ("le", "ge"):
            if op not in expected:
                continue
            other = _resolve(payload, expected[op])
            if other is _MISSING or other is None:
                return f"{path}: comparison operand {expected[op]!r} missing"
            try:
                ok = float(actual) <= float(other) if op == "le" else float(actual) >= float(other)
            except (TypeError, ValueError):
                return f"{path}: {actual!r} is not numeric"
            if not ok:
                return f"{path}: {actual!r} is not {op} {other!r}"
        return None

    if actual != expected:
        return f"{path}: expected {expected!r}, got {actual!r}"
    return None


@dataclass
class ConfigResult:
    name: str
    passed: bool
    failures: List[str] = field(default_factory=list)
    duration_seconds: Optional[float] = None

    def to_dict(self) -> dict:
        data = {"name": self.name, "passed": self.passed, "failures": self.failures}
        if self.duration_seconds is not None:
            data["duration_seconds"] = self.duration_seconds
        return data


@dataclass
class SuiteResult:
    results: List[ConfigResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed(self) -> List[str]:
        return [result.name for result in self.results if not result.passed]

    def to_payload(self) -> dict:
        return {
            "passed": self.passed,
            "total": len(self.results),
            "failed": self.failed,
            "results": [result.to_dict() for result in self.results],
        }


def run_config(path: Path, timing: bool = False) -> ConfigResult:
    """Run one suite file; errors are recorded as failures, never raised"""
    start = time.perf_counter()
    failures: List[str] = []
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        config = ExperimentConfig.model_validate(data)
        report = run(config)
        payload = report.to_payload()
        for dotted, expected in sorted(config.expect.items()):
            problem = check_expectation(payload, dotted, expected)
            if problem:
                failures.append(problem)
        failures.extend(f"verdict {name} is false" for name, ok in sorted(report.verdicts.items()) if not ok)
    except json.JSONDecodeError as e:
        failures.append(f"invalid JSON at line {e.lineno}: {e.msg}")
    except ValidationError as e:
        failures.append(f"invalid config: {e.error_count()} error(s), first: {e.errors()[0]['msg']}")
    except ColourspaceError as e:
        failures.append(f"{type(e).__name__}: {e}")

    duration = time.perf_counter() - start if timing else None
    if failures:
        logger.warning(f"Suite config {path.name} failed: {'; '.join(failures)}")
    else:
        logger.info(f"Suite config {path.name} passed")
    return ConfigResult(path.name, not failures, failures, duration)


def validate_suite(path: Union[str, Path], timing: bool = False) -> SuiteResult:
    """Run every ``*.json`` under ``path`` in name order"""
    directory = Path(path)
    if not directory.is_dir():
        raise SuiteError(f"suite directory {directory} does not exist")
    configs = sorted(directory.glob("*.json"))
    if not configs:
        raise SuiteError(f"suite directory {directory} has no configs")

    logger.info(f"Validating {len(configs)} configs in {directory}")
    result = SuiteResult([run_config(config, timing) for config in configs])
    logger.info(f"Suite finished: {len(result.results) - len(result.failed)}/{len(result.results)} passed")
    return result
