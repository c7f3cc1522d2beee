"""
Experiment files are flat `key = value` text. Blank lines and `#` comments are ignored and list values are comma
separated, e.g.

    kind = phase_grid
    n = 1000
    m = 200, 500, 1000, 1500
    s = 20
    trials = 100
"""

from pathlib import Path
from typing import Any

from pydantic import ValidationError

from sparse_phase.lib.errors import RejectedInput
from sparse_phase.models.experiments import ExperimentSpec


def parse_spec_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition("=")
        if not separator or not key.strip():
            raise RejectedInput(f"Line {number} is not a 'key = value' pair: {raw_line!r}")
        key = key.strip()
        if key in values:
            raise RejectedInput(f"Line {number} repeats the key '{key}'")
        values[key] = value.strip()
    return values


def build_spec(values: dict[str, Any], defaults: dict[str, Any] | None = None, **overrides: Any) -> ExperimentSpec:
    """
    Validates raw values into a spec. Precedence is overrides, then values, then defaults; overrides that are None
    are ignored.
    """
    unknown = set(values) - set(ExperimentSpec.model_fields)
    if unknown:
        raise RejectedInput(f"Unknown experiment keys: {', '.join(sorted(unknown))}")
    merged = {**(defaults or {}), **values, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return ExperimentSpec.model_validate(merged)
    except ValidationError as e:
        raise RejectedInput(f"Invalid experiment specification: {e}") from e


def load_spec_file(path: Path, defaults: dict[str, Any] | None = None, **overrides: Any) -> ExperimentSpec:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise RejectedInput(f"Cannot read experiment file {path}: {e}") from e
    return build_spec(parse_spec_text(text), defaults, **overrides)
