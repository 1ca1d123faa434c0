"""Flat ``key = value`` experiment files.

Values are JSON (``128``, ``0.5``, ``true``, ``"edge_count"``, ``null``); a bare
word is taken as a string. Problem fields use their own names, detector
parameters are written ``detector.<name>``, and ``#`` starts a comment line.
Unknown keys are an error.
"""

import dataclasses
import json

from ..distributions import ProblemSpec
from ..errors import InvalidParams
from .runner import ExperimentConfig

PROBLEM_KEYS = tuple(f.name for f in dataclasses.fields(ProblemSpec))
EXPERIMENT_KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig)
                        if f.name not in ("problem", "detector_params"))
DETECTOR_PREFIX = "detector."


def _value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config(text, overrides=None):
    """Parse config text into an :class:`ExperimentConfig`; ``overrides`` win over the file."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidParams("config", f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in entries:
            raise InvalidParams(key, f"line {lineno}: duplicate key")
        entries[key] = _value(val)
    entries.update({k: v for k, v in (overrides or {}).items() if v is not None})
    problem, experiment, det = {}, {}, {}
    for key, val in entries.items():
        if key.startswith(DETECTOR_PREFIX):
            det[key[len(DETECTOR_PREFIX):]] = val
        elif key in PROBLEM_KEYS or key in EXPERIMENT_KEYS:
            if key in PROBLEM_KEYS:
                problem[key] = val
            if key in EXPERIMENT_KEYS:
                experiment[key] = val
        else:
            raise InvalidParams(key, "unknown config key")
    if "kind" not in problem:
        raise InvalidParams("kind", "config needs a problem kind")
    try:
        spec = ProblemSpec(**problem)
    except (KeyError, TypeError) as e:
        raise InvalidParams("kind", str(e)) from e
    return ExperimentConfig(problem=spec, detector_params=det, **experiment)


def load_config(path, overrides=None):
    with open(path) as fh:
        return parse_config(fh.read(), overrides)


def dump_config(cfg):
    """Canonical text form; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for key, val in cfg.problem.to_dict().items():
        if key == "passes":
            continue
        lines.append(f"{key} = {json.dumps(val)}")
    for key in EXPERIMENT_KEYS:
        lines.append(f"{key} = {json.dumps(getattr(cfg, key))}")
    for key, val in sorted(cfg.detector_params.items()):
        lines.append(f"{DETECTOR_PREFIX}{key} = {json.dumps(val)}")
    return "\n".join(lines) + "\n"
