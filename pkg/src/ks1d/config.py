"""Flat ``key = value`` scenario files.

Values are JSON literals (numbers, ``true``/``false``, lists) or bare
strings.  Keys::

    m, gamma, q, epsilon, drift_enabled, x_min, x_max, n_cells, t_end,
    cfl_sigma, u0.kind, u0.params, hole.a, hole.b, n_frames
"""

from __future__ import annotations

import configparser
import json
from pathlib import Path

from .model import InitialData, Scenario, ScenarioError, build_grid

REQUIRED = ("m", "gamma", "q", "epsilon", "x_min", "x_max", "n_cells", "t_end", "u0.kind")
OPTIONAL = ("drift_enabled", "cfl_sigma", "u0.params", "hole.a", "hole.b", "n_frames")


_SECTION = "scenario"


class ConfigError(ValueError):
    """Malformed scenario file."""


def parse_text(text: str) -> dict:
    """Read ``key = value`` lines (``#`` comments allowed) into decoded values."""
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if parser.sections() != [_SECTION]:
        raise ConfigError("section headers are not allowed")
    out: dict = {}
    for key, value in parser.items(_SECTION):
        if key not in REQUIRED and key not in OPTIONAL:
            raise ConfigError(f"unknown key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value.strip("'\"")
    return out


def _number(d: dict, key: str, default=None) -> float:
    value = d.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def scenario_from_dict(d: dict) -> Scenario:
    missing = [k for k in REQUIRED if k not in d]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    if ("hole.a" in d) != ("hole.b" in d):
        raise ConfigError("hole.a and hole.b must be given together")
    params = d.get("u0.params", [])
    if not isinstance(params, list):
        raise ConfigError("u0.params must be a list")
    drift = d.get("drift_enabled", True)
    if not isinstance(drift, bool):
        raise ConfigError("drift_enabled must be true or false")
    n_cells = _number(d, "n_cells")
    n_frames = _number(d, "n_frames", 20)
    if n_cells != int(n_cells) or n_frames != int(n_frames):
        raise ConfigError("n_cells and n_frames must be integers")
    hole = (_number(d, "hole.a"), _number(d, "hole.b")) if "hole.a" in d else None
    try:
        return Scenario(
            m=_number(d, "m"),
            gamma=_number(d, "gamma"),
            q=_number(d, "q"),
            epsilon=_number(d, "epsilon"),
            grid=build_grid(_number(d, "x_min"), _number(d, "x_max"), int(n_cells)),
            u0=InitialData(str(d["u0.kind"]), tuple(params)),
            t_end=_number(d, "t_end"),
            drift_enabled=drift,
            cfl_sigma=_number(d, "cfl_sigma", 0.4),
            hole=hole,
            n_frames=int(n_frames),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ConfigError(str(exc)) from exc


def loads(text: str) -> Scenario:
    return scenario_from_dict(parse_text(text))


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def dumps(sc: Scenario) -> str:
    g = sc.grid
    items = [
        ("m", sc.m),
        ("gamma", sc.gamma),
        ("q", sc.q),
        ("epsilon", sc.epsilon),
        ("drift_enabled", sc.drift_enabled),
        ("x_min", g.x_min),
        ("x_max", g.x_max),
        ("n_cells", g.n_cells),
        ("t_end", sc.t_end),
        ("cfl_sigma", sc.cfl_sigma),
        ("n_frames", sc.n_frames),
        ("u0.kind", sc.u0.kind),
        ("u0.params", list(sc.u0.params)),
    ]
    if sc.hole is not None:
        items += [("hole.a", sc.hole[0]), ("hole.b", sc.hole[1])]
    lines = []
    for key, value in items:
        lines.append(f"{key} = {value}" if key == "u0.kind" else f"{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"


def dump(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc))


def bundled_dir() -> Path:
    return Path(__file__).with_name("scenarios")


def bundled_scenarios() -> dict[str, Path]:
    return {p.stem: p for p in sorted(bundled_dir().glob("*.cfg"))}
