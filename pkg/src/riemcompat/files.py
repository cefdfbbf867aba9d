"""JSON metric and field files.

Metric file::

    {"name": ..., "dimension": n, "signature": [..], "coordinates": [..],
     "parameters": {..}, "components": {"g_0_0": "...", ...}, "domain": [[lo, hi], ...]}

Field files use ``"variance": ["l", "l"]`` and component keys ``"<name>_i_j"``;
the ``name`` also decides the role a field plays in a suite run.
"""
from __future__ import annotations

import json
from pathlib import Path

from .curvature import ChartedMetric, TensorField
from .errors import InputError, RiemCompatError

_METRIC_KEYS = ("name", "dimension", "signature", "coordinates", "parameters", "components", "domain")


def _key(prefix: str, idx) -> str:
    return "_".join([prefix, *map(str, idx)])


def metric_to_dict(m: ChartedMetric) -> dict:
    comps = {_key("g", idx): e.source for idx, e in sorted(m.components.items())}
    return {
        "name": m.name,
        "dimension": m.dim,
        "signature": list(m.signature),
        "coordinates": list(m.coords),
        "parameters": dict(m.params),
        "components": comps,
        "domain": [list(d) for d in m.domain],
    }


def metric_from_dict(d: dict) -> ChartedMetric:
    if not isinstance(d, dict):
        raise InputError("metric file must hold a JSON object")
    missing = [k for k in ("coordinates", "components") if k not in d]
    if missing:
        raise InputError(f"metric file lacks {missing}")
    unknown = set(d) - set(_METRIC_KEYS)
    if unknown:
        raise InputError(f"unknown metric file keys {sorted(unknown)}")
    coords = list(d["coordinates"])
    if "dimension" in d and int(d["dimension"]) != len(coords):
        raise InputError(f"dimension {d['dimension']} does not match {len(coords)} coordinates")
    comps = {}
    for key, src in d["components"].items():
        if not key.startswith("g_"):
            raise InputError(f"component key {key!r} must look like g_i_j")
        comps[key] = src
    try:
        return ChartedMetric.build(d.get("name", "metric"), coords, comps, d.get("parameters"),
                                   d.get("signature"), d.get("domain"))
    except RiemCompatError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed metric file: {exc}") from exc


def field_to_dict(f: TensorField) -> dict:
    return {
        "name": f.name,
        "variance": list(f.variance),
        "coordinates": list(f.coords),
        "parameters": dict(f.params),
        "symmetric": f.symmetric,
        "components": {_key(f.name, idx): e.source for idx, e in sorted(f.components.items())},
    }


def field_from_dict(d: dict) -> TensorField:
    if not isinstance(d, dict) or "name" not in d or "components" not in d:
        raise InputError("field file needs at least 'name' and 'components'")
    variance = tuple(d.get("variance", ("l", "l")))
    if any(v not in ("u", "l") for v in variance):
        raise InputError(f"variance entries must be 'u' or 'l', got {variance}")
    comps = {}
    for key, src in d["components"].items():
        parts = key.split("_")
        comps[tuple(int(t) for t in parts[1:])] = src
    try:
        return TensorField.build(d["name"], variance, d["coordinates"], comps, d.get("parameters"), d.get("symmetric"))
    except RiemCompatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed field file: {exc}") from exc


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_metric(path) -> ChartedMetric:
    return metric_from_dict(_read_json(path))


def load_field(path) -> TensorField:
    return field_from_dict(_read_json(path))


def dump(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"
