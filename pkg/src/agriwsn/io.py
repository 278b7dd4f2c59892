"""JSON and CSV serialisation of deployments, traces and comparison rows.

Writers sort keys and rows so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError
from .field import FieldSpec, Point2D
from .gdl import Trace
from .placement import Deployment, SensorNode

DEPLOYMENT_CSV_HEADER = ("id", "x", "y", "role", "tech", "parent")
TRACE_CSV_HEADER = ("iter", "objective", "max_delta")
COMPARISON_CSV_HEADER = ("strategy", "seed", "node_count", "coverage", "power", "delay", "cost")
SCORE_CSV_HEADER = ("metric", "value", "method", "parameters")
RANKING_CSV_HEADER = ("rank", "name", "score")


def _plain(value):
    """Convert numpy scalars and tuples into JSON-native values."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dumps(data) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"


def deployment_to_dict(dep: Deployment) -> dict:
    return {
        "field": dep.field.to_dict(),
        "nodes": [
            {"id": n.id, "x": float(n.position.x), "y": float(n.position.y), "role": n.role, "tech": n.tech}
            for n in sorted(dep.nodes, key=lambda n: n.id)
        ],
        "links": [{"child": c, "parent": p} for c, p in sorted(dep.links.items())],
        "meta": _plain(dep.meta),
    }


def deployment_from_dict(data: Mapping) -> Deployment:
    unknown = set(data) - {"field", "nodes", "links", "meta"}
    if unknown:
        raise ConfigError(f"unknown deployment keys: {sorted(unknown)}")
    try:
        spec = FieldSpec.from_dict(data.get("field", {}))
        nodes = [SensorNode(int(n["id"]), Point2D(float(n["x"]), float(n["y"])), n["role"], n["tech"])
                 for n in data["nodes"]]
        links = {int(link["child"]): int(link["parent"]) for link in data.get("links", [])}
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed deployment: {exc}") from None
    return Deployment(spec, nodes, links, dict(data.get("meta", {})))


def write_deployment_json(dep: Deployment, path) -> Path:
    path = Path(path)
    path.write_text(dumps(deployment_to_dict(dep)))
    return path


def read_deployment_json(path) -> Deployment:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return deployment_from_dict(data)


def _csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def deployment_csv(dep: Deployment) -> str:
    rows = []
    for n in sorted(dep.nodes, key=lambda n: n.id):
        parent = dep.links.get(n.id)
        rows.append((n.id, _fmt(n.position.x), _fmt(n.position.y), n.role, n.tech,
                     "" if parent is None else parent))
    return _csv_text(DEPLOYMENT_CSV_HEADER, rows)


def trace_csv(trace: Trace) -> str:
    return _csv_text(TRACE_CSV_HEADER, ((i, _fmt(obj), _fmt(d)) for i, obj, d in trace.rows()))


def comparison_csv(rows: Iterable[Mapping]) -> str:
    body = []
    for r in rows:
        body.append((r["strategy"], r["seed"], r["node_count"],
                     *(_fmt(r[k]) for k in ("coverage", "power", "delay", "cost"))))
    return _csv_text(COMPARISON_CSV_HEADER, body)


def score_csv(rows: Iterable[tuple]) -> str:
    return _csv_text(SCORE_CSV_HEADER, ((name, _fmt(v), method, params) for name, v, method, params in rows))


def ranking_csv(items: Iterable[tuple[str, float]]) -> str:
    return _csv_text(RANKING_CSV_HEADER, ((i, name, _fmt(v)) for i, (name, v) in enumerate(items, start=1)))


def read_comparison_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append({
                "strategy": r["strategy"],
                "seed": int(r["seed"]),
                "node_count": int(r["node_count"]),
                **{k: float(r[k]) for k in ("coverage", "power", "delay", "cost")},
            })
        return out


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text)
    return path
