"""JSON, DOT and CSV serialization.

Infinite distances are written as ``null``. Output is deterministic: keys
keep a fixed order and floats use ``repr`` precision, so equal inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .convergence import WarpSequence
from .errors import StructuralError
from .foliation import TANGENTIAL, Edge, FoliatedComplex, HlsSpace, WarpSpec
from .gh import Correspondence, GhEstimate
from .graph import MetricGraph
from .metric import FiniteMetricSpace, WeightedGraphSpace
from .quotient import QuotientResult


def _num(v: float):
    v = float(v)
    return None if np.isinf(v) else v


def _table(D: np.ndarray):
    return [[_num(v) for v in row] for row in D]


def _read_table(rows) -> np.ndarray:
    try:
        return np.array([[np.inf if v is None else float(v) for v in row] for row in rows], dtype=float).reshape(
            len(rows), -1 if rows else 0
        )
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"bad distance table: {exc}") from None


def _need(data: Mapping, *keys: str, what: str):
    if not isinstance(data, Mapping):
        raise StructuralError(f"{what} JSON must be an object")
    for k in keys:
        if k not in data:
            raise StructuralError(f"{what} JSON is missing {k!r}")


# -- to JSON ----------------------------------------------------------------


def to_json(obj: Any):
    if isinstance(obj, FiniteMetricSpace):
        out = {"points": list(obj.points), "dist": _table(obj.dist)}
        if obj.labels:
            out["labels"] = dict(obj.labels)
        return out
    if isinstance(obj, WeightedGraphSpace):
        return {"vertices": list(obj.vertices), "edges": [[u, v, float(w)] for u, v, w in obj.edges]}
    if isinstance(obj, FoliatedComplex):
        out = {
            "vertices": list(obj.vertices),
            "leaf_of": {v: obj.leaf_of[v] for v in obj.vertices},
            "edges": [[e.u, e.v, float(e.length), e.kind] for e in obj.edges],
            "mesh": float(obj.mesh),
        }
        if obj.compact_leaves:
            out["compact_leaves"] = sorted(obj.compact_leaves)
        if obj.leaf_tags:
            out["leaf_tags"] = dict(obj.leaf_tags)
        return out
    if isinstance(obj, MetricGraph):
        return {"nodes": list(obj.nodes), "edges": [[u, v, float(w)] for u, v, w in obj.edges]}
    if isinstance(obj, HlsSpace):
        return {
            "space": to_json(obj.space),
            "class_of_leaf": dict(obj.class_of_leaf),
            "class_of_vertex": dict(obj.class_of_vertex),
        }
    if isinstance(obj, QuotientResult):
        return {"space": to_json(obj.space), "class_map": dict(obj.class_map), "connected": obj.connected}
    if isinstance(obj, WarpSpec):
        return {"values": dict(obj.values)}
    if isinstance(obj, WarpSequence):
        out = {"base": to_json(obj.base), "kind": obj.kind}
        if obj.leaves:
            out["leaves"] = list(obj.leaves)
        if obj.table:
            out["table"] = {str(n): dict(v) for n, v in obj.table.items()}
        return out
    if isinstance(obj, (GhEstimate, Correspondence)):
        return obj.to_json()
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def clean(data):
    """Replace infinite floats by ``None`` and tuples by lists, recursively."""
    if isinstance(data, dict):
        return {str(k): clean(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [clean(v) for v in data]
    if isinstance(data, (float, np.floating)):
        return _num(data)
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, np.bool_):
        return bool(data)
    return data


def dumps(obj: Any) -> str:
    data = clean(obj if isinstance(obj, (dict, list)) else to_json(obj))
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def save(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: invalid JSON ({exc})") from None


# -- from JSON --------------------------------------------------------------


def space_from_json(data) -> FiniteMetricSpace:
    _need(data, "points", "dist", what="metric space")
    return FiniteMetricSpace(tuple(data["points"]), _read_table(data["dist"]), data.get("labels"))


def graph_space_from_json(data) -> WeightedGraphSpace:
    _need(data, "vertices", "edges", what="weighted graph")
    return WeightedGraphSpace(tuple(data["vertices"]), tuple((str(u), str(v), float(w)) for u, v, w in data["edges"]))


def complex_from_json(data) -> FoliatedComplex:
    _need(data, "vertices", "leaf_of", "edges", "mesh", what="foliated complex")
    edges = []
    for e in data["edges"]:
        if len(e) == 3:
            e = [*e, TANGENTIAL]
        u, v, w, kind = e
        edges.append(Edge(str(u), str(v), float(w), str(kind)))
    return FoliatedComplex(
        tuple(data["vertices"]),
        dict(data["leaf_of"]),
        tuple(edges),
        float(data["mesh"]),
        frozenset(data.get("compact_leaves", ())),
        dict(data.get("leaf_tags", {})),
    )


def metric_graph_from_json(data) -> MetricGraph:
    _need(data, "nodes", "edges", what="metric graph")
    return MetricGraph(tuple(data["nodes"]), tuple((str(u), str(v), float(w)) for u, v, w in data["edges"]))


def hls_from_json(data) -> HlsSpace:
    _need(data, "space", "class_of_leaf", "class_of_vertex", what="leaf space")
    return HlsSpace(space_from_json(data["space"]), dict(data["class_of_leaf"]), dict(data["class_of_vertex"]))


def quotient_from_json(data) -> QuotientResult:
    _need(data, "space", "class_map", what="quotient")
    return QuotientResult(space_from_json(data["space"]), dict(data["class_map"]))


def warp_from_json(data) -> WarpSpec:
    _need(data, "values", what="warp")
    return WarpSpec(dict(data["values"]))


def sequence_from_json(data) -> WarpSequence:
    _need(data, "base", what="warp sequence")
    table = {int(n): v for n, v in data.get("table", {}).items()}
    return WarpSequence(complex_from_json(data["base"]), data.get("kind", "constant"), tuple(data.get("leaves", ())), table)


def estimate_from_json(data) -> GhEstimate:
    _need(data, "lower", "upper", "method", what="GH estimate")
    return GhEstimate(float(data["lower"]), float(data["upper"]), str(data["method"]), data.get("witness"))


def relation_from_json(data) -> list[tuple[str, str]]:
    """Pair list ``[[a, b], ...]`` or a mapping ``{a: b}``."""
    if isinstance(data, Mapping):
        return [(str(a), str(b)) for a, b in data.items()]
    try:
        return [(str(a), str(b)) for a, b in data]
    except (TypeError, ValueError):
        raise StructuralError("relation must be a list of pairs or an object") from None


def space_like(data) -> FiniteMetricSpace:
    """Metric space from any JSON that carries one (space, graph, leaf space, quotient)."""
    if isinstance(data, Mapping):
        if "dist" in data:
            return space_from_json(data)
        if "space" in data:
            return space_from_json(data["space"])
        if "leaf_of" in data:
            from .foliation import hls

            return hls(complex_from_json(data)).space
        if "vertices" in data:
            from .metric import geodesic_metric

            return geodesic_metric(graph_space_from_json(data))
        if "nodes" in data:
            from .metric import geodesic_metric

            g = metric_graph_from_json(data)
            return geodesic_metric(WeightedGraphSpace(g.nodes, tuple((u, v, w) for u, v, w in g.edges if u != v)))
    raise StructuralError("input does not describe a metric space")


# -- DOT --------------------------------------------------------------------


def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def complex_to_dot(k: FoliatedComplex) -> str:
    """Vertices clustered by leaf; tangential edges solid blue, transverse dashed red."""
    lines = ["graph complex {"]
    for i, (leaf, verts) in enumerate(k.leaf_vertices().items()):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_q(leaf)};")
        for v in verts:
            lines.append(f"    {_q(v)};")
        lines.append("  }")
    for e in k.edges:
        style = 'color="blue"' if e.kind == TANGENTIAL else 'color="red", style="dashed"'
        lines.append(f"  {_q(e.u)} -- {_q(e.v)} [{style}, label={_q(f'{e.length:.6g}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dot(g: MetricGraph) -> str:
    lines = ["graph metric_graph {"]
    lines += [f"  {_q(n)};" for n in g.nodes]
    lines += [f"  {_q(u)} -- {_q(v)} [label={_q(f'{w:.6g}')}];" for u, v, w in g.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def space_to_dot(s: FiniteMetricSpace, rel_tol: float = 1e-9) -> str:
    """Edges of the space's skeleton: pairs not realized through a third point."""
    D = s.dist
    n = len(s)
    tol = rel_tol * (s.diameter or 1.0)
    lines = ["graph space {"]
    lines += [f"  {_q(p)};" for p in s.points]
    for i in range(n):
        for j in range(i + 1, n):
            if not np.isfinite(D[i, j]):
                continue
            via = D[i] + D[:, j]
            via[[i, j]] = np.inf
            if n <= 2 or via.min() > D[i, j] + tol:
                lines.append(f"  {_q(s.points[i])} -- {_q(s.points[j])} [label={_q(f'{D[i, j]:.6g}')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
