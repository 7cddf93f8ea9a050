"""
File formats: partitioned-graph JSON, explicit edge lists and DOT.
"""
import hashlib
import json
import math
from fractions import Fraction

import numpy as np

from graphs.structures import Edge, ExplicitGraph, GraphError, Node, PartitionedGraph, WeightedGraph


class GraphFormatError(GraphError):
    """Raised when a graph file cannot be parsed."""


def _integer(value, name: str) -> int:
    """JSON integers only; floats and booleans are not silently truncated."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphFormatError(f"'{name}' must be an integer, got {value!r}")
    return value


def graph_to_dict(g: PartitionedGraph) -> dict:
    data = {}
    if g.delta is not None:
        data['delta'] = g.delta
    data['nodes'] = [{'id': node.id, 'occupancy': node.occupancy} for node in g.nodes]
    data['edges'] = [{'u': e.u, 'v': e.v, 'du': e.du, 'dv': e.dv} for e in g.edges]
    data['input'] = g.input
    data['output'] = g.output
    return data


def graph_from_dict(data: dict) -> PartitionedGraph:
    try:
        nodes = tuple(Node(str(item['id']), _integer(item['occupancy'], 'occupancy')) for item in data['nodes'])
        edges = tuple(
            Edge(str(item['u']), str(item['v']), _integer(item['du'], 'du'), _integer(item['dv'], 'dv'))
            for item in data['edges']
        )
        delta = data.get('delta')
        return PartitionedGraph(
            nodes=nodes,
            edges=edges,
            input=str(data['input']),
            output=str(data['output']),
            delta=_integer(delta, 'delta') if delta is not None else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"Malformed partitioned graph: {exc!r}") from exc


def dumps(g: PartitionedGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def loads(text: str) -> PartitionedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"Invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GraphFormatError("Partitioned graph JSON must be an object.")
    return graph_from_dict(data)


def graph_hash(g: PartitionedGraph) -> str:
    return hashlib.sha256(dumps(g).encode('utf-8')).hexdigest()


def explicit_to_edges(explicit: ExplicitGraph) -> str:
    lines = [f"N {explicit.size} IN {explicit.input} OUT {explicit.output}"]
    lines.extend(f"{u} {v}" for u, v in explicit.sorted_edges())
    return "\n".join(lines) + "\n"


def explicit_from_edges(text: str) -> ExplicitGraph:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise GraphFormatError("Empty edge list.")
    header = rows[0]
    if len(header) != 6 or header[0] != 'N' or header[2] != 'IN' or header[4] != 'OUT':
        raise GraphFormatError(f"Bad edge-list header: {' '.join(header)}")
    try:
        size, source, target = int(header[1]), int(header[3]), int(header[5])
        pairs = [(int(u), int(v)) for u, v in rows[1:]]
    except ValueError as exc:
        raise GraphFormatError(f"Bad edge-list entry: {exc}") from exc
    for u, v in pairs:
        if not (0 <= u < size and 0 <= v < size):
            raise GraphFormatError(f"Edge {u} {v} outside 0..{size - 1}")
    return ExplicitGraph.from_edge_list(size, pairs, input=source, output=target)


def _quote(text: str) -> str:
    return '"' + text.replace('\\', '\\\\').replace('"', '\\"') + '"'


def graph_to_dot(g: PartitionedGraph) -> str:
    lines = ["graph partitioned {"]
    for node in g.nodes:
        shape = ', shape=doublecircle' if node.id in (g.input, g.output) else ''
        label = f"{node.id}\\n{node.occupancy}"
        lines.append(f"  {_quote(node.id)} [label=\"{label}\"{shape}];")
    for e in g.edges:
        lines.append(f"  {_quote(e.u)} -- {_quote(e.v)} [taillabel=\"{e.du}\", headlabel=\"{e.dv}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def explicit_to_dot(explicit: ExplicitGraph) -> str:
    lines = ["graph explicit {"]
    for vertex in (explicit.input, explicit.output):
        lines.append(f"  {vertex} [shape=doublecircle];")
    lines.extend(f"  {u} -- {v};" for u, v in explicit.sorted_edges())
    lines.append("}")
    return "\n".join(lines) + "\n"


def weighted_to_dict(w: WeightedGraph) -> dict:
    """Weighted graphs keep exact squared weights as strings ("3", "5/2") where known."""
    rows, cols = np.nonzero(np.triu(w.weights))
    edges = []
    for i, j in zip(rows.tolist(), cols.tolist()):
        square = w.exact_squares.get((i, j))
        if square is None:
            edges.append({'u': i, 'v': j, 'weight': float(w.weights[i, j])})
        else:
            edges.append({'u': i, 'v': j, 'square': str(square)})
    return {
        'kind': 'weighted',
        'size': w.size,
        'labels': list(w.labels),
        'edges': edges,
        'input': w.input,
        'output': w.output,
    }


def weighted_from_dict(data: dict) -> WeightedGraph:
    try:
        size = _integer(data['size'], 'size')
        edges = data['edges']
        options = {
            'input': _integer(data['input'], 'input'),
            'output': _integer(data['output'], 'output'),
            'labels': tuple(str(label) for label in data.get('labels', ())),
        }
        if all('square' in item for item in edges):
            squares = []
            for item in edges:
                square = Fraction(str(item['square']))
                squares.append((
                    _integer(item['u'], 'u'),
                    _integer(item['v'], 'v'),
                    int(square) if square.denominator == 1 else square,
                ))
            return WeightedGraph.from_squared_edges(size, squares, **options)
        weighted = []
        for item in edges:
            weight = float(item['weight']) if 'weight' in item else math.sqrt(Fraction(str(item['square'])))
            weighted.append((_integer(item['u'], 'u'), _integer(item['v'], 'v'), weight))
        return WeightedGraph.from_edges(size, weighted, **options)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise GraphFormatError(f"Malformed weighted graph: {exc!r}") from exc


def weighted_dumps(w: WeightedGraph) -> str:
    return json.dumps(weighted_to_dict(w), indent=2) + "\n"


def load_any(text: str):
    """Parse an edge list, a weighted-graph JSON or a partitioned-graph JSON."""
    if text.lstrip().startswith('N '):
        return explicit_from_edges(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"Invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GraphFormatError("Graph JSON must be an object.")
    if data.get('kind') == 'weighted':
        return weighted_from_dict(data)
    return graph_from_dict(data)
