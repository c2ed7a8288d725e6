"""In-memory decision property graph.

Nodes hold static guideline text (``content``) plus a dynamic map of patient
constraints (the decision dimension). Relationships are typed directed edges.
Node and relationship ids are positive integers assigned in insertion order
and never reused. Constraint mutation is constant-time given a node id;
filtered search is a single linear scan.

Reads are safe to run concurrently; mutations require exclusive access
(single-writer / multiple-reader). The graph carries no threads or locks of
its own and can be handed between threads freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .constraints import (
    Categorical,
    ConstraintValue,
    FilterPredicate,
    Interval,
    Numeric,
    Presence,
    matches_filter,
)

NodeId = int


class GraphError(Exception):
    pass


class UnknownNode(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"unknown node id {node_id}")


class EmptyContent(GraphError):
    def __init__(self):
        super().__init__("node content must be non-empty")


class DuplicateConstraintKey(GraphError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"duplicate constraint key {key!r}")


class DuplicateRelationship(GraphError):
    def __init__(self, src: NodeId, dst: NodeId, rel_type: str):
        super().__init__(f"duplicate relationship ({src})-[:{rel_type}]->({dst})")


@dataclass
class Node:
    id: NodeId
    label: str
    content: str
    constraints: dict[str, ConstraintValue] = field(default_factory=dict)

    @property
    def is_decision_node(self) -> bool:
        # derived classification, never stored
        return bool(self.constraints)


@dataclass(frozen=True)
class Relationship:
    id: int
    src: NodeId
    dst: NodeId
    rel_type: str


@dataclass(frozen=True)
class GraphStats:
    total_nodes: int
    decision_nodes: int
    relations: int


def normalize_content(text: str) -> str:
    """Identity form of node content: lowercased, whitespace-collapsed."""
    return " ".join(text.lower().split())


def value_to_json(value: ConstraintValue) -> dict:
    if isinstance(value, Categorical):
        return {"type": "categorical", "value": value.value, "display": value.display}
    if isinstance(value, Numeric):
        return {"type": "numeric", "op": value.op, "value": value.value}
    if isinstance(value, Interval):
        return {
            "type": "interval",
            "low": value.low,
            "high": value.high,
            "low_inclusive": value.low_inclusive,
            "high_inclusive": value.high_inclusive,
        }
    return {"type": "presence", "present": value.present}


def value_from_json(data: dict) -> ConstraintValue:
    kind = data["type"]
    if kind == "categorical":
        return Categorical(data["value"], data.get("display", data["value"]))
    if kind == "numeric":
        return Numeric(data["op"], data["value"])
    if kind == "interval":
        return Interval(
            data["low"],
            data["high"],
            data.get("low_inclusive", True),
            data.get("high_inclusive", True),
        )
    if kind == "presence":
        return Presence(data["present"])
    raise ValueError(f"unknown constraint value type {kind!r}")


class DecisionGraph:
    """Mutable decision graph with stable integer ids."""

    SNAPSHOT_VERSION = 1

    def __init__(self):
        self._nodes: dict[NodeId, Node] = {}
        self._rels: dict[int, Relationship] = {}
        self._rel_keys: set[tuple[NodeId, NodeId, str]] = set()
        self._out: dict[NodeId, list[int]] = {}
        self._in: dict[NodeId, list[int]] = {}
        self._content_index: dict[str, NodeId] = {}
        self._next_node_id = 1
        self._next_rel_id = 1
        self._decision_count = 0
        # instrumentation for the complexity contract
        self.op_counts = {"constraint_map_ops": 0, "nodes_visited": 0}

    # -- construction -------------------------------------------------------

    def add_node(
        self,
        label: str,
        content: str,
        constraints: list[tuple[str, ConstraintValue]] | None = None,
    ) -> NodeId:
        """Insert a node; returns its id (previous max + 1, never reused)."""
        if not content.strip():
            raise EmptyContent()
        cmap: dict[str, ConstraintValue] = {}
        for key, value in constraints or []:
            key = key.lower()
            if key in cmap:
                raise DuplicateConstraintKey(key)
            cmap[key] = value
        node_id = self._next_node_id
        self._next_node_id += 1
        self._nodes[node_id] = Node(node_id, label, content, cmap)
        self._out[node_id] = []
        self._in[node_id] = []
        self._content_index.setdefault(normalize_content(content), node_id)
        if cmap:
            self._decision_count += 1
        return node_id

    def add_relationship(
        self, src: NodeId, dst: NodeId, rel_type: str = "next_step"
    ) -> int:
        """Insert a directed, typed edge; duplicates are rejected."""
        self._require(src)
        self._require(dst)
        key = (src, dst, rel_type)
        if key in self._rel_keys:
            raise DuplicateRelationship(src, dst, rel_type)
        rel_id = self._next_rel_id
        self._next_rel_id += 1
        rel = Relationship(rel_id, src, dst, rel_type)
        self._rels[rel_id] = rel
        self._rel_keys.add(key)
        self._out[src].append(rel_id)
        self._in[dst].append(rel_id)
        return rel_id

    # -- lookup -------------------------------------------------------------

    def get_node(self, node_id: NodeId) -> Node:
        return self._require(node_id)

    def has_node(self, node_id: NodeId) -> bool:
        return node_id in self._nodes

    def node_ids(self) -> list[NodeId]:
        return sorted(self._nodes)

    def nodes(self) -> list[Node]:
        return [self._nodes[i] for i in sorted(self._nodes)]

    def relationships(self) -> list[Relationship]:
        return [self._rels[i] for i in sorted(self._rels)]

    def find_node_by_content(self, content: str) -> NodeId | None:
        """Ingest identity lookup: first node with this normalized content."""
        return self._content_index.get(normalize_content(content))

    def find_nodes(self, filters: list[tuple[str, FilterPredicate]]) -> list[NodeId]:
        """Ids of nodes whose constraint map satisfies every (key, predicate)
        pair; empty filter matches everything. Single pass over all nodes."""
        out = []
        for node_id in sorted(self._nodes):
            self.op_counts["nodes_visited"] += 1
            node = self._nodes[node_id]
            ok = True
            for key, pred in filters:
                value = node.constraints.get(key.lower())
                if value is None or not matches_filter(value, pred):
                    ok = False
                    break
            if ok:
                out.append(node_id)
        return out

    def neighbors(
        self, node_id: NodeId, rel_type: str = "next_step", direction: str = "outgoing"
    ) -> list[NodeId]:
        """Adjacent node ids over edges of the given type, ascending."""
        self._require(node_id)
        if direction not in ("outgoing", "incoming"):
            raise ValueError(f"bad direction {direction!r}")
        rel_ids = self._out[node_id] if direction == "outgoing" else self._in[node_id]
        out = set()
        for rid in rel_ids:
            rel = self._rels[rid]
            if rel.rel_type == rel_type:
                out.add(rel.dst if direction == "outgoing" else rel.src)
        return sorted(out)

    def stats(self) -> GraphStats:
        return GraphStats(len(self._nodes), self._decision_count, len(self._rels))

    def root_ids(self) -> list[NodeId]:
        """Nodes with no incoming edges (flowchart entry points)."""
        return [i for i in sorted(self._nodes) if not self._in[i]]

    # -- constraint mutation (O(1) given the node id) ------------------------

    def set_constraint(self, node_id: NodeId, key: str, value: ConstraintValue) -> None:
        """Insert-or-overwrite one constraint; nothing else changes."""
        node = self._require(node_id)
        had = bool(node.constraints)
        node.constraints[key.lower()] = value
        self.op_counts["constraint_map_ops"] += 1
        if not had:
            self._decision_count += 1

    def remove_constraint(self, node_id: NodeId, key: str) -> bool:
        """Delete one constraint; removing an absent key is a no-op.
        Returns whether the key was present."""
        node = self._require(node_id)
        existed = node.constraints.pop(key.lower(), None) is not None
        self.op_counts["constraint_map_ops"] += 1
        if existed and not node.constraints:
            self._decision_count -= 1
        return existed

    # -- snapshot serialization ----------------------------------------------

    def to_snapshot(self) -> str:
        """Line-oriented JSON snapshot; see docs/file_formats.md."""
        lines = [
            json.dumps(
                {
                    "kind": "graph",
                    "version": self.SNAPSHOT_VERSION,
                    "next_node_id": self._next_node_id,
                    "next_rel_id": self._next_rel_id,
                },
                sort_keys=True,
            )
        ]
        for node in self.nodes():
            lines.append(
                json.dumps(
                    {
                        "kind": "node",
                        "id": node.id,
                        "label": node.label,
                        "content": node.content,
                        "constraints": [
                            [k, value_to_json(node.constraints[k])]
                            for k in sorted(node.constraints)
                        ],
                    },
                    sort_keys=True,
                )
            )
        for rel in self.relationships():
            lines.append(
                json.dumps(
                    {
                        "kind": "rel",
                        "id": rel.id,
                        "from": rel.src,
                        "to": rel.dst,
                        "type": rel.rel_type,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_snapshot(cls, text: str) -> "DecisionGraph":
        graph = cls()
        header_seen = False
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            kind = record.get("kind")
            if kind == "graph":
                if record.get("version") != cls.SNAPSHOT_VERSION:
                    raise GraphError(f"unsupported snapshot version {record.get('version')}")
                graph._next_node_id = record["next_node_id"]
                graph._next_rel_id = record["next_rel_id"]
                header_seen = True
            elif kind == "node":
                node = Node(
                    record["id"],
                    record["label"],
                    record["content"],
                    {k: value_from_json(v) for k, v in record["constraints"]},
                )
                graph._nodes[node.id] = node
                graph._out[node.id] = []
                graph._in[node.id] = []
                graph._content_index.setdefault(normalize_content(node.content), node.id)
                if node.constraints:
                    graph._decision_count += 1
            elif kind == "rel":
                rel = Relationship(record["id"], record["from"], record["to"], record["type"])
                if rel.src not in graph._nodes or rel.dst not in graph._nodes:
                    raise GraphError(f"line {lineno}: relationship references unknown node")
                graph._rels[rel.id] = rel
                graph._rel_keys.add((rel.src, rel.dst, rel.rel_type))
                graph._out[rel.src].append(rel.id)
                graph._in[rel.dst].append(rel.id)
            else:
                raise GraphError(f"line {lineno}: unknown record kind {kind!r}")
        if not header_seen:
            raise GraphError("snapshot missing graph header record")
        graph._next_node_id = max([graph._next_node_id] + [i + 1 for i in graph._nodes])
        graph._next_rel_id = max([graph._next_rel_id] + [i + 1 for i in graph._rels])
        return graph

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_snapshot())

    @classmethod
    def load(cls, path) -> "DecisionGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_snapshot(fh.read())

    def copy(self) -> "DecisionGraph":
        return DecisionGraph.from_snapshot(self.to_snapshot())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecisionGraph):
            return NotImplemented
        return self.to_snapshot() == other.to_snapshot()

    def __repr__(self) -> str:
        s = self.stats()
        return f"DecisionGraph(nodes={s.total_nodes}, decision={s.decision_nodes}, relations={s.relations})"

    def _require(self, node_id: NodeId) -> Node:
        node = self._nodes.get(node_id)
        if node is None:
            raise UnknownNode(node_id)
        return node
