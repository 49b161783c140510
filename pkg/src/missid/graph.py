"""Directed acyclic graphs over substantive variables, latents and response indicators."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .errors import ArgumentError, ConstructionError, UnknownNameError

__all__ = ["ORDERS", "Dag", "d_separated", "order_rank"]

ORDERS = ("in_time", "delayed", "unordered", "reverse")

# Position of M, Y and their indicators in each temporal setting.  Nodes
# sharing a rank may not be joined by an edge.
_RANKS = {
    "in_time": {"M": 0, "R_M": 1, "Y": 2, "R_Y": 3},
    "delayed": {"M": 0, "Y": 1, "R_M": 2, "R_Y": 3},
    "unordered": {"M": 0, "Y": 1, "R_M": 2, "R_Y": 2},
    "reverse": {"M": 0, "Y": 1, "R_Y": 2, "R_M": 3},
}


def order_rank(order: str) -> dict[str, int]:
    if order not in _RANKS:
        raise ArgumentError(f"unknown temporal order {order!r}; expected one of {ORDERS}")
    return dict(_RANKS[order])


@dataclass(frozen=True)
class Dag:
    nodes: tuple[tuple[str, bool], ...]
    edges: tuple[tuple[str, str], ...]
    order: str

    def __init__(self, nodes, edges, order: str):
        node_list = []
        for node in nodes:
            if isinstance(node, str):
                node_list.append((node, node.startswith("U_")))
            else:
                name, latent = node
                node_list.append((str(name), bool(latent)))
        names = [n for n, _ in node_list]
        if len(set(names)) != len(names):
            raise ConstructionError(f"duplicate nodes in {names}")
        edge_list = []
        for parent, child in edges:
            for end in (parent, child):
                if end not in names:
                    raise UnknownNameError(f"edge endpoint {end!r} is not a node")
            if parent == child:
                raise ConstructionError(f"self-loop on {parent}")
            if (parent, child) not in edge_list:
                edge_list.append((parent, child))
        object.__setattr__(self, "nodes", tuple(node_list))
        object.__setattr__(self, "edges", tuple(sorted(edge_list)))
        object.__setattr__(self, "order", order)
        self._validate()

    def _validate(self) -> None:
        ranks = order_rank(self.order)
        for parent, child in self.edges:
            if parent in ranks and child in ranks and ranks[parent] >= ranks[child]:
                raise ConstructionError(f"edge {parent}->{child} contradicts the {self.order} temporal order")
        self.topological_order()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.nodes)

    @property
    def latents(self) -> tuple[str, ...]:
        return tuple(n for n, latent in self.nodes if latent)

    def has(self, name: str) -> bool:
        return name in self.names

    def parents(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return tuple(p for p, c in self.edges if c == name)

    def children(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return tuple(c for p, c in self.edges if p == name)

    def _require(self, name: str) -> None:
        if name not in self.names:
            raise UnknownNameError(f"unknown node {name!r}")

    def topological_order(self) -> tuple[str, ...]:
        indegree = {n: 0 for n in self.names}
        for _, child in self.edges:
            indegree[child] += 1
        queue = deque(n for n in self.names if indegree[n] == 0)
        order = []
        while queue:
            node = queue.popleft()
            order.append(node)
            for parent, child in self.edges:
                if parent == node:
                    indegree[child] -= 1
                    if indegree[child] == 0:
                        queue.append(child)
        if len(order) != len(self.names):
            raise ConstructionError("graph contains a directed cycle")
        return tuple(order)

    def with_edges(self, extra: Iterable[tuple[str, str]], drop: Iterable[tuple[str, str]] = ()) -> Dag:
        drop = set(map(tuple, drop))
        edges = [e for e in self.edges if e not in drop] + list(extra)
        return Dag(self.nodes, edges, self.order)

    def to_json(self) -> dict:
        return {
            "nodes": [{"name": n, "latent": latent} for n, latent in self.nodes],
            "edges": [[p, c] for p, c in self.edges],
            "order": self.order,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Dag:
        """Load a graph; ``bidirected`` pairs are expanded into explicit latents."""
        try:
            nodes = [(n["name"], bool(n.get("latent", False))) for n in data["nodes"]]
            edges = [tuple(e) for e in data["edges"]]
            for left, right in data.get("bidirected", []):
                latent = f"U_{left}_{right}"
                nodes.append((latent, True))
                edges += [(latent, left), (latent, right)]
            return cls(nodes, edges, data["order"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConstructionError(f"malformed graph: {exc}") from None


def d_separated(dag: Dag, a: Iterable[str], b: Iterable[str], c: Iterable[str] = ()) -> bool:
    """Reachability test for d-separation of ``a`` and ``b`` given ``c``."""
    a, b, c = set(a), set(b), set(c)
    for name in a | b | c:
        dag._require(name)
    if a & b or a & c or b & c:
        raise ArgumentError("d-separation sets must be disjoint")
    parents = {n: [] for n in dag.names}
    children = {n: [] for n in dag.names}
    for p, ch in dag.edges:
        parents[ch].append(p)
        children[p].append(ch)

    # Nodes that are in c or have a descendant in c open colliders.
    opened = set()
    stack = list(c)
    while stack:
        node = stack.pop()
        if node not in opened:
            opened.add(node)
            stack.extend(parents[node])

    # Traverse (node, direction) states; "up" means we arrived from a child.
    visited = set()
    queue = deque((node, "up") for node in a)
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in c and node in b:
            return False
        if direction == "up" and node not in c:
            queue.extend((p, "up") for p in parents[node])
            queue.extend((ch, "down") for ch in children[node])
        elif direction == "down":
            if node not in c:
                queue.extend((ch, "down") for ch in children[node])
            if node in opened:
                queue.extend((p, "up") for p in parents[node])
    return True
