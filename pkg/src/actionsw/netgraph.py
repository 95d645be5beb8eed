"""Capacitated acyclic networks with two sources and a terminal set.

Max-flow is delegated to networkx.  Multi-source cuts are handled with a
super-source wired to every source by an uncapacitated edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import networkx as nx
import numpy as np

from .info import ActionModel, Joint3
from .region import InfeasibleBudget, Scenario, constraint_arrays, feasible_policies

CAP_TOL = 1e-9
SOURCE_SETS = ("s1", "s2", "s1,s2")


class Link(NamedTuple):
    origin: int
    dest: int
    capacity: float


@dataclass(frozen=True, eq=False)
class Network:
    """Directed acyclic graph on nodes ``0..n-1`` (optionally named)."""

    names: tuple[str, ...]
    links: tuple[Link, ...]
    s1: int
    s2: int
    terminals: tuple[int, ...]

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise ValueError("network has no nodes")
        if len(set(self.names)) != n:
            raise ValueError("node names must be unique")
        links = tuple(Link(int(o), int(d), float(c)) for o, d, c in self.links)
        for o, d, c in links:
            if not (0 <= o < n and 0 <= d < n):
                raise ValueError(f"link ({o}, {d}) references an unknown node")
            if o == d:
                raise ValueError(f"self-loop at node {o}")
            if not (c >= 0 and np.isfinite(c)):
                raise ValueError(f"link ({o}, {d}) has invalid capacity {c}")
        terms = tuple(int(t) for t in self.terminals)
        if not terms:
            raise ValueError("terminal set is empty")
        if self.s1 == self.s2:
            raise ValueError("s1 and s2 must differ")
        if {self.s1, self.s2} & set(terms):
            raise ValueError("terminals must be disjoint from the sources")
        if any(not 0 <= v < n for v in (self.s1, self.s2, *terms)):
            raise ValueError("source or terminal id out of range")
        for o, d, _ in links:
            if d in (self.s1, self.s2):
                raise ValueError(f"source node {d} has an incoming link")
            if o in terms:
                raise ValueError(f"terminal {o} has an outgoing link")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "terminals", terms)
        object.__setattr__(self, "names", tuple(str(x) for x in self.names))
        if not nx.is_directed_acyclic_graph(self.graph()):
            raise ValueError("network contains a cycle")

    @classmethod
    def build(cls, nodes, links, s1, s2, terminals) -> "Network":
        """Constructor accepting node names (or a node count) and name-based references."""
        names = [str(i) for i in range(nodes)] if isinstance(nodes, int) else [str(x) for x in nodes]
        index = {name: i for i, name in enumerate(names)}

        def ref(v):
            if isinstance(v, str):
                if v not in index:
                    raise ValueError(f"unknown node {v!r}")
                return index[v]
            return int(v)

        return cls(
            tuple(names),
            tuple(Link(ref(o), ref(d), c) for o, d, c in links),
            ref(s1),
            ref(s2),
            tuple(ref(t) for t in terminals),
        )

    @property
    def num_nodes(self) -> int:
        return len(self.names)

    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(len(self.names)))
        for i, (o, d, c) in enumerate(self.links):
            g.add_edge(o, d, key=i, capacity=c)
        return g

    def source_nodes(self, label: str) -> tuple[int, ...]:
        return {"s1": (self.s1,), "s2": (self.s2,), "s1,s2": (self.s1, self.s2)}[label]

    def with_capacities(self, caps: Iterable[float]) -> "Network":
        new = tuple(Link(o, d, c) for (o, d, _), c in zip(self.links, caps, strict=True))
        return Network(self.names, new, self.s1, self.s2, self.terminals)

    def with_link(self, origin: int, dest: int, capacity: float) -> "Network":
        return Network(self.names, self.links + (Link(origin, dest, capacity),), self.s1, self.s2, self.terminals)

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.names),
            "links": [{"from": self.names[o], "to": self.names[d], "capacity": c} for o, d, c in self.links],
            "s1": self.names[self.s1],
            "s2": self.names[self.s2],
            "terminals": [self.names[t] for t in self.terminals],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        try:
            links = [(l["from"], l["to"], float(l["capacity"])) for l in doc["links"]]
            return cls.build(doc["nodes"], links, doc["s1"], doc["s2"], doc["terminals"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed network document: {exc}") from exc

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> "Network":
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValueError(f"network is not valid JSON: {exc}") from exc


def ancestral_order(net: Network) -> list[int]:
    """Link ids such that every link comes after all links entering its origin.

    Nodes are sorted topologically (ties by node id) and links by
    (position of origin, link id).
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(net.num_nodes))
    g.add_edges_from((o, d) for o, d, _ in net.links)
    try:
        order = list(nx.lexicographical_topological_sort(g))
    except nx.NetworkXUnfeasible:
        raise ValueError("network contains a cycle") from None
    pos = {v: i for i, v in enumerate(order)}
    return sorted(range(len(net.links)), key=lambda l: (pos[net.links[l].origin], l))


def _flow_graph(net: Network) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(net.num_nodes))
    for o, d, c in net.links:
        if g.has_edge(o, d):
            g[o][d]["capacity"] += c
        else:
            g.add_edge(o, d, capacity=c)
    return g


def min_cut(net: Network, sources: Iterable[int], t: int) -> float:
    """Max-flow (= min-cut capacity) from a source set to terminal ``t``."""
    srcs = sorted({int(s) for s in sources})
    if not srcs:
        raise ValueError("source set is empty")
    if t in srcs:
        raise ValueError("terminal is one of the sources")
    g = _flow_graph(net)
    root = "super-source"
    for s in srcs:
        g.add_edge(root, s)  # no capacity attribute means infinite
    if not nx.has_path(g, root, t):
        return 0.0
    return float(nx.maximum_flow_value(g, root, t))


def min_cut_over_terminals(net: Network, sources: Iterable[int]) -> float:
    srcs = tuple(sources)
    if not net.terminals:
        raise ValueError("terminal set is empty")
    return min(min_cut(net, srcs, t) for t in net.terminals)


class CutValue(NamedTuple):
    label: str
    terminal: int
    capacity: float


def cut_values(net: Network) -> list[CutValue]:
    """All three source-set cuts for every terminal."""
    return [
        CutValue(label, t, min_cut(net, net.source_nodes(label), t))
        for t in net.terminals
        for label in SOURCE_SETS
    ]


def cut_triple(net: Network) -> tuple[float, float, float]:
    """Minimum over terminals of the s1, s2 and {s1, s2} cuts."""
    return tuple(min_cut_over_terminals(net, net.source_nodes(lab)) for lab in SOURCE_SETS)


@dataclass(frozen=True, eq=False)
class Theorem3Verdict:
    feasible: bool
    cuts: tuple[float, float, float]
    policy: np.ndarray | None = None
    joint: Joint3 | None = None
    bounds: tuple[float, float, float] | None = None

    def __bool__(self):
        return self.feasible


def theorem3_feasible(net: Network, model: ActionModel, resolution: int = 101) -> Theorem3Verdict:
    """Search the policy grid for one whose encoder-side bounds fit under the cuts.

    The first feasible policy in grid order is returned as the witness.
    """
    cuts = cut_triple(net)
    try:
        pols = feasible_policies(model, Scenario.ENCODER, resolution)
    except InfeasibleBudget:
        return Theorem3Verdict(False, cuts)
    p = model.px.probs[:, None, None] * pols[..., None] * model.py_given_xa.table
    rx, ry, s = constraint_arrays(p, Scenario.ENCODER, clamp=False)
    ok = (cuts[0] >= rx - CAP_TOL) & (cuts[1] >= ry - CAP_TOL) & (cuts[2] >= s - CAP_TOL)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return Theorem3Verdict(False, cuts)
    i = int(hits[0])
    witness = model.with_policy(pols[i])
    return Theorem3Verdict(True, cuts, pols[i], witness.joint(), (float(rx[i]), float(ry[i]), float(s[i])))


# builders


def two_link_network(c1: float, c2: float) -> Network:
    """s1 -> t and s2 -> t; reduces the network problem to the two-encoder one."""
    return Network.build(["s1", "s2", "t"], [("s1", "t", c1), ("s2", "t", c2)], "s1", "s2", ["t"])


def butterfly(capacity: float = 1.0) -> Network:
    """Two-source butterfly: both sources share one bottleneck link a -> b."""
    c = capacity
    links = [
        ("s1", "t1", c), ("s1", "a", c), ("s2", "a", c), ("s2", "t2", c),
        ("a", "b", c), ("b", "t1", c), ("b", "t2", c),
    ]
    return Network.build(["s1", "s2", "a", "b", "t1", "t2"], links, "s1", "s2", ["t1", "t2"])


def multicast_butterfly(capacity: float = 1.0) -> Network:
    """Single-source butterfly; ``s2`` is an isolated placeholder node."""
    c = capacity
    links = [
        ("s", "u1", c), ("s", "u2", c), ("u1", "t1", c), ("u2", "t2", c),
        ("u1", "w", c), ("u2", "w", c), ("w", "x", c), ("x", "t1", c), ("x", "t2", c),
    ]
    names = ["s", "s2", "u1", "u2", "w", "x", "t1", "t2"]
    return Network.build(names, links, "s", "s2", ["t1", "t2"])


def random_dag(
    num_nodes: int,
    rng: np.random.Generator,
    edge_prob: float = 0.4,
    num_terminals: int = 1,
    max_capacity: int = 1,
) -> Network:
    """Random DAG on ``num_nodes`` nodes with integer capacities in 1..max_capacity.

    Node 0 is s1, node 1 is s2 and the last ``num_terminals`` nodes are
    terminals; edges only go from lower to higher ids.
    """
    if num_nodes < 2 + num_terminals:
        raise ValueError("too few nodes for two sources and the terminals")
    first_term = num_nodes - num_terminals
    links = []
    for i in range(num_nodes):
        if i >= first_term:
            continue
        for j in range(max(i + 1, 2), num_nodes):
            if rng.random() < edge_prob:
                links.append((i, j, float(rng.integers(1, max_capacity + 1))))
    return Network.build(num_nodes, links, 0, 1, list(range(first_term, num_nodes)))
