"""Network graphs, built-in topologies, and route computation.

Nodes are integer indices ``0..N-1`` and links are undirected with a length
in kilometres.  Routes are computed with a label-setting Dijkstra whose keys
are ``(cost, node sequence)``, so among equal-cost routes the one with the
lexicographically smallest node sequence always wins.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import Iterable, Optional

DEFAULT_SLOT_CAPACITY = 64
METRICS = ("km", "hops")

# Version tag of the shipped length tables; recorded in run manifests.
LENGTH_TABLE_VERSION = "geodesic-v1/arpanet-third"


class TopologyError(ValueError):
    """Topology failed validation."""


class TopologyParseError(TopologyError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Link:
    id: int
    u: int
    v: int
    length_km: float

    @property
    def endpoints(self) -> frozenset[int]:
        return frozenset((self.u, self.v))

    def other(self, node: int) -> int:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise ValueError(f"node {node} is not an endpoint of link {self.id}")


@dataclass(frozen=True)
class Path:
    """Simple route through the topology.

    ``nodes`` has one more entry than ``links``; ``link_lengths`` mirrors
    ``links`` so a path can be measured without its topology.
    """

    nodes: tuple[int, ...]
    links: tuple[int, ...]
    link_lengths: tuple[float, ...]

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    @property
    def hops(self) -> int:
        return len(self.links)

    @property
    def intermediate_count(self) -> int:
        return max(len(self.links) - 1, 0)

    @property
    def length_km(self) -> float:
        return float(sum(self.link_lengths))

    @property
    def link_set(self) -> frozenset[int]:
        return frozenset(self.links)

    def cumulative_km(self) -> list[float]:
        """Distance from the source to each node of the path."""
        out = [0.0]
        for length in self.link_lengths:
            out.append(out[-1] + length)
        return out

    def subpath(self, start: int, stop: int) -> "Path":
        """Path between node positions ``start`` and ``stop`` (inclusive)."""
        return Path(self.nodes[start:stop + 1], self.links[start:stop], self.link_lengths[start:stop])


@dataclass(frozen=True)
class Topology:
    name: str
    n_nodes: int
    links: tuple[Link, ...]
    slot_capacity: int = DEFAULT_SLOT_CAPACITY
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        validate(self)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def pair_count(self) -> int:
        return self.n_nodes * (self.n_nodes - 1) // 2

    @cached_property
    def adjacency(self) -> list[list[tuple[int, Link]]]:
        adj: list[list[tuple[int, Link]]] = [[] for _ in range(self.n_nodes)]
        for link in self.links:
            adj[link.u].append((link.v, link))
            adj[link.v].append((link.u, link))
        for row in adj:
            row.sort(key=lambda item: item[0])
        return adj

    @cached_property
    def _route_cache(self) -> dict:
        return {}

    def link(self, link_id: int) -> Link:
        return self.links[link_id]

    def link_between(self, u: int, v: int) -> Optional[Link]:
        for other, link in self.adjacency[u]:
            if other == v:
                return link
        return None

    def path_from_nodes(self, nodes: Iterable[int]) -> Path:
        nodes = tuple(nodes)
        links = []
        for a, b in zip(nodes, nodes[1:]):
            link = self.link_between(a, b)
            if link is None:
                raise ValueError(f"no link between {a} and {b}")
            links.append(link)
        return Path(nodes, tuple(l.id for l in links), tuple(l.length_km for l in links))

    def label(self, node: int) -> str:
        return self.labels[node] if self.labels else str(node)

    def to_text(self) -> str:
        lines = [f"topology {self.name} {self.slot_capacity}"]
        for node in range(self.n_nodes):
            lines.append(f"node {node} {self.label(node).replace(' ', '_')}")
        for link in self.links:
            lines.append(f"link {link.id} {link.u} {link.v} {link.length_km:g}")
        return "\n".join(lines) + "\n"


def validate(t: Topology) -> None:
    if t.n_nodes < 2:
        raise TopologyError("topology needs at least 2 nodes")
    if t.slot_capacity < 1:
        raise TopologyError("slot capacity must be positive")
    if t.labels and len(t.labels) != t.n_nodes:
        raise TopologyError("one label per node required")
    seen_pairs = set()
    for index, link in enumerate(t.links):
        if link.id != index:
            raise TopologyError(f"link ids must be 0..{len(t.links) - 1} in order, got {link.id} at {index}")
        for node in (link.u, link.v):
            if not 0 <= node < t.n_nodes:
                raise TopologyError(f"link {link.id} references unknown node {node}")
        if link.u == link.v:
            raise TopologyError(f"link {link.id} is a self-loop")
        if not link.length_km > 0:
            raise TopologyError(f"link {link.id} has non-positive length {link.length_km}")
        if link.endpoints in seen_pairs:
            raise TopologyError(f"duplicate link between {link.u} and {link.v}")
        seen_pairs.add(link.endpoints)
    # connectivity
    adj: dict[int, list[int]] = {n: [] for n in range(t.n_nodes)}
    for link in t.links:
        adj[link.u].append(link.v)
        adj[link.v].append(link.u)
    reached = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in reached:
                reached.add(nxt)
                stack.append(nxt)
    if len(reached) != t.n_nodes:
        raise TopologyError("topology is disconnected")


def _build(name, labels, edges, slot_capacity=DEFAULT_SLOT_CAPACITY) -> Topology:
    links = tuple(Link(i, u, v, float(km)) for i, (u, v, km) in enumerate(edges))
    return Topology(name, len(labels), links, slot_capacity, tuple(labels))


# Shipped default lengths, not measured fibre routes.  COST239 uses
# great-circle distances between the labelled cities; ARPANET uses one third
# of them, which keeps mean backup lengths near 1000 km on both networks.
_ARPANET_LABELS = (
    "Seattle", "San Francisco", "Los Angeles", "Salt Lake City", "Phoenix",
    "Denver", "Albuquerque", "Omaha", "Dallas", "Minneapolis", "St Louis",
    "Houston", "Chicago", "Atlanta", "Cleveland", "Nashville", "Washington",
    "New York", "Boston", "Raleigh",
)
_ARPANET_EDGES = (
    (0, 1, 363), (0, 3, 373), (0, 9, 744), (1, 2, 189), (1, 3, 321),
    (2, 4, 189), (3, 5, 199), (4, 6, 180), (6, 8, 313), (5, 6, 177),
    (5, 7, 260), (7, 9, 155), (7, 10, 193), (8, 11, 120), (8, 10, 293),
    (9, 12, 192), (10, 12, 143), (10, 15, 134), (11, 13, 375), (12, 14, 164),
    (13, 15, 118), (13, 19, 193), (14, 16, 164), (14, 17, 217), (15, 16, 305),
    (16, 17, 108), (16, 19, 124), (17, 18, 102), (14, 18, 294), (4, 8, 475),
    (8, 13, 386), (3, 4, 274),
)
_COST239_LABELS = (
    "Amsterdam", "Berlin", "Brussels", "Copenhagen", "London", "Luxembourg",
    "Milan", "Paris", "Prague", "Vienna", "Zurich",
)
_COST239_EDGES = (
    (0, 1, 576), (0, 2, 173), (0, 3, 621), (0, 4, 358), (0, 5, 319),
    (1, 3, 356), (1, 7, 877), (1, 8, 281), (1, 9, 523), (2, 4, 321),
    (2, 5, 187), (2, 6, 698), (2, 7, 264), (3, 4, 956), (3, 8, 635),
    (4, 7, 343), (5, 7, 287), (5, 8, 598), (5, 10, 305), (6, 7, 640),
    (6, 9, 626), (6, 10, 219), (7, 10, 488), (8, 9, 251), (8, 10, 526),
    (9, 10, 592),
)

BUILTIN = {
    "ARPANET": (_ARPANET_LABELS, _ARPANET_EDGES),
    "COST239": (_COST239_LABELS, _COST239_EDGES),
}


def builtin_names() -> list[str]:
    return sorted(BUILTIN)


def load_builtin(name: str, slot_capacity: int = DEFAULT_SLOT_CAPACITY) -> Topology:
    key = name.upper()
    if key not in BUILTIN:
        raise TopologyError(f"unknown topology {name!r}; builtins: {', '.join(builtin_names())}")
    labels, edges = BUILTIN[key]
    return _build(key, labels, edges, slot_capacity)


def parse(text: str) -> Topology:
    """Parse the line-oriented topology format.

    ``topology <name> <F>`` header, then ``node <id> <label>`` and
    ``link <id> <u> <v> <length_km>`` records.  ``#`` starts a comment.
    """
    header = None
    labels: dict[int, str] = {}
    links: list[Link] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "topology":
                if header is not None:
                    raise TopologyParseError(lineno, "duplicate topology header")
                if len(parts) != 3:
                    raise TopologyParseError(lineno, "expected 'topology <name> <F>'")
                header = (parts[1], int(parts[2]))
            elif header is None:
                raise TopologyParseError(lineno, "missing 'topology' header before records")
            elif kind == "node":
                if len(parts) < 2:
                    raise TopologyParseError(lineno, "expected 'node <id> <label>'")
                node = int(parts[1])
                if node in labels:
                    raise TopologyParseError(lineno, f"duplicate node {node}")
                labels[node] = " ".join(parts[2:]) or str(node)
            elif kind == "link":
                if len(parts) != 5:
                    raise TopologyParseError(lineno, "expected 'link <id> <u> <v> <length_km>'")
                links.append(Link(int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4])))
            else:
                raise TopologyParseError(lineno, f"unknown record {kind!r}")
        except ValueError as exc:
            if isinstance(exc, TopologyParseError):
                raise
            raise TopologyParseError(lineno, str(exc)) from None
    if header is None:
        raise TopologyParseError(0, "empty topology file")
    n_nodes = len(labels)
    if sorted(labels) != list(range(n_nodes)):
        raise TopologyError(f"node ids must be 0..{n_nodes - 1}")
    links.sort(key=lambda l: l.id)
    name, capacity = header
    return Topology(name, n_nodes, tuple(links), capacity, tuple(labels[i] for i in range(n_nodes)))


def load_file(path) -> Topology:
    return parse(FsPath(path).read_text())


def shortest_path(t: Topology, s: int, d: int, metric: str = "km",
                  excluded: Iterable[int] = ()) -> Optional[Path]:
    """Minimum-cost route from ``s`` to ``d`` avoiding ``excluded`` links.

    Ties are broken by the lexicographically smallest node sequence.
    Returns None when ``d`` is unreachable.
    """
    if s == d:
        raise ValueError("source and destination must differ")
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    excluded = frozenset(excluded)
    key = (s, d, metric, excluded)
    cache = t._route_cache
    if key in cache:
        return cache[key]

    best: dict[int, tuple] = {s: (0, (s,))}
    heap = [(0, (s,), ())]
    done = set()
    result = None
    while heap:
        cost, nodes, links = heapq.heappop(heap)
        node = nodes[-1]
        if node in done:
            continue
        done.add(node)
        if node == d:
            lengths = tuple(t.links[i].length_km for i in links)
            result = Path(nodes, links, lengths)
            break
        for nxt, link in t.adjacency[node]:
            if link.id in excluded or nxt in done:
                continue
            step = link.length_km if metric == "km" else 1
            cand = (cost + step, nodes + (nxt,))
            if nxt not in best or cand < best[nxt]:
                best[nxt] = cand
                heapq.heappush(heap, (cand[0], cand[1], links + (link.id,)))
    cache[key] = result
    return result


def disjoint_pair(t: Topology, s: int, d: int, metric: str = "km") -> Optional[tuple[Path, Path]]:
    """Primary route plus the best route avoiding all of the primary's links."""
    primary = shortest_path(t, s, d, metric)
    if primary is None:
        return None
    backup = shortest_path(t, s, d, metric, excluded=primary.links)
    if backup is None:
        return None
    return primary, backup
