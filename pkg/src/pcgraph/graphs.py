"""Undirected and mixed graphs on ``V = {1, ..., n}``.

Mixed graphs carry directed edges ``a -> b`` and dashed undirected edges
``a -- b``.  For collider purposes a dashed edge has a "head-like" mark at
both endpoints, while a directed edge has a head at its target and a tail
at its source.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

Vertex = int


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _check_vertex(n: int, v) -> int:
    if not isinstance(v, (int,)) or isinstance(v, bool) or not 1 <= v <= n:
        raise ValueError(f"vertex {v!r} out of range 1..{n}")
    return int(v)


def _vset(n: int, S: Iterable[int]) -> frozenset:
    return frozenset(_check_vertex(n, int(v)) for v in S)


@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        norm = set()
        for e in self.edges:
            a, b = (int(x) for x in e)
            _check_vertex(self.n, a)
            _check_vertex(self.n, b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            norm.add(_pair(a, b))
        object.__setattr__(self, "edges", frozenset(norm))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def has_edge(self, a: int, b: int) -> bool:
        return _pair(a, b) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> dict:
        return {"n": self.n, "undirected": [list(e) for e in self.sorted_edges()],
                "directed": [], "dashed": []}

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        lines += [f"  {v};" for v in self.vertices]
        lines += [f"  {a} -- {b};" for a, b in self.sorted_edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MixedGraph:
    n: int
    directed: frozenset = frozenset()
    dashed: frozenset = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        d, u = set(), set()
        for a, b in self.directed:
            a, b = _check_vertex(self.n, int(a)), _check_vertex(self.n, int(b))
            if a == b:
                raise ValueError(f"directed self-loop at vertex {a}")
            d.add((a, b))
        for a, b in self.dashed:
            a, b = _check_vertex(self.n, int(a)), _check_vertex(self.n, int(b))
            if a == b:
                raise ValueError(f"dashed self-loop at vertex {a}")
            u.add(_pair(a, b))
        object.__setattr__(self, "directed", frozenset(d))
        object.__setattr__(self, "dashed", frozenset(u))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def has_dashed(self, a: int, b: int) -> bool:
        return _pair(a, b) in self.dashed

    def to_json(self) -> dict:
        return {"n": self.n, "undirected": [],
                "directed": [list(e) for e in sorted(self.directed)],
                "dashed": [list(e) for e in sorted(self.dashed)]}

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        lines += [f"  {v};" for v in self.vertices]
        lines += [f"  {a} -> {b};" for a, b in sorted(self.directed)]
        # dashed edges are written undirected; strict Graphviz parsers reject
        # mixing "--" into a digraph, so pass through a converter if needed
        lines += [f"  {a} -- {b} [style=dashed];" for a, b in sorted(self.dashed)]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def _incidence(self):
        # (neighbour, mark at self is head-like, mark at neighbour is head-like)
        inc = {v: [] for v in self.vertices}
        for a, b in self.directed:
            inc[a].append((b, False, True))
            inc[b].append((a, True, False))
        for a, b in self.dashed:
            inc[a].append((b, True, True))
            inc[b].append((a, True, True))
        return inc


def graph_from_json(obj: dict):
    """Parse the JSON graph schema; returns a MixedGraph when any mixed edges are present."""
    if not isinstance(obj, dict) or "n" not in obj:
        raise ValueError("graph JSON must be an object with key 'n'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError("'n' must be an integer")
    und = obj.get("undirected", []) or []
    dire = obj.get("directed", []) or []
    dash = obj.get("dashed", []) or []
    for lst in (und, dire, dash):
        if not isinstance(lst, list) or any(not isinstance(e, list) or len(e) != 2 for e in lst):
            raise ValueError("edge lists must be lists of [a, b] pairs")
    if dire or dash:
        if und:
            raise ValueError("a graph cannot mix 'undirected' with 'directed'/'dashed' edges")
        return MixedGraph(n, frozenset(map(tuple, dire)), frozenset(map(tuple, dash)))
    return UndirectedGraph(n, frozenset(map(tuple, und)))


# ---------------------------------------------------------------- undirected

def neighbours(G: UndirectedGraph, a: int) -> frozenset:
    _check_vertex(G.n, a)
    return frozenset(b if x == a else x for x, b in G.edges if a in (x, b))


def _adjacency(G: UndirectedGraph) -> dict:
    adj = {v: set() for v in G.vertices}
    for a, b in G.edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def separates(G: UndirectedGraph, A, B, C) -> bool:
    """True iff every path from ``A`` to ``B`` meets ``C``."""
    A, B, C = _vset(G.n, A), _vset(G.n, B), _vset(G.n, C)
    if A & B or A & C or B & C:
        raise ValueError("A, B, C must be pairwise disjoint")
    adj = _adjacency(G)
    seen = set(A)
    queue = deque(A)
    while queue:
        v = queue.popleft()
        if v in B:
            return False
        for w in adj[v]:
            if w not in seen and w not in C:
                seen.add(w)
                queue.append(w)
    return True


# --------------------------------------------------------------------- mixed

def ch_set(G: MixedGraph, a: int) -> frozenset:
    _check_vertex(G.n, a)
    return frozenset(b for x, b in G.directed if x == a)


def dis_set(G: MixedGraph, A) -> frozenset:
    """Union of the dashed-edge connected components of the vertices in ``A``."""
    if isinstance(A, int):
        A = {A}
    A = _vset(G.n, A)
    adj = {v: set() for v in G.vertices}
    for a, b in G.dashed:
        adj[a].add(b)
        adj[b].add(a)
    seen = set(A)
    queue = deque(A)
    while queue:
        v = queue.popleft()
        for w in adj[v] - seen:
            seen.add(w)
            queue.append(w)
    return frozenset(seen)


def collider_connected(G: MixedGraph, a: int, b: int) -> bool:
    """Pure collider path between ``a`` and ``b``, decided by the dis/ch criterion."""
    _check_vertex(G.n, a)
    _check_vertex(G.n, b)
    if a == b:
        raise ValueError("a and b must differ")
    if (a, b) in G.directed or (b, a) in G.directed or G.has_dashed(a, b):
        return True
    left = dis_set(G, {a} | ch_set(G, a))
    right = dis_set(G, {b} | ch_set(G, b))
    return bool(left & right)


def augment(G: MixedGraph) -> UndirectedGraph:
    edges = frozenset(
        (a, b) for a, b in itertools.combinations(G.vertices, 2) if collider_connected(G, a, b)
    )
    return UndirectedGraph(G.n, edges)


def m_separated(G: MixedGraph, a: int, b: int, C) -> bool:
    """m-separation of ``a`` and ``b`` given ``C`` under walk semantics.

    Breadth-first search over states ``(vertex, arrived with head-like mark)``.
    An intermediate vertex may be passed iff it is a collider in ``C`` or a
    non-collider outside ``C``.
    """
    _check_vertex(G.n, a)
    _check_vertex(G.n, b)
    C = _vset(G.n, C)
    if a == b:
        raise ValueError("a and b must differ")
    if a in C or b in C:
        raise ValueError("a and b must not lie in C")
    inc = G._incidence()
    seen = set()
    queue = deque()
    for w, _, head_at_w in inc[a]:
        if w == b:
            return False
        if (w, head_at_w) not in seen:
            seen.add((w, head_at_w))
            queue.append((w, head_at_w))
    while queue:
        v, head_in = queue.popleft()
        in_c = v in C
        for w, head_out, head_at_w in inc[v]:
            collider = head_in and head_out
            if collider != in_c:
                continue
            if w == b:
                return False
            if (w, head_at_w) not in seen:
                seen.add((w, head_at_w))
                queue.append((w, head_at_w))
    return True


# -------------------------------------------------------------------- Markov

Oracle = Callable[[frozenset, frozenset, frozenset], bool]


@dataclass
class MarkovReport:
    violations: list = field(default_factory=list)
    checked: dict = field(default_factory=lambda: {"pairwise": 0, "local": 0, "global": 0})

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "checked": dict(self.checked),
            "violations": [
                {"property": prop, "A": sorted(A), "B": sorted(B), "C": sorted(C)}
                for prop, A, B, C in self.violations
            ],
        }


def _disjoint_triples(n: int, ab_cap: int | None, c_cap: int | None):
    """All (A, B, C) with A, B non-empty and pairwise disjoint, within size caps."""
    verts = range(1, n + 1)
    # label 0: unused, 1: A, 2: B, 3: C
    for labels in itertools.product(range(4), repeat=n):
        A = frozenset(v for v, l in zip(verts, labels) if l == 1)
        B = frozenset(v for v, l in zip(verts, labels) if l == 2)
        if not A or not B:
            continue
        if ab_cap is not None and (len(A) > ab_cap or len(B) > ab_cap):
            continue
        C = frozenset(v for v, l in zip(verts, labels) if l == 3)
        if c_cap is not None and len(C) > c_cap:
            continue
        yield A, B, C


def markov_check(G: UndirectedGraph, oracle: Oracle, ab_cap: int | None = None,
                 c_cap: int | None = None, full_enumeration_limit: int = 6) -> MarkovReport:
    """Check pairwise, local and global Markov properties of ``G`` against ``oracle``.

    ``oracle(A, B, C)`` must return True iff ``A`` and ``B`` are partially
    uncorrelated given ``C``.  Global triples are enumerated exhaustively up to
    ``full_enumeration_limit`` vertices; beyond it the caps default to 2.
    """
    rep = MarkovReport()
    V = frozenset(G.vertices)
    for a, b in itertools.combinations(G.vertices, 2):
        if G.has_edge(a, b):
            continue
        rep.checked["pairwise"] += 1
        A, B, C = frozenset({a}), frozenset({b}), V - {a, b}
        if not oracle(A, B, C):
            rep.violations.append(("pairwise", A, B, C))
    for a in G.vertices:
        ne = neighbours(G, a)
        rest = V - ne - {a}
        if not rest:
            continue
        rep.checked["local"] += 1
        if not oracle(frozenset({a}), rest, ne):
            rep.violations.append(("local", frozenset({a}), rest, ne))
    if G.n > full_enumeration_limit:
        ab_cap = 2 if ab_cap is None else ab_cap
        c_cap = 2 if c_cap is None else c_cap
    for A, B, C in _disjoint_triples(G.n, ab_cap, c_cap):
        if separates(G, A, B, C):
            rep.checked["global"] += 1
            if not oracle(A, B, C):
                rep.violations.append(("global", A, B, C))
    return rep
