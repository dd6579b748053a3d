"""Skeleton assembly and edge orientation into a partially directed graph.

The skeleton keeps an edge between two vertices when either one selected
the other as a neighbor.  Orientation then proceeds in three stages:

1. prior knowledge (tier ranks, required and forbidden directions),
2. collider detection on unshielded triples, using for every non-adjacent
   pair the stored separating set with the largest p-value; colliders that
   disagree on a shared edge are resolved globally in favor of the one
   whose separating set has the larger p-value,
3. two propagation rules applied to a fixed point: an undirected edge
   whose endpoints are already joined by a directed path follows that
   path, and an undirected edge into the open side of an unshielded
   directed pair points away from it.

A directed cycle is never committed at any stage, and forbidden directions
are never produced.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .citest import DEFAULT_ALPHA, DEFAULT_MAX_COND, CIEngine
from .errors import PriorKnowledgeCycle, UnknownVertex
from .forward import DEFAULT_BUDGET, forward_step
from .maximize import NeighborSelection, SepComputer, maximization_step

logger = logging.getLogger(__name__)

Pair = tuple[str, str]


def pair_key(a: str, b: str) -> Pair:
    if a == b:
        raise ValueError(f"no self-pairs: {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class SeparationRecord:
    """Separating set stored for a non-adjacent pair, with its p-value."""

    witness: tuple[str, ...]
    p_value: float


@dataclass(frozen=True)
class PriorKnowledge:
    """Orientation constraints: tier ranks plus explicit edge directions.

    A lower tier may cause a higher tier, never the reverse.  ``forbidden``
    directions are never produced; ``required`` pairs are oriented as given
    whenever the skeleton contains the edge.
    """

    tiers: dict[str, int] = field(default_factory=dict)
    forbidden: frozenset[Pair] = frozenset()
    required: frozenset[Pair] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "forbidden", frozenset(map(tuple, self.forbidden)))
        object.__setattr__(self, "required", frozenset(map(tuple, self.required)))
        overlap = self.required & self.forbidden
        if overlap:
            raise ValueError(f"directions both required and forbidden: {sorted(overlap)}")
        for tier in self.tiers.values():
            if not isinstance(tier, int) or tier < 0:
                raise ValueError(f"tiers must be non-negative integers, got {tier!r}")
        self.check_consistent()

    @classmethod
    def from_json(cls, path: str | Path) -> "PriorKnowledge":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            tiers={str(k): int(v) for k, v in raw.get("tiers", {}).items()},
            forbidden=frozenset((str(a), str(b)) for a, b in raw.get("forbidden", [])),
            required=frozenset((str(a), str(b)) for a, b in raw.get("required", [])),
        )

    def check_consistent(self) -> None:
        """Raise when required edges and tiers are jointly cyclic."""
        for a, b in self.required:
            ta, tb = self.tiers.get(a), self.tiers.get(b)
            if ta is not None and tb is not None and ta > tb:
                raise PriorKnowledgeCycle(
                    f"required {a!r}->{b!r} contradicts tiers {ta} > {tb}"
                )
        adj: dict[str, set[str]] = {}
        for a, b in self.required:
            adj.setdefault(a, set()).add(b)
        seen: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(v: str) -> None:
            seen[v] = 1
            for w in sorted(adj.get(v, ())):
                state = seen.get(w)
                if state == 1:
                    raise PriorKnowledgeCycle(f"required edges form a cycle through {w!r}")
                if state is None:
                    visit(w)
            seen[v] = 2

        for v in sorted(adj):
            if v not in seen:
                visit(v)

    def allows(self, a: str, b: str) -> bool:
        """May an edge be directed a -> b under these constraints?"""
        if (a, b) in self.forbidden or (b, a) in self.required:
            return False
        ta, tb = self.tiers.get(a), self.tiers.get(b)
        return ta is None or tb is None or ta <= tb

    def forced_direction(self, a: str, b: str) -> Pair | None:
        """The unique permitted direction for edge a-b, if there is one."""
        if (a, b) in self.required:
            return (a, b)
        if (b, a) in self.required:
            return (b, a)
        fwd, rev = self.allows(a, b), self.allows(b, a)
        if fwd and not rev:
            return (a, b)
        if rev and not fwd:
            return (b, a)
        return None


@dataclass
class Cpdag:
    """Mixed graph: directed and undirected edges over a fixed vertex set.

    ``edge_significance`` maps present edges (canonical pairs) to the
    minimax connection p-value; ``sepsets`` maps non-adjacent pairs to
    their best separating set.
    """

    vertices: tuple[str, ...]
    directed: set[Pair] = field(default_factory=set)
    undirected: set[Pair] = field(default_factory=set)
    edge_significance: dict[Pair, float] = field(default_factory=dict)
    sepsets: dict[Pair, SeparationRecord] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertices")
        self.undirected = {pair_key(a, b) for a, b in self.undirected}
        for a, b in self.directed | self.undirected:
            if a not in vset or b not in vset:
                raise UnknownVertex(f"edge ({a!r}, {b!r}) references unknown vertex")
        self.validate()

    def validate(self) -> None:
        dir_pairs = {pair_key(a, b) for a, b in self.directed}
        if dir_pairs & self.undirected:
            raise ValueError("edge present both directed and undirected")
        if any((b, a) in self.directed for a, b in self.directed):
            raise ValueError("edge directed both ways")
        if not self.is_acyclic():
            raise ValueError("directed part contains a cycle")
        present = self.skeleton_pairs()
        stray = set(self.edge_significance) - present
        if stray:
            raise ValueError(f"significance recorded for absent edges: {sorted(stray)}")
        for p in self.edge_significance.values():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge significance out of range: {p}")

    # -- structure queries -------------------------------------------------

    def skeleton_pairs(self) -> set[Pair]:
        return {pair_key(a, b) for a, b in self.directed} | set(self.undirected)

    def has_edge(self, a: str, b: str) -> bool:
        return pair_key(a, b) in self.undirected or (a, b) in self.directed or (b, a) in self.directed

    def adjacent(self, v: str) -> set[str]:
        out = set()
        for a, b in self.directed:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        for a, b in self.undirected:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def children(self, v: str) -> set[str]:
        return {b for a, b in self.directed if a == v}

    def parents(self, v: str) -> set[str]:
        return {a for a, b in self.directed if b == v}

    def has_directed_path(self, src: str, dst: str) -> bool:
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            for c in self.children(v):
                if c == dst:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def is_acyclic(self) -> bool:
        children: dict[str, list[str]] = {v: [] for v in self.vertices}
        indeg = {v: 0 for v in self.vertices}
        for a, b in self.directed:
            children[a].append(b)
            indeg[b] += 1
        ready = [v for v in self.vertices if indeg[v] == 0]
        done = 0
        while ready:
            v = ready.pop()
            done += 1
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return done == len(self.vertices)

    def copy(self) -> "Cpdag":
        return Cpdag(
            vertices=self.vertices,
            directed=set(self.directed),
            undirected=set(self.undirected),
            edge_significance=dict(self.edge_significance),
            sepsets=dict(self.sepsets),
        )

    # -- serialization -----------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "directed": sorted(map(list, self.directed)),
            "undirected": sorted(map(list, self.undirected)),
            "significance": [
                [a, b, self.edge_significance[(a, b)]]
                for a, b in sorted(self.edge_significance)
            ],
            "sepsets": [
                [a, b, list(rec.witness), rec.p_value]
                for (a, b), rec in sorted(self.sepsets.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Cpdag":
        return cls(
            vertices=tuple(obj["vertices"]),
            directed={(a, b) for a, b in obj.get("directed", [])},
            undirected={(a, b) for a, b in obj.get("undirected", [])},
            edge_significance={
                pair_key(a, b): float(p) for a, b, p in obj.get("significance", [])
            },
            sepsets={
                pair_key(a, b): SeparationRecord(witness=tuple(w), p_value=float(p))
                for a, b, w, p in obj.get("sepsets", [])
            },
        )

    @classmethod
    def from_json(cls, text: str) -> "Cpdag":
        return cls.from_json_obj(json.loads(text))

    def to_dot(self, name: str = "learned") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for a, b in sorted(self.directed):
            lines.append(f'  "{a}" -> "{b}"{self._dot_attr(a, b)};')
        for a, b in sorted(self.undirected):
            lines.append(f'  "{a}" -- "{b}"{self._dot_attr(a, b)};')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def _dot_attr(self, a: str, b: str) -> str:
        p = self.edge_significance.get(pair_key(a, b))
        return f" [pvalue={p!r}]" if p is not None else ""


_DOT_EDGE = re.compile(
    r'^\s*"(?P<a>[^"]+)"\s*(?P<op>->|--)\s*"(?P<b>[^"]+)"\s*(?:\[pvalue=(?P<p>[^\]]+)\])?\s*;\s*$'
)
_DOT_VERTEX = re.compile(r'^\s*"(?P<v>[^"]+)"\s*;\s*$')


def cpdag_from_dot(text: str) -> Cpdag:
    """Parse the DOT dialect emitted by :meth:`Cpdag.to_dot`."""
    vertices: list[str] = []
    directed: set[Pair] = set()
    undirected: set[Pair] = set()
    significance: dict[Pair, float] = {}

    def note(v: str) -> None:
        if v not in vertices:
            vertices.append(v)

    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("digraph", "graph", "}")):
            continue
        m = _DOT_EDGE.match(line)
        if m:
            a, b = m.group("a"), m.group("b")
            note(a)
            note(b)
            if m.group("op") == "->":
                directed.add((a, b))
            else:
                undirected.add(pair_key(a, b))
            if m.group("p") is not None:
                significance[pair_key(a, b)] = float(m.group("p"))
            continue
        m = _DOT_VERTEX.match(line)
        if m:
            note(m.group("v"))
            continue
        raise ValueError(f"unparseable DOT line: {line!r}")
    return Cpdag(
        vertices=tuple(vertices),
        directed=directed,
        undirected=undirected,
        edge_significance=significance,
    )


# -- skeleton ---------------------------------------------------------------


def build_skeleton(selections: dict[str, NeighborSelection]) -> Cpdag:
    """Undirected graph keeping an edge when either endpoint chose the other.

    Equivalently, starting from the complete graph the edge x-y is deleted
    only when x is not among y's neighbors and y is not among x's.
    """
    vertices = tuple(selections)
    undirected = set()
    for i, x in enumerate(vertices):
        for y in vertices[i + 1 :]:
            if y in selections[x].neighbors or x in selections[y].neighbors:
                undirected.add(pair_key(x, y))
    return Cpdag(vertices=vertices, undirected=undirected)


def edge_significance(
    x: str,
    y: str,
    selections: dict[str, NeighborSelection],
    engine: CIEngine,
    m_ci: int = DEFAULT_MAX_COND,
) -> float:
    """Connection strength of edge x-y: the smaller of the two endpoints'
    best separating p-values (small means no subset separates the pair)."""
    sx = SepComputer(x, engine, m_ci=m_ci).score(y, selections[x].neighbors - {y})
    sy = SepComputer(y, engine, m_ci=m_ci).score(x, selections[y].neighbors - {x})
    return min(sx[0], sy[0])


def compute_sepsets(
    skeleton: Cpdag,
    selections: dict[str, NeighborSelection],
    engine: CIEngine,
    m_ci: int = DEFAULT_MAX_COND,
) -> dict[Pair, SeparationRecord]:
    """Best separating set per non-adjacent pair, searched in both endpoints'
    chosen neighborhoods; the larger p-value wins, ties prefer the smaller
    witness."""
    out: dict[Pair, SeparationRecord] = {}
    verts = skeleton.vertices
    for i, x in enumerate(verts):
        for y in verts[i + 1 :]:
            if skeleton.has_edge(x, y):
                continue
            best: tuple[float, tuple[str, ...]] | None = None
            for a, b in ((x, y), (y, x)):
                value, witness = SepComputer(a, engine, m_ci=m_ci).score(
                    b, selections[a].neighbors - {b}
                )
                if best is None or value > best[0] or (value == best[0] and witness < best[1]):
                    best = (value, witness)
            out[pair_key(x, y)] = SeparationRecord(witness=best[1], p_value=best[0])
    return out


# -- orientation ------------------------------------------------------------


def _commit(g: Cpdag, a: str, b: str, pk: PriorKnowledge, why: str) -> bool:
    """Direct edge a -> b if permitted and cycle-free; report success."""
    key = pair_key(a, b)
    if key not in g.undirected:
        return False
    if not pk.allows(a, b):
        logger.debug("skip %s -> %s (%s): forbidden by prior knowledge", a, b, why)
        return False
    if g.has_directed_path(b, a):
        logger.info("skip %s -> %s (%s): would close a directed cycle", a, b, why)
        return False
    g.undirected.discard(key)
    g.directed.add((a, b))
    return True


def orient(
    skeleton: Cpdag,
    pk: PriorKnowledge | None,
    sepsets: dict[Pair, SeparationRecord],
) -> Cpdag:
    """Orient a skeleton into a partially directed acyclic graph.

    Stages: prior knowledge, then colliders (globally resolved by
    descending separating p-value; a collider contradicting prior knowledge
    or an already-committed opposite arrow is dropped), then the two
    propagation rules to a fixed point.  Skeleton edges are never added or
    removed, only directed.
    """
    pk = pk if pk is not None else PriorKnowledge()
    pk.check_consistent()
    g = skeleton.copy()
    g.sepsets = dict(sepsets)

    for a, b in sorted(g.undirected):
        direction = pk.forced_direction(a, b)
        if direction is not None:
            committed = _commit(g, *direction, pk, "prior knowledge")
            if not committed and direction in pk.required:
                raise PriorKnowledgeCycle(
                    f"required edge {direction[0]!r}->{direction[1]!r} cannot be committed"
                )

    candidates = []
    for z in g.vertices:
        near = sorted(g.adjacent(z))
        for i, a in enumerate(near):
            for b in near[i + 1 :]:
                if g.has_edge(a, b):
                    continue
                rec = sepsets.get(pair_key(a, b))
                if rec is None or z in rec.witness:
                    continue
                candidates.append((rec.p_value, a, z, b))
    # Larger separating p-value wins conflicts; remaining keys fix the scan order.
    candidates.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))
    for p_value, a, z, b in candidates:
        arms = ((a, z), (b, z))
        if any(not pk.allows(u, v) for u, v in arms):
            logger.debug("collider %s->%s<-%s dropped: prior knowledge", a, z, b)
            continue
        if any((v, u) in g.directed for u, v in arms):
            logger.debug("collider %s->%s<-%s dropped: conflicts with earlier arrow", a, z, b)
            continue
        todo = [(u, v) for u, v in arms if (u, v) not in g.directed]
        if any(g.has_directed_path(z, u) for u, _ in todo):
            logger.info("collider %s->%s<-%s skipped: would close a cycle", a, z, b)
            continue
        for u, v in todo:
            _commit(g, u, v, pk, f"collider p={p_value}")

    changed = True
    while changed:
        changed = False
        for a, b in sorted(g.undirected):
            if g.has_directed_path(a, b):
                changed |= _commit(g, a, b, pk, "directed path")
            elif g.has_directed_path(b, a):
                changed |= _commit(g, b, a, pk, "directed path")
        for key in sorted(g.undirected):
            for z, y in (key, key[::-1]):
                done = False
                for x in sorted(g.parents(z)):
                    if x != y and not g.has_edge(x, y):
                        done = _commit(g, z, y, pk, f"unshielded {x}->{z}")
                        changed |= done
                        break
                if done:
                    break

    g.validate()
    return g


# -- end-to-end learner ------------------------------------------------------


def learn_structure(
    variables,
    engine: CIEngine,
    alpha: float = DEFAULT_ALPHA,
    m_ci: int = DEFAULT_MAX_COND,
    prior: PriorKnowledge | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Cpdag:
    """Two-step neighborhood discovery for every vertex, then orientation.

    ``variables`` fixes both the vertex set and the enumeration order used
    by the per-target searches.  The returned graph carries per-edge
    connection p-values and per-non-adjacent-pair separating sets.
    """
    variables = list(variables)
    selections: dict[str, NeighborSelection] = {}
    for x in variables:
        family = forward_step(x, variables, engine, alpha=alpha, m_ci=m_ci, budget=budget)
        selections[x] = maximization_step(x, family, variables, engine, m_ci=m_ci)
    skeleton = build_skeleton(selections)
    sepsets = compute_sepsets(skeleton, selections, engine, m_ci=m_ci)
    significance = {
        pair: edge_significance(pair[0], pair[1], selections, engine, m_ci=m_ci)
        for pair in sorted(skeleton.skeleton_pairs())
    }
    skeleton.edge_significance = significance
    return orient(skeleton, prior, sepsets)
