"""Causal structures (DAGs), background knowledge, d-separation, and the
PAG-compatibility checks used to turn a discovered PAG into a DAG."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..errors import CompatibilityError, CycleError, KnowledgeError, SchemaError
from .pag import ARROW, CIRCLE, TAIL, Pag


def _find_cycle(vertices, edges) -> list | None:
    """A directed cycle as a vertex list, or None."""
    children: dict = {v: [] for v in vertices}
    for a, b in edges:
        children[a].append(b)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in vertices}
    stack: list = []

    def dfs(v):
        color[v] = GRAY
        stack.append(v)
        for c in children[v]:
            if color[c] == GRAY:
                return stack[stack.index(c):] + [c]
            if color[c] == WHITE:
                cycle = dfs(c)
                if cycle:
                    return cycle
        stack.pop()
        color[v] = BLACK
        return None

    for v in vertices:
        if color[v] == WHITE:
            cycle = dfs(v)
            if cycle:
                return cycle
    return None


@dataclass(frozen=True)
class CausalStructure:
    """A DAG of direct-cause claims."""

    vertices: tuple
    edges: frozenset  # of (cause, effect) pairs

    def __init__(self, vertices, edges):
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in edges))
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise SchemaError("duplicate vertices")
        for a, b in self.edges:
            if a not in vset or b not in vset:
                raise SchemaError(f"edge ({a!r}, {b!r}) uses unknown vertices")
            if a == b:
                raise SchemaError("self edges are not allowed")
        cycle = _find_cycle(self.vertices, self.edges)
        if cycle:
            raise CycleError(
                "edges form a cycle: " + " → ".join(str(v) for v in cycle),
                detail={"cycle": list(cycle)},
            )

    def parents(self, v) -> list:
        return sorted((a for a, b in self.edges if b == v), key=self.vertices.index)

    def children(self, v) -> list:
        return sorted((b for a, b in self.edges if a == v), key=self.vertices.index)

    def topological_order(self) -> list:
        indeg = {v: 0 for v in self.vertices}
        for _, b in self.edges:
            indeg[b] += 1
        ready = [v for v in self.vertices if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in self.children(v):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return order

    def has_directed_path(self, x, y) -> bool:
        seen, queue = {x}, deque([x])
        while queue:
            v = queue.popleft()
            if v == y:
                return True
            for c in self.children(v):
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
        return False

    def d_separated(self, x, y, given=()) -> bool:
        """True iff x and y are d-separated by ``given`` (Bayes-ball)."""
        z = set(given)
        parents = {v: set() for v in self.vertices}
        children = {v: set() for v in self.vertices}
        for a, b in self.edges:
            parents[b].add(a)
            children[a].add(b)

        ancestors_of_z = set()
        todo = set(z)
        while todo:
            v = todo.pop()
            if v not in ancestors_of_z:
                ancestors_of_z.add(v)
                todo |= parents[v]

        # traverse active trails from x; direction 'up' follows edges into
        # parents, 'down' into children
        visited = set()
        queue = deque([(x, "up")])
        while queue:
            v, d = queue.popleft()
            if (v, d) in visited:
                continue
            visited.add((v, d))
            if v == y and v not in z:
                return False
            if d == "up" and v not in z:
                for p in parents[v]:
                    queue.append((p, "up"))
                for c in children[v]:
                    queue.append((c, "down"))
            elif d == "down":
                if v not in z:
                    for c in children[v]:
                        queue.append((c, "down"))
                if v in ancestors_of_z:
                    for p in parents[v]:
                        queue.append((p, "up"))
        return True

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": sorted([list(e) for e in self.edges]),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CausalStructure":
        return cls(tuple(data["vertices"]), {tuple(e) for e in data["edges"]})


@dataclass(frozen=True)
class BackgroundKnowledge:
    """Required and forbidden edge directions fed into the search."""

    required: frozenset = frozenset()
    forbidden: frozenset = frozenset()

    def __init__(self, required=(), forbidden=()):
        object.__setattr__(self, "required", frozenset(tuple(p) for p in required))
        object.__setattr__(self, "forbidden", frozenset(tuple(p) for p in forbidden))
        overlap = self.required & self.forbidden
        if overlap:
            raise KnowledgeError(f"required and forbidden overlap: {sorted(overlap)}")
        vertices = sorted({v for p in self.required for v in p})
        cycle = _find_cycle(vertices, self.required)
        if cycle:
            raise KnowledgeError(
                "required directions are cyclic: " + " → ".join(map(str, cycle))
            )

    def to_dict(self) -> dict:
        return {
            "required": sorted([list(p) for p in self.required]),
            "forbidden": sorted([list(p) for p in self.forbidden]),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackgroundKnowledge":
        return cls(data.get("required", ()), data.get("forbidden", ()))


def validate_compatibility(dag: CausalStructure, pag: Pag, strict: bool = True) -> list:
    """All compatibility violations of ``dag`` against ``pag`` (empty = ok).

    Requires a PAG without bidirected edges; those signal hidden confounders
    and the feature set should be extended instead.
    """
    bidirected = pag.bidirected_edges()
    if bidirected:
        raise CompatibilityError(
            "PAG has bidirected edges (hidden confounders); add more situation "
            f"features and re-run discovery: {bidirected}",
            detail={"edges": [list(e) for e in bidirected]},
        )
    violations = []
    if set(dag.vertices) != set(pag.vertices):
        violations.append(
            {
                "kind": "vertex-mismatch",
                "message": f"vertex sets differ: {sorted(set(dag.vertices) ^ set(pag.vertices))}",
            }
        )
        return violations
    for a, b, ma, mb in pag.edges():
        if (ma == ARROW and mb != ARROW) or (ma == CIRCLE and mb == TAIL):
            a, b, ma, mb = b, a, mb, ma
        if mb == ARROW or (ma == TAIL and mb == CIRCLE):
            # a → b, a o→ b, a –o b: the dag must contain a → b
            if (a, b) not in dag.edges:
                violations.append(
                    {
                        "kind": "missing-direction",
                        "a": a,
                        "b": b,
                        "message": f"PAG requires {a} → {b}, absent from the structure",
                    }
                )
        elif ma == CIRCLE and mb == CIRCLE:
            if ((a, b) in dag.edges) == ((b, a) in dag.edges):
                violations.append(
                    {
                        "kind": "unresolved-edge",
                        "a": a,
                        "b": b,
                        "message": f"{a} o–o {b} needs exactly one direction in the structure",
                    }
                )
        else:  # tail–tail: selection-bias edges are out of scope
            violations.append(
                {
                    "kind": "unsupported-edge",
                    "a": a,
                    "b": b,
                    "message": f"unsupported endpoint marks ({ma}, {mb}) on {a} – {b}",
                }
            )
    if strict:
        for a, b in sorted(dag.edges):
            if not pag.has_edge(a, b):
                violations.append(
                    {
                        "kind": "extra-edge",
                        "a": a,
                        "b": b,
                        "message": f"structure edge {a} → {b} is not a PAG adjacency",
                    }
                )
    return violations


def orient_pag_to_dag(pag: Pag, user_orientations) -> CausalStructure:
    """Resolve every free circle edge with the user's orientations.

    Orientations are (cause, effect) pairs. Directions already fixed by the
    PAG cannot be overridden; the result must be acyclic and pass the strict
    compatibility check.
    """
    user = {tuple(p) for p in user_orientations}
    bidirected = pag.bidirected_edges()
    if bidirected:
        raise CompatibilityError(
            "PAG has bidirected edges (hidden confounders); add more situation "
            f"features and re-run discovery: {bidirected}",
            detail={"edges": [list(e) for e in bidirected]},
        )
    adjacency = {(a, b) for a, b, _, _ in pag.edges()} | {
        (b, a) for a, b, _, _ in pag.edges()
    }
    for a, b in sorted(user):
        if (a, b) not in adjacency:
            raise CompatibilityError(
                f"orientation {a} → {b} has no PAG edge to orient",
                detail={"a": a, "b": b},
            )

    edges = set()
    for a, b, ma, mb in pag.edges():
        if (ma == ARROW and mb != ARROW) or (ma == CIRCLE and mb == TAIL):
            a, b, ma, mb = b, a, mb, ma
        if mb == ARROW or (ma == TAIL and mb == CIRCLE):
            if (b, a) in user:
                raise CompatibilityError(
                    f"orientation {b} → {a} contradicts the PAG mark {a} → {b}",
                    detail={"a": b, "b": a},
                )
            edges.add((a, b))
        elif ma == TAIL and mb == TAIL:
            raise CompatibilityError(
                f"unsupported undirected edge {a} – {b}", detail={"a": a, "b": b}
            )
        else:  # circle–circle
            fwd, rev = (a, b) in user, (b, a) in user
            if fwd and rev:
                raise CompatibilityError(
                    f"both directions given for {a} o–o {b}", detail={"a": a, "b": b}
                )
            if not fwd and not rev:
                raise CompatibilityError(
                    f"unresolved edge {a} o–o {b}: an orientation is required",
                    detail={"a": a, "b": b},
                )
            edges.add((a, b) if fwd else (b, a))

    dag = CausalStructure(pag.vertices, edges)  # raises CycleError with the cycle
    violations = validate_compatibility(dag, pag, strict=True)
    if violations:
        raise CompatibilityError(
            "orientations violate PAG compatibility", detail=violations
        )
    return dag
