"""Constraint-based PAG discovery.

Pipeline: order-independent skeleton search (edge removals are applied only
between levels, so level-ℓ tests always see the level-(ℓ−1) adjacencies),
unshielded-collider orientation from separating sets, background-knowledge
application, then the R1–R4 orientation rules run to a fixpoint. Every loop
iterates in the fixed vertex order, so the output is deterministic.
"""

from __future__ import annotations

import warnings
from itertools import combinations

from ..errors import KnowledgeError
from ..situation import SituationTable
from .citest import CiTestConfig, TableTester
from .pag import ARROW, CIRCLE, TAIL, Pag
from .structure import BackgroundKnowledge


class _Orienter:
    """Mark setter enforcing monotonicity and forbidden directions.

    A circle may be refined to a tail or an arrow; a tail or an arrow is
    never changed back. A mark that would complete a forbidden directed edge
    is refused (the endpoint stays as it is).
    """

    def __init__(self, pag: Pag, forbidden: frozenset):
        self.pag = pag
        self.forbidden = forbidden

    def _completes_forbidden(self, a, b, mark) -> bool:
        other = self.pag.mark_at(b, a)  # mark at a
        if mark == ARROW and other == TAIL and (a, b) in self.forbidden:
            return True
        if mark == TAIL and other == ARROW and (b, a) in self.forbidden:
            return True
        return False

    def set(self, a, b, mark, strict: bool = False) -> bool:
        """Set the mark at the ``b`` end of edge a–b; True if changed."""
        current = self.pag.mark_at(a, b)
        if current == mark:
            return False
        if current != CIRCLE:
            if strict:
                raise KnowledgeError(
                    f"edge {a} – {b} is forced in both directions "
                    f"(endpoint at {b} is already {current}, wanted {mark})"
                )
            return False
        if self._completes_forbidden(a, b, mark):
            return False
        return self.pag.set_mark(a, b, mark)


def _skeleton(vertices, independent, max_cond):
    """PC-stable adjacency search; returns (adjacency sets, sepsets)."""
    adjacency = {v: {u for u in vertices if u != v} for v in vertices}
    sepsets: dict = {}
    order = {v: i for i, v in enumerate(vertices)}
    level = 0
    while True:
        snapshot = {v: sorted(adjacency[v], key=order.get) for v in vertices}
        removals = []
        removed = set()
        for x, y in combinations(vertices, 2):
            if y not in adjacency[x] or (x, y) in removed:
                continue
            tried = set()
            found = None
            for base in (snapshot[x], snapshot[y]):
                candidates = [v for v in base if v not in (x, y)]
                for subset in combinations(candidates, level):
                    if subset in tried:
                        continue
                    tried.add(subset)
                    if independent(x, y, subset):
                        found = frozenset(subset)
                        break
                if found is not None:
                    break
            if found is not None:
                sepsets[(x, y)] = sepsets[(y, x)] = found
                removals.append((x, y))
                removed.add((x, y))
        for x, y in removals:
            adjacency[x].discard(y)
            adjacency[y].discard(x)
        level += 1
        if max_cond is not None and level > max_cond:
            break
        if not any(
            len(adjacency[x]) - 1 >= level or len(adjacency[y]) - 1 >= level
            for x, y in combinations(vertices, 2)
            if y in adjacency[x]
        ):
            break
    return adjacency, sepsets


def _orient_colliders(pag: Pag, orient: _Orienter, sepsets, vertices) -> None:
    for x, y in combinations(vertices, 2):
        if pag.has_edge(x, y):
            continue
        for z in vertices:
            if z in (x, y) or not (pag.has_edge(x, z) and pag.has_edge(y, z)):
                continue
            if z not in sepsets.get((x, y), frozenset()):
                orient.set(x, z, ARROW)
                orient.set(y, z, ARROW)


def _apply_knowledge(pag: Pag, orient: _Orienter, knowledge: BackgroundKnowledge) -> None:
    for a, b in sorted(knowledge.required):
        if not pag.has_edge(a, b):
            warnings.warn(
                f"required direction {a} → {b} has no skeleton edge; ignored",
                stacklevel=3,
            )
            continue
        orient.set(a, b, ARROW, strict=True)
        if (b, a) not in knowledge.required:
            orient.set(b, a, TAIL, strict=True)


def _rule_r1(pag: Pag, orient: _Orienter, vertices) -> bool:
    # a *→ b o–* c with a, c non-adjacent: orient b → c
    changed = False
    for b in vertices:
        for a in pag.adjacent(b):
            if pag.mark_at(a, b) != ARROW:
                continue
            for c in pag.adjacent(b):
                if c == a or pag.has_edge(a, c):
                    continue
                if pag.mark_at(c, b) == CIRCLE:
                    changed |= orient.set(b, c, ARROW)
                    changed |= orient.set(c, b, TAIL)
    return changed


def _rule_r2(pag: Pag, orient: _Orienter, vertices) -> bool:
    # a → b *→ c or a *→ b → c, with a *–o c: orient a *→ c
    changed = False
    for a in vertices:
        for c in pag.adjacent(a):
            if pag.mark_at(a, c) != CIRCLE:
                continue
            for b in vertices:
                if b in (a, c) or not (pag.has_edge(a, b) and pag.has_edge(b, c)):
                    continue
                a_to_b = pag.mark_at(a, b) == ARROW and pag.mark_at(b, a) == TAIL
                b_into_c = pag.mark_at(b, c) == ARROW
                a_into_b = pag.mark_at(a, b) == ARROW
                b_to_c = pag.mark_at(b, c) == ARROW and pag.mark_at(c, b) == TAIL
                if (a_to_b and b_into_c) or (a_into_b and b_to_c):
                    changed |= orient.set(a, c, ARROW)
                    break
    return changed


def _rule_r3(pag: Pag, orient: _Orienter, vertices) -> bool:
    # a *→ b ←* c, a *–o d o–* c, a, c non-adjacent, d *–o b: orient d *→ b
    changed = False
    for d in vertices:
        for b in pag.adjacent(d):
            if pag.mark_at(d, b) != CIRCLE:
                continue
            shared = [
                v
                for v in vertices
                if v not in (d, b) and pag.has_edge(v, b) and pag.has_edge(v, d)
            ]
            fired = False
            for a, c in combinations(shared, 2):
                if pag.has_edge(a, c):
                    continue
                if (
                    pag.mark_at(a, b) == ARROW
                    and pag.mark_at(c, b) == ARROW
                    and pag.mark_at(a, d) == CIRCLE
                    and pag.mark_at(c, d) == CIRCLE
                ):
                    changed |= orient.set(d, b, ARROW)
                    fired = True
                    break
            if fired:
                break
    return changed


def _rule_r4(pag: Pag, orient: _Orienter, sepsets, vertices) -> bool:
    # discriminating path <θ, ..., a, b, c> for b: every vertex strictly
    # between θ and b is a collider on the path and a parent of c, θ and c
    # are non-adjacent. If b ∈ sepset(θ, c) orient b → c, else a ↔ b ↔ c.
    def fire(theta, alpha, b, c) -> bool:
        if b in sepsets.get((theta, c), frozenset()):
            did = orient.set(b, c, ARROW)
            return orient.set(c, b, TAIL) or did
        did = orient.set(alpha, b, ARROW)
        did = orient.set(b, alpha, ARROW) or did
        did = orient.set(b, c, ARROW) or did
        return orient.set(c, b, ARROW) or did

    def dfs(path, b, c) -> bool:
        v = path[-1]
        for w in pag.adjacent(v):
            if w == c or w in path:
                continue
            if pag.mark_at(w, v) != ARROW:
                continue
            if not pag.has_edge(w, c):
                # w is a θ candidate; need at least one collider between θ and b
                if len(path) >= 2 and fire(w, path[1], b, c):
                    return True
                continue
            if pag.directed_edge(w, c) and pag.mark_at(v, w) == ARROW:
                if dfs(path + [w], b, c):
                    return True
        return False

    changed = False
    for c in vertices:
        for b in pag.adjacent(c):
            if pag.mark_at(c, b) != CIRCLE:
                continue
            changed |= dfs([b], b, c)
    return changed


def search_pag(
    vertices,
    independent,
    knowledge: BackgroundKnowledge | None = None,
    max_cond: int | None = None,
):
    """Full constraint-based search over named vertices.

    ``independent(x, y, cond_tuple) -> bool`` answers CI queries; swap in an
    exact d-separation oracle to test the search itself. Returns the PAG and
    the separating sets keyed by ordered vertex pair.
    """
    vertices = tuple(vertices)
    knowledge = knowledge or BackgroundKnowledge()
    adjacency, sepsets = _skeleton(vertices, independent, max_cond)

    pag = Pag(vertices)
    for x, y in combinations(vertices, 2):
        if y in adjacency[x]:
            pag.add_edge(x, y, CIRCLE, CIRCLE)
    orient = _Orienter(pag, knowledge.forbidden)

    _orient_colliders(pag, orient, sepsets, vertices)
    _apply_knowledge(pag, orient, knowledge)
    changed = True
    while changed:
        changed = _rule_r1(pag, orient, vertices)
        changed |= _rule_r2(pag, orient, vertices)
        changed |= _rule_r3(pag, orient, vertices)
        changed |= _rule_r4(pag, orient, sepsets, vertices)
    return pag, sepsets


def discover_pag(
    table: SituationTable,
    knowledge: BackgroundKnowledge | None = None,
    cfg: CiTestConfig | None = None,
) -> Pag:
    """Discover the PAG of a complete situation feature table."""
    cfg = cfg or CiTestConfig()
    tester = TableTester(table, cfg)
    labels = table.labels
    index = {l: i for i, l in enumerate(labels)}

    def independent(x, y, cond):
        return tester.independent(index[x], index[y], tuple(index[c] for c in cond))

    pag, _ = search_pag(labels, independent, knowledge, cfg.max_conditioning_size)
    return pag
