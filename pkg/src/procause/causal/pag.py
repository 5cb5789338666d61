"""Partial ancestral graphs: mixed graphs with tail/arrow/circle endpoint marks.

Edge-type reading for an edge between a and b with marks (at a, at b):
(tail, arrow) a is a direct cause of b; (arrow, arrow) a and b share a hidden
confounder; (circle, arrow) b is not a cause of a; (circle, circle) the
direction is unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaError

TAIL = "tail"
ARROW = "arrow"
CIRCLE = "circle"

MARKS = (TAIL, ARROW, CIRCLE)


@dataclass
class Pag:
    vertices: tuple
    # canonical key (a, b) with a before b in vertex order -> [mark_at_a, mark_at_b]
    _edges: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        self._order = {v: i for i, v in enumerate(self.vertices)}
        if len(self._order) != len(self.vertices):
            raise SchemaError("duplicate vertices")

    def _key(self, a, b):
        if a not in self._order or b not in self._order:
            raise SchemaError(f"unknown vertex in ({a!r}, {b!r})")
        if a == b:
            raise SchemaError("self edges are not allowed")
        return (a, b) if self._order[a] < self._order[b] else (b, a)

    # --- construction ---------------------------------------------------

    def add_edge(self, a, b, mark_a=CIRCLE, mark_b=CIRCLE) -> None:
        key = self._key(a, b)
        marks = [mark_a, mark_b] if key == (a, b) else [mark_b, mark_a]
        self._edges[key] = marks

    def remove_edge(self, a, b) -> None:
        self._edges.pop(self._key(a, b), None)

    # --- queries ----------------------------------------------------------

    def has_edge(self, a, b) -> bool:
        return self._key(a, b) in self._edges

    def mark_at(self, a, b):
        """Mark at the ``b`` endpoint of edge a-b (None if no edge)."""
        key = self._key(a, b)
        marks = self._edges.get(key)
        if marks is None:
            return None
        return marks[1] if key == (a, b) else marks[0]

    def set_mark(self, a, b, mark) -> bool:
        """Set the mark at the ``b`` endpoint; True if it changed."""
        if mark not in MARKS:
            raise SchemaError(f"bad endpoint mark {mark!r}")
        key = self._key(a, b)
        marks = self._edges[key]
        i = 1 if key == (a, b) else 0
        if marks[i] == mark:
            return False
        marks[i] = mark
        return True

    def adjacent(self, v) -> list:
        """Neighbors of v in vertex order."""
        out = []
        for u in self.vertices:
            if u != v and self.has_edge(u, v):
                out.append(u)
        return out

    def edges(self) -> list:
        """Edges as (a, b, mark_at_a, mark_at_b), sorted in vertex order."""
        keys = sorted(self._edges, key=lambda k: (self._order[k[0]], self._order[k[1]]))
        return [(a, b, self._edges[(a, b)][0], self._edges[(a, b)][1]) for a, b in keys]

    def directed_edge(self, a, b) -> bool:
        """True iff the edge is exactly a -> b (tail at a, arrow at b)."""
        return (
            self.has_edge(a, b)
            and self.mark_at(b, a) == TAIL
            and self.mark_at(a, b) == ARROW
        )

    def bidirected_edges(self) -> list:
        return [
            (a, b)
            for a, b, ma, mb in self.edges()
            if ma == ARROW and mb == ARROW
        ]

    # --- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"a": a, "b": b, "markA": ma, "markB": mb}
                for a, b, ma, mb in self.edges()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Pag":
        pag = cls(tuple(data["vertices"]))
        for e in data["edges"]:
            pag.add_edge(e["a"], e["b"], e["markA"], e["markB"])
        return pag

    def to_text(self) -> str:
        """One line per edge using the usual glyphs (→, ↔, o→, o–o)."""
        lines = []
        for a, b, ma, mb in self.edges():
            if ma == ARROW and mb != ARROW:
                a, b, ma, mb = b, a, mb, ma  # render with the arrowhead on the right
            glyph = {
                (TAIL, ARROW): "→",
                (ARROW, ARROW): "↔",
                (CIRCLE, ARROW): "o→",
                (CIRCLE, CIRCLE): "o–o",
                (TAIL, CIRCLE): "–o",
                (CIRCLE, TAIL): "o–",
                (TAIL, TAIL): "–",
            }[(ma, mb)]
            lines.append(f"{a} {glyph} {b}")
        return "\n".join(lines)
