"""Van Kampen diagrams as combinatorial maps.

A diagram is stored through its half-edges. ``mate[h]`` is the opposite
half-edge, ``rot[h]`` the next half-edge leaving the same vertex in
counter-clockwise order, and ``label[h]`` the letter read along ``h``
(``label[mate[h]] == -label[h]``). Faces are the orbits of
``h -> rot[mate[h]]``; one of them is the outer face, whose boundary reads
the word the diagram fills. Every other face carries a tag
``(relator, offset, orientation)`` at a chosen starting half-edge: the
word read from there is ``rotate(r or r^-1, offset)``.

:class:`DiagramBuilder` grows diagrams by spurs and face gluings along
the boundary. :func:`search_diagram` looks for a diagram with at most
``K`` faces by reducing the boundary word and replays the reduction with
the builder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import MalformedDiagram, SearchBudgetExceeded
from .presentations import Presentation, symmetrized_occurrences
from .words import Word, cyclic_reduce, format_word, inverse, min_rotation, parse_word, rotate

Tag = Tuple[int, int, int]


@dataclass(frozen=True)
class Diagram:
    mate: Tuple[int, ...]
    rot: Tuple[int, ...]
    label: Tuple[int, ...]
    face_tags: Dict[int, Tag] = field(default_factory=dict)
    outer: Optional[int] = None

    def __len__(self):
        return len(self.mate)

    def phi(self, h: int) -> int:
        return self.rot[self.mate[h]]

    def orbit(self, h: int) -> List[int]:
        out = [h]
        x = self.phi(h)
        while x != h:
            out.append(x)
            x = self.phi(x)
        return out

    def faces(self) -> List[List[int]]:
        seen = set()
        out = []
        for h in range(len(self)):
            if h not in seen:
                orb = self.orbit(h)
                seen.update(orb)
                out.append(orb)
        return out

    def vertices(self) -> List[List[int]]:
        seen = set()
        out = []
        for h in range(len(self)):
            if h in seen:
                continue
            orb = [h]
            x = self.rot[h]
            while x != h:
                orb.append(x)
                x = self.rot[x]
            seen.update(orb)
            out.append(orb)
        return out

    def face_index(self) -> List[int]:
        idx = [0] * len(self)
        for i, f in enumerate(self.faces()):
            for h in f:
                idx[h] = i
        return idx

    def vertex_index(self) -> List[int]:
        idx = [0] * len(self)
        for i, v in enumerate(self.vertices()):
            for h in v:
                idx[h] = i
        return idx

    def read(self, h: int) -> Word:
        return tuple(self.label[x] for x in self.orbit(h))


def check_structure(d: Diagram) -> None:
    """Raise :class:`MalformedDiagram` unless ``d`` is a planar disk map."""
    n = len(d.mate)
    if len(d.rot) != n or len(d.label) != n:
        raise MalformedDiagram("mate, rot and label lengths differ")
    if n == 0:
        if d.face_tags or d.outer is not None:
            raise MalformedDiagram("empty diagram with faces or outer marker")
        return
    for h in range(n):
        g = d.mate[h]
        if not 0 <= g < n or g == h or d.mate[g] != h:
            raise MalformedDiagram(f"mate is not a fixed-point-free involution at {h}")
        if d.label[h] == 0 or d.label[g] != -d.label[h]:
            raise MalformedDiagram(f"labels of half-edges {h}, {g} are not mutually inverse")
    if sorted(d.rot) != list(range(n)):
        raise MalformedDiagram("rot is not a permutation")
    # connectivity through mate and rot
    seen = {0}
    stack = [0]
    while stack:
        h = stack.pop()
        for g in (d.mate[h], d.rot[h]):
            if g not in seen:
                seen.add(g)
                stack.append(g)
    if len(seen) != n:
        raise MalformedDiagram("diagram is not connected")
    V, E, F = len(d.vertices()), n // 2, len(d.faces())
    if V - E + F != 2:
        raise MalformedDiagram(f"Euler characteristic {V - E + F} != 2: not a planar disk map")
    if d.outer is None or not 0 <= d.outer < n:
        raise MalformedDiagram("missing outer face marker")
    fi = d.face_index()
    outer = fi[d.outer]
    tagged = {}
    for h in d.face_tags:
        if not 0 <= h < n:
            raise MalformedDiagram(f"face tag on unknown half-edge {h}")
        if fi[h] == outer:
            raise MalformedDiagram("the outer face carries a relator tag")
        if fi[h] in tagged:
            raise MalformedDiagram(f"face {fi[h]} tagged twice")
        tagged[fi[h]] = h
    if len(tagged) != F - 1:
        raise MalformedDiagram(f"{F - 1 - len(tagged)} internal face(s) without a relator tag")


@dataclass
class VerifyResult:
    ok: bool
    violations: List[str]


def _tag_word(p: Presentation, tag: Tag) -> Word:
    r, off, orient = tag
    base = p.relators[r] if orient > 0 else inverse(p.relators[r])
    return rotate(base, off)


def verify_diagram(d: Diagram, p: Presentation) -> VerifyResult:
    """Check every tagged face reads its relator.

    Structural defects raise :class:`MalformedDiagram`; relator mismatches
    are returned as violations.
    """
    check_structure(d)
    bad = []
    for h, tag in sorted(d.face_tags.items()):
        r, off, orient = tag
        if not 0 <= r < len(p.relators) or orient not in (1, -1):
            bad.append(f"face at {h}: tag {tag} names no relator")
            continue
        got = d.read(h)
        want = _tag_word(p, tag)
        if got != want:
            bad.append(f"face at {h}: reads {format_word(got)}, tag says {format_word(want)}")
    return VerifyResult(not bad, bad)


def boundary_word(d: Diagram) -> Word:
    if d.outer is None:
        return ()
    return d.read(d.outer)


@dataclass(frozen=True)
class DiagramMetrics:
    boundary_length: int
    face_count: int
    area: int  # total length of internal face boundaries
    external_edges: int  # one side on the outer face, the other internal
    internal_edges: int
    filament_edges: int
    components: Tuple[dict, ...] = ()


def _edge_classes(d: Diagram):
    fi = d.face_index()
    outer = fi[d.outer] if d.outer is not None else None
    ext, internal, fil = [], [], []
    for h in range(len(d)):
        g = d.mate[h]
        if h > g:
            continue
        a, b = fi[h] == outer, fi[g] == outer
        (fil if a and b else ext if a or b else internal).append(h)
    return ext, internal, fil


def metrics(d: Diagram) -> DiagramMetrics:
    if not len(d):
        return DiagramMetrics(0, 0, 0, 0, 0, 0, ())
    check_structure(d)
    ext, internal, fil = _edge_classes(d)
    fi = d.face_index()
    outer = fi[d.outer]
    area = sum(1 for h in range(len(d)) if fi[h] != outer)
    if area != len(ext) + 2 * len(internal):
        raise AssertionError("area does not match the edge count identity")
    comps = tuple(
        {"faces": len(c.face_tags), "boundary_length": len(boundary_word(c)), "area": len(c) - len(boundary_word(c))}
        for c in filament_decomposition(d)[0]
    )
    return DiagramMetrics(len(d.orbit(d.outer)), len(d.face_tags), area, len(ext), len(internal), len(fil), comps)


def _restrict(d: Diagram, keep: Sequence[int], outer_candidates: Sequence[int]) -> Diagram:
    new = {h: i for i, h in enumerate(keep)}
    mate = [new[d.mate[h]] for h in keep]
    rot = []
    for h in keep:
        x = d.rot[h]
        while x not in new:
            x = d.rot[x]
        rot.append(new[x])
    label = [d.label[h] for h in keep]
    tags = {new[h]: t for h, t in d.face_tags.items() if h in new}
    outer = next((new[h] for h in outer_candidates if h in new), None)
    return Diagram(tuple(mate), tuple(rot), tuple(label), tags, outer)


def filament_decomposition(d: Diagram) -> Tuple[List[Diagram], List[List[int]]]:
    """Split into maximal filament-free pieces and the filament edges.

    Filament edges have the outer face on both sides. Pieces are the
    connected components (through shared vertices) of the remaining edges;
    filaments are returned as groups of connected edges, each edge given
    by one of its half-edges.
    """
    if not len(d):
        return [], []
    _, _, fil = _edge_classes(d)
    fil_half = set(fil) | {d.mate[h] for h in fil}
    vi = d.vertex_index()
    parent = list(range(len(d.vertices())))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    rest = [h for h in range(len(d)) if h not in fil_half]
    for h in rest:
        union(vi[h], vi[d.mate[h]])
    groups: Dict[int, List[int]] = {}
    for h in rest:
        groups.setdefault(find(vi[h]), []).append(h)
    outer_orbit = d.orbit(d.outer)
    comps = [_restrict(d, hs, outer_orbit) for _, hs in sorted(groups.items())]

    # group filament edges by connectivity among themselves
    parent = list(range(len(parent)))
    for h in fil:
        union(vi[h], vi[d.mate[h]])
    fgroups: Dict[int, List[int]] = {}
    for h in fil:
        fgroups.setdefault(find(vi[h]), []).append(h)
    return comps, [g for _, g in sorted(fgroups.items())]


# -- construction ------------------------------------------------------------

class DiagramBuilder:
    """Grow a diagram one spur or face at a time.

    ``boundary`` lists the outer half-edges in reading order, so the
    boundary word is ``[label[h] for h in boundary]``.
    """

    def __init__(self, p: Presentation):
        self.p = p
        self.mate: List[int] = []
        self.rot: List[int] = []
        self.label: List[int] = []
        self.tags: Dict[int, Tag] = {}
        self.boundary: List[int] = []
        self._occ = {}
        for o in symmetrized_occurrences(p):
            self._occ.setdefault(o.word, (o.relator, o.offset, o.orientation))

    def word(self) -> Word:
        return tuple(self.label[h] for h in self.boundary)

    def _edge(self, x: int) -> Tuple[int, int]:
        h = len(self.mate)
        self.mate += [h + 1, h]
        self.rot += [h, h + 1]
        self.label += [x, -x]
        return h, h + 1

    def _insert_after(self, a: int, h: int):
        self.rot[h] = self.rot[a]
        self.rot[a] = h

    def _corner(self, pos: int) -> Optional[int]:
        """Half-edge after which the corner before ``boundary[pos]`` starts."""
        if not self.boundary:
            return None
        return self.mate[self.boundary[(pos - 1) % len(self.boundary)]]

    def add_spur(self, pos: int, x: int):
        """Insert ``x x^-1`` into the boundary word before position ``pos``."""
        b = self.boundary
        if not 0 <= pos <= len(b):
            raise IndexError("boundary position out of range")
        h, g = self._edge(x)  # g's endpoint is a new vertex of degree 1
        pred = self._corner(pos)
        if pred is not None:
            self._insert_after(pred, h)
        self.boundary = b[:pos] + [h, g] + b[pos:]

    def glue_face(self, pos: int, arc_len: int, s: Sequence[int]):
        """Attach a face labelled by the symmetrized relator ``s``.

        The boundary arc of length ``arc_len`` starting at ``pos`` must read
        ``s[k:]^-1`` with ``k = |s| - arc_len >= 1``; it becomes interior
        and is replaced by a new path reading ``s[:k]``.
        """
        s = tuple(s)
        k = len(s) - arc_len
        if k < 1:
            raise ValueError("the new path must have at least one edge")
        n = len(self.boundary)
        if arc_len > n:
            raise ValueError("arc longer than the boundary")
        if n:
            self.boundary = self.boundary[pos % n:] + self.boundary[:pos % n]
        b = self.boundary
        arc = tuple(self.label[h] for h in b[:arc_len])
        if arc != inverse(s[k:]):
            raise ValueError(f"boundary arc {format_word(arc)} does not match {format_word(inverse(s[k:]))}")
        tag = self._occ.get(inverse(s))
        if tag is None:
            raise ValueError(f"{format_word(s)} is not a symmetrized relator")
        path = [self._edge(x) for x in s[:k]]
        fwd = [e[0] for e in path]
        back = [e[1] for e in path]
        for t in range(1, k):
            # new vertex t carries back[t-1] and fwd[t]
            self.rot[back[t - 1]] = fwd[t]
            self.rot[fwd[t]] = back[t - 1]
        first, last = fwd[0], back[k - 1]
        if n == 0:
            self.rot[first] = last
            self.rot[last] = first
            start = last
        elif arc_len == 0:
            pred = self._corner(0)
            self._insert_after(pred, last)
            self._insert_after(pred, first)
            start = last
        else:
            pred_p = self._corner(0)
            pred_q = self.mate[b[arc_len - 1]]
            self._insert_after(pred_p, first)
            self._insert_after(pred_q, last)
            start = b[0]
        self.tags[start] = tag
        self.boundary = fwd + b[arc_len:]

    def diagram(self) -> Diagram:
        outer = self.boundary[0] if self.boundary else None
        return Diagram(tuple(self.mate), tuple(self.rot), tuple(self.label), dict(self.tags), outer)


def single_face_diagram(p: Presentation, relator: int = 0) -> Diagram:
    b = DiagramBuilder(p)
    b.glue_face(0, 0, p.relators[relator])
    return b.diagram()


# -- search ------------------------------------------------------------------

def _reduce_ops(w: Word, ops: list) -> Word:
    """Cyclically free-reduce ``w``, recording rotations and cancellations."""
    w = list(w)
    while len(w) >= 2:
        n = len(w)
        i = next((i for i in range(n - 1) if w[i] == -w[i + 1]), None)
        if i is not None:
            ops.append(("cancel", i, w[i]))
            del w[i:i + 2]
        elif w[-1] == -w[0]:
            ops.append(("rot", n - 1))
            w = w[-1:] + w[:-1]
        else:
            break
    return tuple(w)


class _Search:
    def __init__(self, p: Presentation, budget: int):
        self.occ = symmetrized_occurrences(p)
        self.by_first: Dict[int, List[Word]] = {}
        for o in self.occ:
            self.by_first.setdefault(o.word[0], []).append(o.word)
        self.cyclic = {min_rotation(o.word): o.word for o in self.occ}
        self.lengths = {len(o.word) for o in self.occ}
        self.budget = budget
        self.calls = 0
        self.failed = set()

    def run(self, w: Word, faces: int) -> Optional[list]:
        self.calls += 1
        if self.calls > self.budget:
            raise SearchBudgetExceeded(f"diagram search exceeded {self.budget} steps")
        ops: list = []
        w = _reduce_ops(w, ops)
        if not w:
            return ops
        if faces == 0:
            return None
        key = (min_rotation(w), faces)
        if key in self.failed:
            return None
        if faces == 1:
            found = self._last_face(w)
            if found is None:
                self.failed.add(key)
                return None
            return ops + found
        n = len(w)
        for r in range(n):
            wr = w[r:] + w[:r]
            for s in self.by_first.get(wr[0], ()):
                kmax = 1
                while kmax < min(n, len(s)) and wr[kmax] == s[kmax]:
                    kmax += 1
                for k in range(kmax, 0, -1):
                    new = inverse(s[k:]) + wr[k:]
                    sub = self.run(new, faces - 1)
                    if sub is not None:
                        return ops + [("rot", r), ("face", k, s)] + sub
        self.failed.add(key)
        return None

    def _last_face(self, w: Word) -> Optional[list]:
        if len(w) not in self.lengths:
            return None
        s = self.cyclic.get(min_rotation(w))
        if s is None:
            return None
        n = len(w)
        r = next(r for r in range(n) if w[r:] + w[:r] == s)
        return [("rot", r), ("face", n, s)]


def search_diagram(p: Presentation, w: Sequence[int], max_faces: int = 2, budget: int = 200_000) -> Optional[Diagram]:
    """A van Kampen diagram for ``w`` with at most ``max_faces`` faces, or ``None``.

    ``None`` means no such diagram exists; running out of ``budget``
    search steps raises :class:`SearchBudgetExceeded` instead, since then
    nothing has been decided.
    """
    w = tuple(w)
    ops = _Search(p, budget).run(w, max_faces)
    if ops is None:
        return None
    return replay(p, w, ops)


def replay(p: Presentation, w: Word, ops: list) -> Diagram:
    """Build the diagram by undoing the reduction ``ops`` from the empty word."""
    b = DiagramBuilder(p)
    for op in reversed(ops):
        if op[0] == "rot":
            n = len(b.boundary)
            if n:
                r = op[1] % n
                b.boundary = b.boundary[n - r:] + b.boundary[:n - r]
        elif op[0] == "cancel":
            b.add_spur(op[1], op[2])
        else:
            _, k, s = op
            b.glue_face(0, len(s) - k, s)
    d = b.diagram()
    if boundary_word(d) != w:
        raise AssertionError("replayed diagram does not read the input word")
    return d


# -- export ------------------------------------------------------------------

def diagram_to_dict(d: Diagram) -> dict:
    return {
        "half_edges": [
            {
                "id": h,
                "mate": d.mate[h],
                "next": d.rot[h],
                "label": format_word((d.label[h],)),
                "face_tag": list(d.face_tags[h]) if h in d.face_tags else None,
            }
            for h in range(len(d))
        ],
        "outer": d.outer,
    }


def diagram_to_json(d: Diagram) -> str:
    return json.dumps(diagram_to_dict(d), indent=2, sort_keys=True)


def diagram_from_json(text: str) -> Diagram:
    obj = json.loads(text)
    hs = sorted(obj["half_edges"], key=lambda e: e["id"])
    if [e["id"] for e in hs] != list(range(len(hs))):
        raise MalformedDiagram("half-edge ids must be 0..n-1")
    tags = {e["id"]: tuple(e["face_tag"]) for e in hs if e["face_tag"] is not None}
    return Diagram(
        tuple(e["mate"] for e in hs),
        tuple(e["next"] for e in hs),
        tuple(parse_word(e["label"])[0] for e in hs),
        tags,
        obj["outer"],
    )


def render_dot(d: Diagram) -> str:
    """Graphviz source: one node per vertex, one arrow per edge."""
    vi = d.vertex_index()
    lines = ["digraph vankampen {", "  node [shape=point];"]
    for v in sorted(set(vi)):
        lines.append(f"  v{v};")
    for h in range(len(d)):
        if d.label[h] > 0:
            lines.append(f'  v{vi[h]} -> v{vi[d.mate[h]]} [label="{format_word((d.label[h],))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
