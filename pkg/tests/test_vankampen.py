import numpy as np
import pytest

from cogrowth.errors import MalformedDiagram, SearchBudgetExceeded
from cogrowth.presentations import surface_presentation, symmetrized_occurrences
from cogrowth.vankampen import (
    Diagram,
    DiagramBuilder,
    boundary_word,
    check_structure,
    diagram_from_json,
    diagram_to_json,
    filament_decomposition,
    metrics,
    render_dot,
    search_diagram,
    single_face_diagram,
    verify_diagram,
)
from cogrowth.word_problem import DehnOracle
from cogrowth.words import cyclic_reduce, inverse, parse_word, rotate, sample_plain_word

P = surface_presentation()
R = P.relators[0]


def two_faces_sharing(k):
    """Two copies of the relator glued along a common arc of length ``k``."""
    b = DiagramBuilder(P)
    b.glue_face(0, 0, R)
    w = b.word()
    arc = w[:k]
    s = next(o.word for o in symmetrized_occurrences(P) if o.word[len(R) - k:] == inverse(arc))
    b.glue_face(0, k, s)
    return b.diagram()


def filament_fixture():
    b = DiagramBuilder(P)
    b.glue_face(0, 0, R)
    b.add_spur(0, 1)
    b.add_spur(1, 2)
    b.glue_face(2, 0, R)
    return b.diagram()


def fixtures():
    return {
        "empty": DiagramBuilder(P).diagram(),
        "single": single_face_diagram(P),
        "shared_edge": two_faces_sharing(1),
        "filament": filament_fixture(),
        "spur_only": _spur(),
    }


def _spur():
    b = DiagramBuilder(P)
    b.add_spur(0, 3)
    return b.diagram()


def test_single_face():
    d = single_face_diagram(P)
    assert verify_diagram(d, P).ok
    assert boundary_word(d) == R
    m = metrics(d)
    assert (m.boundary_length, m.area, m.face_count) == (8, 8, 1)


def test_shared_edge():
    d = two_faces_sharing(1)
    assert verify_diagram(d, P).ok
    m = metrics(d)
    assert (m.boundary_length, m.area, m.internal_edges) == (14, 16, 1)


def test_filament_decomposition():
    d = filament_fixture()
    assert verify_diagram(d, P).ok
    m = metrics(d)
    assert m.filament_edges == 2
    comps, fils = filament_decomposition(d)
    assert len(comps) == 2 and len(fils) == 1 and len(fils[0]) == 2
    for c in comps:
        assert verify_diagram(c, P).ok
    assert sum(len(boundary_word(c)) for c in comps) + 2 * m.filament_edges == m.boundary_length


@pytest.mark.parametrize("name", list(fixtures()))
def test_area_identity(name):
    d = fixtures()[name]
    m = metrics(d)
    assert m.area == m.external_edges + 2 * m.internal_edges


def test_malformed_diagrams():
    d = single_face_diagram(P)
    with pytest.raises(MalformedDiagram):
        check_structure(Diagram(d.mate, d.rot, d.label, {}, d.outer))
    mate = list(d.mate)
    mate[0], mate[2] = mate[2], mate[0]
    with pytest.raises(MalformedDiagram):
        check_structure(Diagram(tuple(mate), d.rot, d.label, d.face_tags, d.outer))


def test_wrong_tag_is_a_violation():
    d = single_face_diagram(P)
    (h, (r, off, o)), = d.face_tags.items()
    bad = Diagram(d.mate, d.rot, d.label, {h: (r, off + 1, o)}, d.outer)
    res = verify_diagram(bad, P)
    assert not res.ok and res.violations


def test_builder_rejects_mismatched_arc():
    b = DiagramBuilder(P)
    b.glue_face(0, 0, R)
    with pytest.raises(ValueError):
        b.glue_face(0, 2, R)


def test_search_finds_products():
    for w in (R + R, R + parse_word("ab") + R + parse_word("BA"), rotate(inverse(R), 5)):
        d = search_diagram(P, w, 2)
        assert d is not None and verify_diagram(d, P).ok
        assert boundary_word(d) == w
        assert metrics(d).face_count <= 2
    assert search_diagram(P, parse_word("abAB"), 2) is None
    assert search_diagram(P, R + R + R, 2) is None
    assert search_diagram(P, R + R + R, 3) is not None


def test_search_budget():
    with pytest.raises(SearchBudgetExceeded):
        search_diagram(P, R + R + R + parse_word("ab"), 3, budget=5)


def test_search_agrees_with_dehn_on_random_words():
    o = DehnOracle(P)
    rng = np.random.default_rng(3)
    for _ in range(100):
        w = sample_plain_word(4, int(rng.integers(0, 12)), rng)
        d = search_diagram(P, w, 1)
        if d is not None:
            assert o.is_trivial(w)


def test_json_and_dot():
    d = filament_fixture()
    assert diagram_from_json(diagram_to_json(d)) == d
    dot = render_dot(d)
    assert dot.startswith("digraph") and dot.count("->") == len(d) // 2
