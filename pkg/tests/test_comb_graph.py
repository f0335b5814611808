import pytest

from comb_qmc.comb_graph import (
    Vertex,
    VertexClass,
    as_vertex,
    canonical_key,
    canonical_order,
    classify,
    is_spine,
    level,
    successors,
    translate,
    volume,
)


def test_vertex_fields_and_level():
    v = Vertex(3, 2)
    assert (v.k, v.l) == (3, 2)
    assert v.level == 5
    assert v.to_json() == [3, 2]


def test_as_vertex_accepts_pairs_and_rejects_negatives():
    assert as_vertex((4, 0)) == Vertex(4, 0)
    assert as_vertex([0, 7]) == Vertex(0, 7)
    with pytest.raises(ValueError):
        as_vertex((-1, 0))
    with pytest.raises(ValueError):
        as_vertex((0, -3))


def test_classify_exhaustive():
    for k in range(65):
        for l in range(65 - k):
            v = Vertex(k, l)
            if l == 0:
                assert is_spine(v)
                assert classify(v) is VertexClass.L2
            else:
                assert not is_spine(v)
                assert classify(v) is VertexClass.L1


def test_successors_spine_order_is_spine_then_tooth():
    assert successors(Vertex(0, 0)) == (Vertex(1, 0), Vertex(0, 1))
    assert successors(Vertex(5, 0)) == (Vertex(6, 0), Vertex(5, 1))


def test_successors_tooth_continue_upward():
    assert successors(Vertex(2, 1)) == (Vertex(2, 2),)
    assert successors(Vertex(0, 4)) == (Vertex(0, 5),)


def test_level_small_cases():
    assert level(0) == (Vertex(0, 0),)
    assert level(1) == (Vertex(1, 0), Vertex(0, 1))
    assert level(2) == (Vertex(2, 0), Vertex(1, 1), Vertex(0, 2))
    assert level(3) == (Vertex(3, 0), Vertex(2, 1), Vertex(1, 2), Vertex(0, 3))


def test_level_is_concatenated_successors_of_previous_level():
    for n in range(12):
        expanded = []
        for v in level(n):
            expanded.extend(successors(v))
        assert tuple(expanded) == level(n + 1)


def test_level_members_have_distance_n():
    for n in range(20):
        layer = level(n)
        assert len(layer) == n + 1
        assert all(v.level == n for v in layer)


def test_volume_contents_and_size():
    assert volume(0) == (Vertex(0, 0),)
    assert volume(1) == (Vertex(0, 0), Vertex(1, 0), Vertex(0, 1))
    for n in range(10):
        ball = volume(n)
        assert len(ball) == (n + 1) * (n + 2) // 2
        assert ball == tuple(u for m in range(n + 1) for u in level(m))


def test_translate_shifts_spine_coordinate():
    assert translate(Vertex(2, 3), 4) == Vertex(6, 3)
    assert translate((0, 0), 0) == Vertex(0, 0)
    with pytest.raises(ValueError):
        translate(Vertex(1, 0), -2)


def test_canonical_key_sorts_by_distance_then_tooth():
    assert canonical_key(Vertex(3, 1)) == (4, 1)
    shuffled = [Vertex(0, 2), Vertex(0, 0), Vertex(1, 1), Vertex(2, 0), Vertex(1, 0)]
    assert canonical_order(shuffled) == (
        Vertex(0, 0),
        Vertex(1, 0),
        Vertex(2, 0),
        Vertex(1, 1),
        Vertex(0, 2),
    )
