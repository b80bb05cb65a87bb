import random
from collections import Counter

import pytest

from oracles import brute_force_graphs
from toricgw.graph_enum import (
    canonical_form,
    classify_vertices,
    enumerate_graphs,
    make_graph,
    validate_graph,
)
from toricgw.toric_fan import ToricGraph, load_fan, projective_space_fan


@pytest.fixture(scope="module")
def p1():
    return ToricGraph(projective_space_fan(1))


@pytest.fixture(scope="module")
def p2():
    return ToricGraph(projective_space_fan(2))


def test_known_counts(p1, p2):
    assert len(list(enumerate_graphs(p2, 0, 0, (1, 1, 1)))) == 3
    assert len(list(enumerate_graphs(p1, 0, 2, (1, 1)))) == 4
    assert len(list(enumerate_graphs(p1, 1, 0, (1, 1)))) == 2
    assert len(list(enumerate_graphs(p2, 0, 0, (3, 3, 3)))) == 39


def test_impossible_class(p2):
    assert list(enumerate_graphs(p2, 0, 0, (1, 2, 1))) == []
    assert list(enumerate_graphs(p2, 0, 0, (-1, -1, -1))) == []


def test_every_graph_validates(p1, p2):
    for tg, g, n, beta in ((p1, 1, 2, (2, 2)), (p2, 0, 1, (2, 2, 2)), (p1, 2, 0, (1, 1))):
        for gr in enumerate_graphs(tg, g, n, beta):
            rep = validate_graph(gr, tg, g, n, beta)
            assert rep.ok, rep.message


def test_genus_bookkeeping(p1):
    for gr in enumerate_graphs(p1, 2, 1, (2, 2)):
        tot = sum(2 * v.genus - 2 + v.valence + v.n_marks for v in classify_vertices(gr))
        assert tot == 2 * 2 - 2 + 1


def test_canonical_form_is_relabel_invariant(p2):
    rng = random.Random(5)
    for gr in enumerate_graphs(p2, 0, 2, (2, 2, 2)):
        nv = len(gr.vertices)
        perm = list(range(nv))
        rng.shuffle(perm)
        inv = {old: new for new, old in enumerate(perm)}
        vs = [gr.vertices[i] for i in perm]
        es = [(t, d, inv[u], inv[v], tw) for t, d, u, v, tw in gr.edges]
        rng.shuffle(es)
        assert make_graph(vs, es) == gr


def test_no_duplicates(p1):
    graphs = list(enumerate_graphs(p1, 1, 1, (3, 3)))
    assert len({g.key() for g in graphs}) == len(graphs)


def test_brute_force_small(p1):
    ours = list(enumerate_graphs(p1, 0, 1, (2, 2)))
    ref = brute_force_graphs(p1, 0, 1, (2, 2))
    assert len(ours) == len(ref)
    assert Counter(g.aut for g in ours) == Counter(a for _, a in ref)


def test_double_cover_automorphism(p1):
    # two parallel degree-1 edges between the two fixed points
    gr = [g for g in enumerate_graphs(p1, 1, 0, (2, 2)) if len(g.edges) == 2 and len(g.vertices) == 2]
    assert [g.aut for g in gr] == [2]


def test_marking_filter(p2):
    allowed = [{(1, 2)}]
    graphs = list(enumerate_graphs(p2, 0, 1, (1, 1, 1), marking_filter=allowed))
    assert graphs and all(gr.vertices[gr.marking_vertex()[0]][0] == (1, 2) for gr in graphs)


def test_json_and_describe(p2):
    gr = next(iter(enumerate_graphs(p2, 0, 1, (1, 1, 1))))
    d = gr.to_json()
    assert d["aut"] == gr.aut and len(d["edges"]) == 1
    assert "d=1" in gr.describe()
