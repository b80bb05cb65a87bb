import itertools
import json
from fractions import Fraction
from math import factorial

import pytest

from toricgw.exact_algebra import RationalFunction, WeightVector
from toricgw.psi_hodge import (
    HodgeKey,
    HodgeTable,
    Missing,
    PsiStore,
    UnstableError,
    VertexSpec,
    attach_store,
    clear_memo,
    genus0_closed,
    hodge_integral,
    psi_integral,
    required_integrals,
    unstable_convention,
    vertex_integral,
)


def test_known_values():
    assert psi_integral(0, (0, 0, 0)) == 1
    assert psi_integral(1, (1,)) == Fraction(1, 24)
    assert psi_integral(2, (4,)) == Fraction(1, 1152)
    assert psi_integral(3, (7,)) == Fraction(1, 82944)
    assert psi_integral(2, (2, 3)) == Fraction(29, 5760)
    assert psi_integral(1, (1, 1)) == Fraction(1, 24)


def test_dimension_mismatch_is_zero():
    assert psi_integral(1, (2,)) == 0


def test_unstable_raises():
    with pytest.raises(UnstableError):
        psi_integral(0, (0, 0))
    with pytest.raises(ValueError):
        psi_integral(1, (-1, 2))


def test_symmetry():
    for p in itertools.permutations((0, 1, 2, 3)):
        assert psi_integral(2, p) == psi_integral(2, (3, 2, 1, 0))


def test_store_round_trip(tmp_path):
    clear_memo()
    store = PsiStore(tmp_path)
    attach_store(store)
    try:
        v = psi_integral(2, (4,))
    finally:
        attach_store(None)
    entries = list(store.entries())
    assert entries and all(ok for _, _, ok in entries)
    assert store.load()[(2, (4,))] == v
    store.clear()
    assert list(store.entries()) == []


def test_store_detects_tampering(tmp_path):
    store = PsiStore(tmp_path)
    store.put((0, (0, 0, 0)), Fraction(1))
    text = store.path.read_text().replace('"value": "1"', '"value": "2"')
    store.path.write_text(text)
    assert [ok for _, _, ok in store.entries()] == [False]


def test_hodge_key_and_table():
    k = HodgeKey.make(2, (1, 1), (1, 1))
    assert k.psi == (1, 1) and k.lam == (1, 1)
    assert k.dimension_ok()
    assert str(k) == "g=2;psi=(1,1);lambda=(1,1)"
    assert isinstance(hodge_integral(k), Missing)
    t = HodgeTable()
    t.set(k, Fraction(7, 5))
    assert hodge_integral(k, t) == Fraction(7, 5)
    # no lambda and pure psi is computed
    assert hodge_integral(HodgeKey.make(1, (1,))) == Fraction(1, 24)
    # genus 0 lambda classes vanish
    with pytest.raises(ValueError):
        HodgeKey.make(0, (0, 0, 0), (1,))


def test_table_load(tmp_path, data_dir):
    t = HodgeTable.load(data_dir / "hodge_genus1.json")
    assert t.get(HodgeKey.make(1, (0,), (1,))) == Fraction(1, 24)
    p = tmp_path / "t.json"
    p.write_text(json.dumps(t.to_json()))
    assert len(HodgeTable.load(p)) == len(t)


def _w(n):
    return [WeightVector.basis(n, i) for i in range(n)]


def test_unstable_conventions():
    w = WeightVector([1, 0]).to_rf()
    v = WeightVector([0, 1]).to_rf()
    assert unstable_convention("val1", w) == w
    assert unstable_convention("val2", w, v) == (w + v).inverse()
    assert unstable_convention("marked1", w, a=0) == RationalFunction.one(2)
    assert unstable_convention("marked1", w, a=2) == w * w
    with pytest.raises(ValueError):
        unstable_convention("marked1", w, a=-1)


def test_genus1_vertex_needs_lambda_keys():
    spec = VertexSpec(1, _w(2), [(0, 1)], [])
    val = vertex_integral(spec)
    assert isinstance(val, Missing)
    assert all(k.dimension_ok() for k in val.keys)
    keys = required_integrals([spec])
    assert [str(k) for k in keys] == ["g=1;psi=(0);lambda=(1)"]


def test_genus0_has_no_requirements():
    specs = [VertexSpec(0, _w(3), [(0, 1), (1, 2), (2, 1)], [])]
    assert required_integrals(specs) == []


def test_genus2_keys_cover_lambda_monomials():
    keys = required_integrals([VertexSpec(2, _w(2), [(0, 1)], [])])
    lams = {k.lam for k in keys}
    # two factors of Lambda_2 give every lambda monomial of degree <= 4 with at most two factors
    assert lams == {(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert all(k.dimension_ok() for k in keys)
