from fractions import Fraction

import pytest

from toricgw.exact_algebra import WeightVector
from toricgw.toric_fan import (
    Fan,
    FanError,
    ToricGraph,
    equivariant_rr_line,
    load_fan,
    projective_space_fan,
    sr_ideal_generators,
    validate_fan,
)


def W(*c):
    return WeightVector(c)


def test_p2_weights_and_classes():
    fan = projective_space_fan(2)
    tg = ToricGraph(fan)
    assert len(tg.vertices) == 3 and len(tg.compact_edges) == 3
    # at the fixed point of the cone {e1, e2} the tangent weights are u1, u2
    ws = sorted(str(w) for w in fan.tangent_weights((1, 2)))
    assert ws == ["u1", "u2"]
    for e in tg.compact_edges:
        assert e.curve_class == (1, 1, 1)
        assert e.normal[-1].a == 2
        assert [n.a for n in e.normal[:-1]] == [1]


def test_conifold_weights_and_degrees(data_dir):
    fan = load_fan(data_dir / "conifold.json")
    tg = ToricGraph(fan)
    assert len(tg.compact_edges) == 1
    e = tg.compact_edges[0]
    assert e.curve_class == (1, -1, -1, 1)
    assert sorted(n.a for n in e.normal[:-1]) == [-1, -1]


def test_conifold_wall_rejected():
    # the completing rays must lie on opposite sides of the shared wall
    fan = Fan(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, -1)], [(0, 1, 2), (1, 2, 3)])
    rep = validate_fan(fan)
    assert not rep.ok


def test_non_smooth_rejected():
    fan = Fan(2, [(1, 0), (1, 2), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    rep = validate_fan(fan)
    assert not rep.ok
    assert any("not smooth" in m for m in rep.messages)


def test_non_primitive_ray():
    rep = validate_fan(Fan(1, [(2,), (-1,)], [(0,), (1,)]))
    assert not rep.ok


def test_unknown_ray():
    with pytest.raises(FanError):
        load_fan({"rank": 1, "rays": [[1], [-1]], "maxCones": [[0], [5]]})


def test_ample_functional_checked():
    rep = validate_fan(Fan(1, [(-1,), (1,)], [(1,), (0,)], ample_functional=[0, 0]))
    assert not rep.ok


def test_projective_witness():
    rep = validate_fan(projective_space_fan(3))
    assert rep.ok and rep.compact and rep.projective_witness == [1, 1, 1, 1]


def test_weights_cancel_on_edges():
    for r in (1, 2, 3):
        tg = ToricGraph(projective_space_fan(r))
        for e in tg.compact_edges:
            s, sp = e.sigmas
            assert tg.weight(e.tau, s) + tg.weight(e.tau, sp) == WeightVector.zero(r)


def test_sr_ideal_p2():
    sr = sr_ideal_generators(projective_space_fan(2))
    assert sr["I"] == ["X1*X2*X3"]
    assert sr["Jprime"] == ["-X1+X2-u1", "-X1+X3-u2"]


def test_sr_ideal_p1xp1(data_dir):
    sr = sr_ideal_generators(load_fan(data_dir / "P1xP1.json"))
    assert sorted(sr["I"]) == ["X1*X3", "X2*X4"]


def test_rr_line_p1():
    u, w = W(1, 0), W(0, 1)
    for a in range(-4, 5):
        terms = equivariant_rr_line(u, w, a)
        assert sum(s for s, _ in terms) == a + 1
    assert [str(x) for _, x in equivariant_rr_line(u, w, 2)] == ["u2", "-u1+u2", "-2*u1+u2"]
    assert [str(x) for _, x in equivariant_rr_line(u, w, -3)] == ["u1+u2", "2*u1+u2"]
    assert equivariant_rr_line(u, w, -1) == []


def test_restrict_divisor_is_dual_basis():
    fan = projective_space_fan(2)
    for sigma in fan.max_cones:
        for rho in range(3):
            w = fan.restrict_divisor(rho, sigma)
            if rho in sigma:
                assert w.pair(fan.rays[rho]) == 1
            else:
                assert w.is_zero()
