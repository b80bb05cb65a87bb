from fractions import Fraction

from hypothesis import given, settings, strategies as st

from toricgw import lattice


def test_snf_known():
    d, u, v = lattice.smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert [d[i][i] for i in range(3)] == [2, 6, 12]
    assert lattice.matmul(lattice.matmul(u, [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]), v) == d


mats = st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=4)


@settings(max_examples=80, deadline=None)
@given(mats)
def test_snf_properties(a):
    d, u, v = lattice.smith_normal_form(a)
    assert lattice.matmul(lattice.matmul(u, a), v) == d
    assert abs(lattice.det(u)) == 1 and abs(lattice.det(v)) == 1
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    nz = [x for x in diag if x]
    assert all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    for i, row in enumerate(d):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0


def test_finite_group_orders():
    # Z^2 / <(2,0),(0,3)> = Z/6
    g = lattice.FiniteAbelianGroup(2, [[2, 0], [0, 3]])
    assert g.is_finite and g.order() == 6
    assert g.invariant_factors == (6,) or list(g.invariant_factors) == [6]
    assert len(list(g.torsion_representatives())) == 6
    assert g.element_order([1, 1]) == 6
    assert g.is_zero([2, 3])
    assert not g.is_zero([1, 0])


def test_group_with_free_part():
    g = lattice.FiniteAbelianGroup(2, [[2, 0]])
    assert not g.is_finite
    assert g.free_rank == 1
    assert g.torsion_order() == 2


def test_rational_inverse():
    inv = lattice.rational_inverse([[2, 1], [1, 1]])
    assert inv == [[1, -1], [-1, 2]]
    assert lattice.det([[1, 2], [3, 4]]) == Fraction(-2)
