"""Toric Deligne-Mumford stacks from stacky fans, and their graph sum.

N is Z^r + (torsion Z/a_1 + ... + Z/a_l); an element is an integer vector of
length r + l whose last l entries are read modulo a_j.  Group elements of a
local group G_sigma = N/N_sigma are carried as lattice representatives and
reduced with Smith normal form when a canonical label is needed.

The twisted graph sum follows the manifold one with the orbifold factors:
end twistings, edge factors with floors, flag factors h(e,v), Hurwitz-Hodge
vertex integrals and the prefactor c_Gamma.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, floor, ceil, gcd
from pathlib import Path
from typing import Sequence

from . import lattice
from .exact_algebra import RationalFunction, WeightVector, frac_str, parse_fraction
from .graph_enum import ConfigurationError, DecoratedGraph, classify_vertices, enumerate_graphs, make_graph
from .localization import (
    Insertion,
    GWResult,
    _finish,
    map_contributions,
    restrict_insertion,
)
from .psi_hodge import HodgeKey, HodgeTable, Missing, hodge_integral, psi_integral, _compositions, _stable
from .toric_fan import Fan, FanError, ToricGraph, validate_fan

__all__ = [
    "StackyFan",
    "InertiaComponent",
    "HurwitzHodgeKey",
    "HurwitzHodgeTable",
    "OrbQuery",
    "TwistedGraph",
    "load_stacky_fan",
    "football",
    "weighted_projective",
    "gale_dual",
    "box_and_inertia",
    "orbifold_cohomology_basis",
    "football_rr",
    "twisted_psi_integral",
    "unstable_orb_convention",
    "orb_edge_factor",
    "orb_flag_factor",
    "enumerate_twisted_graphs",
    "orb_graph_contribution",
    "orb_gw_invariant",
    "trivial_stacky_fan",
]


def _frac_part(x: Fraction) -> Fraction:
    return x - floor(x)


class StackyFan:
    def __init__(self, rank: int, torsion, b, max_cones, ample_functional=None, name=None):
        self.rank = int(rank)
        self.torsion = [int(a) for a in torsion]
        if any(a < 1 for a in self.torsion):
            raise FanError("torsion orders must be positive")
        self.dim = self.rank + len(self.torsion)
        for v in b:
            if len(v) != self.dim:
                raise FanError(f"b vector {list(v)} has length {len(v)}, expected {self.dim}")
        self.b = [self._reduce(v) for v in b]
        self.name = name
        bbar = [v[: self.rank] for v in self.b]
        rays = []
        for v in bbar:
            g = 0
            for x in v:
                g = gcd(g, x)
            if g == 0:
                raise FanError("b_i must have nonzero image in N tensor R")
            rays.append(tuple(x // g for x in v))
        self.bbar = bbar
        # the coarse fan is validated without the functional, which is
        # checked below against the curve classes of the stacky graph
        self.fan = Fan(self.rank, rays, max_cones, None, generators=bbar, name=name)
        rep = validate_fan(self.fan, require_smooth=False)
        if not rep.ok:
            raise FanError("; ".join(rep.messages))
        if not self._coker_finite():
            raise FanError("coker(beta) is infinite: the b_i do not span N tensor Q")
        self._groups = {}
        self.graph = ToricGraph(self.fan, scale=self.r)
        if ample_functional is not None:
            lam = list(ample_functional)
            if len(lam) != len(self.b) or any(x < 0 for x in lam):
                raise FanError("ampleFunctional must be nonnegative with one entry per ray")
            for e in self.graph.compact_edges:
                if sum(Fraction(a) * c for a, c in zip(lam, e.curve_class)) <= 0:
                    raise FanError(f"ampleFunctional is not positive on the edge {list(e.tau)}")
            self.fan.ample_functional = lam

    # lattice N
    def _reduce(self, v):
        v = [int(x) for x in v]
        for j, a in enumerate(self.torsion):
            v[self.rank + j] %= a
        return tuple(v)

    def _torsion_relations(self):
        out = []
        for j, a in enumerate(self.torsion):
            e = [0] * self.dim
            e[self.rank + j] = a
            out.append(e)
        return out

    def _coker_finite(self) -> bool:
        grp = lattice.FiniteAbelianGroup(self.dim, self._torsion_relations() + [list(v) for v in self.b])
        return grp.is_finite

    def group(self, cone) -> lattice.FiniteAbelianGroup:
        """N / N_cone (finite for maximal cones; its torsion is G_cone)."""
        cone = tuple(sorted(cone))
        g = self._groups.get(cone)
        if g is None:
            g = lattice.FiniteAbelianGroup(self.dim, self._torsion_relations() + [list(self.b[i]) for i in cone])
            self._groups[cone] = g
        return g

    def stabilizer_order(self, cone) -> int:
        return self.group(cone).torsion_order()

    def r(self, tau, sigma) -> int:
        q = Fraction(self.stabilizer_order(sigma), self.stabilizer_order(tau))
        if q.denominator != 1:
            raise FanError("|G_tau| does not divide |G_sigma|")
        return int(q)

    def element_label(self, cone, v) -> tuple:
        return self.group(cone).normal_form(v)

    def element_order(self, cone, v) -> int:
        return self.group(cone).element_order(v)

    def pair(self, w: WeightVector, v) -> Fraction:
        return w.pair(v[: self.rank])

    # Box
    def box_coordinates(self, cone, v):
        """q with vbar = sum q_i bbar_i over rays of cone, or None if vbar is outside the span."""
        cone = tuple(sorted(cone))
        vbar = [Fraction(x) for x in v[: self.rank]]
        if not cone:
            return {} if not any(vbar) else None
        cols = [self.bbar[i] for i in cone]
        k = len(cone)
        gram = [[sum(Fraction(cols[i][t]) * cols[j][t] for t in range(self.rank)) for j in range(k)] for i in range(k)]
        rhs = [sum(Fraction(cols[i][t]) * vbar[t] for t in range(self.rank)) for i in range(k)]
        inv = lattice.rational_inverse(gram)
        q = [sum(inv[i][j] * rhs[j] for j in range(k)) for i in range(k)]
        back = [sum(q[i] * cols[i][t] for i in range(k)) for t in range(self.rank)]
        if back != vbar:
            return None
        return dict(zip(cone, q))

    def box_reduce(self, cone, v):
        """The Box representative of the class of v in the torsion of N/N_cone."""
        q = self.box_coordinates(cone, v)
        if q is None:
            raise ValueError(f"{v} is not torsion modulo the cone {cone}")
        w = list(v)
        for i, qi in q.items():
            f = floor(qi)
            if f:
                w = [x - f * y for x, y in zip(w, self.b[i])]
        return self._reduce(w)

    def to_json(self) -> dict:
        d = {"schemaVersion": 1, "rank": self.rank, "torsion": list(self.torsion), "b": [list(v) for v in self.b],
             "maxCones": [list(c) for c in self.fan.input_cones]}
        if self.fan.ample_functional is not None:
            d["ampleFunctional"] = list(self.fan.ample_functional)
        return d


def load_stacky_fan(path_or_dict) -> StackyFan:
    if isinstance(path_or_dict, (str, Path)):
        with open(path_or_dict) as fh:
            data = json.load(fh)
        name = Path(path_or_dict).stem
    else:
        data = path_or_dict
        name = data.get("name")
    for key in ("rank", "maxCones"):
        if key not in data:
            raise FanError(f"stacky fan file is missing '{key}'")
    b = data.get("b", data.get("rays"))
    if b is None:
        raise FanError("stacky fan file needs 'b' (or 'rays')")
    torsion = data.get("torsion", [])
    b = [list(v) + [0] * (data["rank"] + len(torsion) - len(v)) for v in b]
    return StackyFan(data["rank"], torsion, b, data["maxCones"], data.get("ampleFunctional"), name=name)


def football(s1: int, s2: int) -> StackyFan:
    """C_{s1,s2}: N = Z, b_1 = s1, b_2 = -s2."""
    return StackyFan(1, [], [(s1,), (-s2,)], [(0,), (1,)], [1, 1], name=f"C_{s1}_{s2}")


def weighted_projective(weights: Sequence[int]) -> StackyFan:
    """P[w_0, ..., w_r] with N = Z^{r+1}/Z w (torsion when gcd(w) > 1)."""
    w = [int(x) for x in weights]
    if len(w) < 2 or any(x < 1 for x in w):
        raise ValueError("need at least two positive weights")
    m = len(w)
    grp = lattice.FiniteAbelianGroup(m, [w])
    r = grp.free_rank
    nt = len(grp.torsion_idx)
    b = []
    for i in range(m):
        e = [1 if j == i else 0 for j in range(m)]
        nf = grp.normal_form(e)
        b.append(tuple(nf[nt:]) + tuple(nf[:nt]))
    cones = [tuple(j for j in range(m) if j != i) for i in range(m)]
    return StackyFan(r, list(grp.invariant_factors), b, cones, [1] * m, name="P[" + ",".join(map(str, w)) + "]")


# Gale dual


def gale_dual(sf: StackyFan) -> dict:
    """DG(beta) = coker(B* + Q*) with the images of the dual basis vectors."""
    s = len(sf.b)
    l = len(sf.torsion)
    rels = []
    for c in range(sf.dim):
        vec = [sf.b[i][c] for i in range(s)]
        vec += [sf.torsion[j] if sf.rank + j == c else 0 for j in range(l)]
        rels.append(vec)
    grp = lattice.FiniteAbelianGroup(s + l, rels)
    images = [list(grp.normal_form([1 if j == i else 0 for j in range(s + l)])) for i in range(s)]
    nt = len(grp.torsion_idx)
    # fix the sign of each free coordinate so the first nonzero image is positive
    for k in range(grp.free_rank):
        col = [img[nt + k] for img in images]
        first = next((x for x in col if x), 0)
        if first < 0:
            for img in images:
                img[nt + k] = -img[nt + k]
    return {
        "invariantFactors": list(grp.invariant_factors),
        "freeRank": grp.free_rank,
        "images": images,
        "freeWeights": [img[nt:] for img in images],
    }


# inertia


@dataclass(frozen=True)
class InertiaComponent:
    box_element: tuple
    minimal_cone: tuple
    age: Fraction
    coordinates: tuple  # ((ray, q), ...)

    def to_json(self) -> dict:
        return {"boxElement": list(self.box_element), "minimalCone": list(self.minimal_cone),
                "age": frac_str(self.age), "coordinates": [[i, frac_str(q)] for i, q in self.coordinates]}


def box_and_inertia(sf: StackyFan) -> list:
    seen = {}
    for cone in sorted(sf.fan.cones, key=lambda c: (len(c), c)):
        grp = sf.group(cone)
        for rep in grp.torsion_representatives():
            v = sf.box_reduce(cone, rep)
            if v in seen:
                continue
            q = sf.box_coordinates(cone, v)
            coords = tuple(sorted((i, x) for i, x in q.items() if x))
            minimal = tuple(i for i, _ in coords)
            seen[v] = InertiaComponent(v, minimal, sum((x for _, x in coords), Fraction(0)), coords)
    return sorted(seen.values(), key=lambda c: (c.age, c.box_element))


def involution(sf: StackyFan, comp: InertiaComponent) -> tuple:
    neg = tuple(-x for x in comp.box_element)
    return sf.box_reduce(comp.minimal_cone, neg)


def _quotient_h_vector(sf: StackyFan, cone) -> list:
    s = set(cone)
    d = sf.rank - len(cone)
    f = [0] * (d + 1)
    for c in sf.fan.cones:
        if s <= set(c):
            f[len(c) - len(cone)] += 1
    # sum_k h_k t^k = sum_i f_i t^i (1-t)^(d-i)
    h = [0] * (d + 1)
    for i, fi in enumerate(f):
        for j in range(d - i + 1):
            h[i + j] += fi * (-1) ** j * factorial(d - i) // (factorial(j) * factorial(d - i - j))
    return h


def orbifold_cohomology_basis(sf: StackyFan) -> list:
    """Rows (real degree, box element, dimension) of H^*_orb as a graded module."""
    if not all(sf.fan.is_compact_facet(t) for t in sf.fan.facets):
        raise FanError("graded basis needs a complete fan")
    rows = []
    for comp in box_and_inertia(sf):
        h = _quotient_h_vector(sf, comp.minimal_cone)
        for k, dim in enumerate(h):
            if dim:
                rows.append((2 * k + 2 * comp.age, comp.box_element, dim))
    return sorted(rows, key=lambda r: (r[0], r[1]))


# Riemann-Roch on footballs


def football_rr(s1: int, s2: int, c1: int, c2: int, w1, w2=None, w3=None):
    """Characters of H^0 and H^1 of L = O(c1 p1 + c2 p2) on C_{s1,s2}.

    Returns two lists of exponent weights.  ``w1`` is the tangent parameter,
    ``w3`` the fiber weight at p2; ``w2`` is implied by w3 = w2 + a w1.
    """
    if s1 < 1 or s2 < 1:
        raise ValueError("football orders must be positive")
    a = Fraction(c1, s1) + Fraction(c2, s2)
    eps = _frac_part(Fraction(c2, s2))
    if w3 is None:
        w3 = w2 + w1 * a
    h0, h1 = [], []
    if a >= 0:
        for m in range(0, floor(a - eps) + 1):
            h0.append(w3 - w1 * (m + eps))
    else:
        for m in range(1, ceil(eps - a - 1) + 1):
            h1.append(w3 + w1 * (m - eps))
    return h0, h1


# Hurwitz-Hodge data


@dataclass(frozen=True, order=True)
class HurwitzHodgeKey:
    """Integral over M_{g,c}(BG) of psi-bar classes and twisted lambda classes.

    ``points`` is the sorted tuple of (twist label, psi exponent); ``lam``
    is the sorted tuple of ((character, i), exponent) with character None
    meaning the untwisted Hodge bundle.  Labels are Smith-normal-form
    coordinates of the local group.
    """

    group: tuple
    genus: int
    points: tuple
    lam: tuple

    def degree(self) -> int:
        return sum(a for _, a in self.points) + sum(i * e for (_, i), e in self.lam)

    def dimension(self) -> int:
        return 3 * self.genus - 3 + len(self.points)

    def dimension_ok(self) -> bool:
        return self.degree() == self.dimension()

    def __str__(self):
        pts = ",".join(f"{'/'.join(map(str, c)) or 'e'}:{a}" for c, a in self.points)
        lam = ",".join(
            f"l{i}[{'triv' if ch is None else '/'.join(frac_str(x) for x in ch)}]^{e}" for (ch, i), e in self.lam
        )
        return f"G={'x'.join(map(str, self.group)) or '1'};g={self.genus};points=({pts});lambda=({lam})"

    def to_json(self) -> dict:
        return {
            "group": list(self.group),
            "genus": self.genus,
            "points": [{"twist": list(c), "psi": a} for c, a in self.points],
            "lambda": [
                {"character": None if ch is None else [frac_str(x) for x in ch], "index": i, "exponent": e}
                for (ch, i), e in self.lam
            ],
        }

    @classmethod
    def from_json(cls, rec) -> "HurwitzHodgeKey":
        pts = tuple(sorted((tuple(p["twist"]), int(p["psi"])) for p in rec["points"]))
        lam = []
        for x in rec.get("lambda", []):
            ch = None if x["character"] is None else tuple(parse_fraction(y) for y in x["character"])
            lam.append(((ch, int(x["index"])), int(x["exponent"])))
        return cls(tuple(rec["group"]), int(rec["genus"]), pts, tuple(sorted(lam, key=repr)))


class HurwitzHodgeTable:
    def __init__(self):
        self.entries = {}
        self.notes = {}

    def set(self, key: HurwitzHodgeKey, value, note=""):
        self.entries[key] = Fraction(value)
        self.notes[key] = note

    def get(self, key):
        return self.entries.get(key)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def load(cls, path) -> "HurwitzHodgeTable":
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = data.get("entries", [])
        t = cls()
        for rec in data:
            if "group" not in rec:
                continue
            t.set(HurwitzHodgeKey.from_json(rec), parse_fraction(rec["value"]), rec.get("note", ""))
        return t


def twisted_psi_integral(group_order: int, twists_sum_trivial: bool, genus: int, exponents) -> Fraction:
    """Jarvis-Kimura: |G|^(2g-1) times the psi-integral when prod c_j = 1."""
    if not _stable(genus, len(exponents)):
        raise ValueError("unstable moduli")
    if not twists_sum_trivial:
        return Fraction(0)
    return Fraction(group_order) ** (2 * genus - 1) * psi_integral(genus, exponents)


def cyclic_twisted_psi_integral(m: int, genus: int, twists: Sequence[int], exponents) -> Fraction:
    """twisted_psi_integral for G = Z/m with twists given as residues."""
    return twisted_psi_integral(m, sum(twists) % m == 0, genus, exponents)


def unstable_orb_convention(kind: str, group_order: int, w1, w2=None, a: int = 0) -> RationalFunction:
    w1 = w1.to_rf() if isinstance(w1, WeightVector) else w1
    if kind == "val1":
        return w1 / group_order
    if kind == "val2":
        w2 = w2.to_rf() if isinstance(w2, WeightVector) else w2
        return (w1 + w2).inverse() / group_order
    if kind == "marked1":
        if a < 0:
            raise ValueError("descendant power must be nonnegative")
        return (-w1) ** a / group_order
    raise ValueError(f"unknown unstable vertex kind {kind!r}")


# twisted graphs


@dataclass
class OrbQuery:
    genus: int
    beta: tuple
    insertions: list = field(default_factory=list)
    sectors: list = field(default_factory=list)  # Box elements, one per insertion
    mode: str = "equivariant"
    weighted: bool = False  # multiply by the orders of the marking sectors

    @property
    def n(self) -> int:
        return len(self.insertions)


@dataclass(frozen=True)
class TwistedGraph:
    graph: DecoratedGraph  # edges carry twist = (n_u, n_v) lattice representatives
    labels: tuple  # per edge: (label at u, label at v)

    @property
    def aut(self) -> int:
        return self.graph.aut


def _solve_unit(c: Sequence[int]) -> list:
    """Integer x with c . x = 1 (c primitive)."""
    c = [int(x) for x in c]
    n = len(c)
    x = [0] * n
    g, coeffs = 0, [0] * n
    for i, ci in enumerate(c):
        if ci == 0:
            continue
        if g == 0:
            g, coeffs = abs(ci), [0] * n
            coeffs[i] = 1 if ci > 0 else -1
            continue
        # extended gcd of (g, ci)
        a0, b0 = g, ci
        s0, s1, t0, t1 = 1, 0, 0, 1
        while b0:
            q = a0 // b0
            a0, b0 = b0, a0 - q * b0
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if a0 < 0:
            a0, s0, t0 = -a0, -s0, -t0
        coeffs = [s0 * y for y in coeffs]
        coeffs[i] += t0
        g = a0
    if g != 1:
        raise ValueError(f"{c} is not primitive")
    x = coeffs
    assert sum(a * b for a, b in zip(c, x)) == 1
    return x


def edge_twist_options(sf: StackyFan, tau, d: int) -> list:
    """Lattice representatives n (one per element of G_tau) with <w(tau,sigma), n> = d/r(tau,sigma)."""
    tg = sf.graph
    e = tg.edge(tau)
    s = e.sigmas[0]
    w = tg.weight(tau, s)
    r = sf.r(tau, s)
    c = [x * r for x in w.coeffs]
    if any(Fraction(x).denominator != 1 for x in c):
        raise FanError("r(tau,sigma) w(tau,sigma) is not integral")
    x = _solve_unit([int(v) for v in c])
    n0 = [d * xi for xi in x] + [0] * len(sf.torsion)
    out = []
    for t in sf.group(tau).torsion_representatives():
        out.append(sf._reduce([a + b for a, b in zip(n0, t)]))
    return out


def _vertex_twists(graph: DecoratedGraph, k: int):
    """(lattice element at u, at v) for edge k."""
    return graph.edges[k][4]


def enumerate_twisted_graphs(sf: StackyFan, g: int, sectors: Sequence, beta: Sequence, insertions=None):
    """Twisted decorated graphs for marking sectors ``sectors`` (Box elements)."""
    tg = sf.graph
    boxes = {c.box_element: c for c in box_and_inertia(sf)}
    secs = [sf._reduce(v) for v in sectors]
    for v in secs:
        if v not in boxes:
            raise ConfigurationError(f"sector {list(v)} is not a Box element")
    n = len(secs)
    filt = []
    for i, v in enumerate(secs):
        cone = set(boxes[v].minimal_cone)
        allowed = {s for s in tg.vertices if cone <= set(s)}
        if insertions is not None:
            allowed = {s for s in allowed if not restrict_insertion(tg, insertions[i], s).is_zero()}
        filt.append(allowed)
    seen = set()
    for base in enumerate_graphs(tg, g, n, beta, lam=sf.fan.ample_functional, marking_filter=filt):
        options = [edge_twist_options(sf, e[0], e[1]) for e in base.edges]
        for choice in itertools.product(*options):
            edges = []
            for e, nvec in zip(base.edges, choice):
                neg = sf._reduce([-x for x in nvec])
                su = base.vertices[e[2]][0]
                sv = base.vertices[e[3]][0]
                lab = (sf.element_label(su, nvec), sf.element_label(sv, neg))
                edges.append((e[0], e[1], e[2], e[3], lab))
            if not _vertex_condition(sf, base, edges, choice, secs):
                continue
            gr = make_graph(base.vertices, edges)
            if gr.key() in seen:
                continue
            seen.add(gr.key())
            yield gr


def _vertex_condition(sf, base, edges, choice, secs) -> bool:
    nv = len(base.vertices)
    acc = [[0] * sf.dim for _ in range(nv)]
    for e, nvec in zip(edges, choice):
        neg = [-x for x in nvec]
        # flags contribute k^{-1}
        acc[e[2]] = [a - b for a, b in zip(acc[e[2]], nvec)]
        acc[e[3]] = [a - b for a, b in zip(acc[e[3]], neg)]
    for i, (s, _, marks) in enumerate(base.vertices):
        for m in marks:
            acc[i] = [a + b for a, b in zip(acc[i], secs[m])]
        if not sf.group(s).is_zero(acc[i]):
            return False
    return True


def _label_vector(sf: StackyFan, sigma, label) -> tuple:
    """Lattice representative of a normal-form label of G_sigma."""
    grp = sf.group(sigma)
    for rep in grp.torsion_representatives():
        if grp.normal_form(rep) == label:
            return tuple(rep)
    raise ValueError("label not in group")


def _flag_data(sf: StackyFan, graph: DecoratedGraph, k: int, end: int):
    """(sigma, tau, d, lattice rep of k_(e,v), order r_(e,v)) for a flag."""
    tau, d, u, v, lab = graph.edges[k]
    vert = u if end == 0 else v
    sigma = graph.vertices[vert][0]
    rep = _label_vector(sf, sigma, lab[end])
    return sigma, tau, d, rep, sf.element_order(sigma, rep)


def orb_flag_factor(sf: StackyFan, sigma, rep) -> RationalFunction:
    """Product of w(tau, sigma) over tangent directions fixed by <k>."""
    out = RationalFunction.one(sf.rank)
    for tau in sf.fan.facets_of(sigma):
        w = sf.graph.weight(tau, sigma)
        if _frac_part(sf.pair(w, rep)) == 0:
            out = out * w.to_rf()
    return out


def orb_edge_factor(sf: StackyFan, tau, d: int, rep_u) -> RationalFunction:
    """h(e) for an edge of degree d whose twist at the first end is rep_u."""
    tg = sf.graph
    e = tg.edge(tau)
    s, sp = e.sigmas
    r, rp = sf.r(tau, s), sf.r(tau, sp)
    u = tg.weight(tau, s).scale(r).to_rf()
    nv = sf.rank
    q, qp = d // r, d // rp
    out = (RationalFunction.constant(nv, d) / u) ** q / factorial(q)
    out = out * (RationalFunction.constant(nv, -d) / u) ** qp / factorial(qp)
    for ent in e.normal[:-1]:
        wi = tg.weight(ent.tau_i, s).to_rf()
        eps = _frac_part(sf.pair(tg.weight(ent.tau_i, s), rep_u))
        da = d * ent.a
        if ent.a >= 0:
            top = floor(da - eps)
            prod = RationalFunction.one(nv)
            for j in range(0, top + 1):
                prod = prod * (wi - u * ((j + eps) / d))
            out = out / prod
        else:
            top = ceil(eps - da - 1)
            for j in range(1, top + 1):
                out = out * (wi + u * ((j - eps) / d))
    return out


def _character_key(sf: StackyFan, sigma, w: WeightVector) -> tuple:
    grp = sf.group(sigma)
    return tuple(_frac_part(sf.pair(w, gvec)) for gvec in grp.torsion_generators())


def _orb_vertex(sf: StackyFan, graph: DecoratedGraph, info, query: OrbQuery, tables):
    """h(v) times the vertex integral, for a stable vertex."""
    hodge, hh = tables
    sigma, gv, _ = graph.vertices[info.index]
    grp = sf.group(sigma)
    G = grp.order()
    nv = sf.rank
    points = []  # (lattice twist c, psi exponent)
    flag_vars = []
    for k, end in info.edges:
        _, tau, d, rep, order = _flag_data(sf, graph, k, end)
        w = sf.graph.weight(tau, sigma).scale(sf.r(tau, sigma))
        flag_vars.append((w.scale(Fraction(1, order * d)).to_rf(), order))
        points.append((tuple(-x for x in rep), None))
    for m in info.markings:
        points.append((query.sectors[m], query.insertions[m].a))
    n = len(points)
    dim = 3 * gv - 3 + n
    # Lambda^dual factors per tangent direction
    factors = []
    denom = RationalFunction.one(nv)
    for tau in sf.fan.facets_of(sigma):
        w = sf.graph.weight(tau, sigma)
        ages = [_frac_part(sf.pair(w, c)) for c, _ in points]
        if all(a == 0 for a in ages):
            rank, ch = gv, None
            denom = denom * w.to_rf()
        else:
            tot = sum(ages, Fraction(0))
            if tot.denominator != 1:
                raise FanError("ages of a character do not sum to an integer")
            rank, ch = gv - 1 + int(tot), _character_key(sf, sigma, w)
        factors.append((w.to_rf(), rank, ch))
    lam = {(): RationalFunction.one(nv)}
    for wr, rank, ch in factors:
        new = {}
        for mono, coef in lam.items():
            for i in range(rank + 1):
                m = dict(mono)
                if i:
                    m[(ch, i)] = m.get((ch, i), 0) + 1
                key = tuple(sorted(m.items(), key=repr))
                if sum(j * e for (_, j), e in key) > dim:
                    continue
                term = coef * wr ** (rank - i)
                if i % 2:
                    term = -term
                new[key] = new[key] + term if key in new else term
        lam = {k: v for k, v in new.items() if not v.is_zero()}
    labels = [sf.element_label(sigma, c) for c, _ in points]
    fixed_a = [a for _, a in points if a is not None]
    missing = set()
    total = RationalFunction.zero(nv)
    for mono, coef in sorted(lam.items(), key=lambda kv: repr(kv[0])):
        ldeg = sum(j * e for (_, j), e in mono)
        rem = dim - ldeg - sum(fixed_a)
        if rem < 0:
            continue
        acc = RationalFunction.zero(nv)
        for ks in _compositions(rem, len(flag_vars)):
            exps = list(ks) + fixed_a
            twisted = any(ch is not None for (ch, _), _ in mono)
            if not twisted:
                plain = [0] * gv
                for (_, j), e in mono:
                    plain[j - 1] += e
                val = hodge_integral(HodgeKey.make(gv, exps, plain), hodge)
                if isinstance(val, Missing):
                    missing |= val.keys
                    continue
                val = val * Fraction(G) ** (2 * gv - 1)
            else:
                key = HurwitzHodgeKey(grp.invariant_factors, gv, tuple(sorted(zip(labels, exps))), mono)
                val = hh.get(key) if hh is not None else None
                if val is None:
                    missing.add(key)
                    continue
            if val == 0:
                continue
            term = RationalFunction.constant(nv, val)
            for (fv, order), kexp in zip(flag_vars, ks):
                term = term / (fv ** (kexp + 1) * Fraction(order) ** kexp)
            acc = acc + term
        if not acc.is_zero():
            total = total + coef * acc
    if missing:
        return Missing(missing)
    return total / denom


def orb_graph_contribution(graph: DecoratedGraph, query: OrbQuery, sf: StackyFan, tables=(None, None)):
    nv = sf.rank
    tg = sf.graph
    pref = Fraction(1, graph.aut)
    for tau, d, _, _, _ in graph.edges:
        pref /= d * sf.stabilizer_order(tau)
    total = RationalFunction.one(nv)
    for k, (tau, d, u, v, lab) in enumerate(graph.edges):
        rep_u = _label_vector(sf, graph.vertices[u][0], lab[0])
        total = total * orb_edge_factor(sf, tau, d, rep_u)
    missing = None
    for info in classify_vertices(graph):
        sigma = graph.vertices[info.index][0]
        G = sf.stabilizer_order(sigma)
        for m in info.markings:
            r = restrict_insertion(tg, query.insertions[m], sigma)
            if r.is_zero():
                return RationalFunction.zero(nv)
            total = total * r
            if query.weighted:
                pref *= sf.element_order(sigma, query.sectors[m])
        flags = [_flag_data(sf, graph, k, end) for k, end in info.edges]
        for _, tau, d, rep, order in flags:
            pref *= Fraction(G, order)
        if info.kind == "VS":
            hf = RationalFunction.one(nv)
            for s_, tau, d, rep, order in flags:
                hf = hf * orb_flag_factor(sf, sigma, rep)
            val = _orb_vertex(sf, graph, info, query, tables)
            if isinstance(val, Missing):
                missing = val if missing is None else missing.merge(val)
                continue
            total = total * hf * val
            continue
        # unstable: h(v) = 1/h(e,v) cancels one flag factor
        for _, tau, d, rep, order in flags[1:]:
            total = total * orb_flag_factor(sf, sigma, rep)
        fvs = []
        for _, tau, d, rep, order in flags:
            w = tg.weight(tau, sigma).scale(Fraction(sf.r(tau, sigma), order * d))
            fvs.append(w.to_rf())
        # the conventions are stated for w - psi; 1/(w - psi/r) = r/(r*w - psi) per flag
        rv = flags[0][4]
        if info.kind == "V1":
            total = total * unstable_orb_convention("val1", G, fvs[0])
        elif info.kind == "V2":
            total = total * unstable_orb_convention("val2", G, fvs[0] * rv, fvs[1] * rv) * rv * rv
        else:
            a = query.insertions[info.markings[0]].a
            total = total * unstable_orb_convention("marked1", G, fvs[0] * rv, a=a) * rv
    if missing is not None:
        return missing
    return total * pref


def orb_virtual_dimension(sf: StackyFan, g: int, beta, sectors) -> Fraction:
    ages = {c.box_element: c.age for c in box_and_inertia(sf)}
    c1 = sum(Fraction(b) for b in beta)
    return c1 + (sf.rank - 3) * (1 - g) + len(sectors) - sum(ages[sf._reduce(v)] for v in sectors)


def orb_gw_invariant(query: OrbQuery, sf: StackyFan, hodge: HodgeTable | None = None,
                     hh: HurwitzHodgeTable | None = None, jobs: int = 1) -> GWResult:
    if query.mode not in ("equivariant", "nonequivariantCheck"):
        raise ConfigurationError(f"unknown mode {query.mode!r}")
    sectors = list(query.sectors) or [tuple([0] * sf.dim)] * query.n
    if len(sectors) != query.n:
        raise ConfigurationError("one sector per insertion is required")
    q = OrbQuery(query.genus, tuple(query.beta), list(query.insertions), [sf._reduce(s) for s in sectors],
                 query.mode, query.weighted)
    graphs = list(enumerate_twisted_graphs(sf, q.genus, q.sectors, q.beta, q.insertions))
    vals = map_contributions(orb_graph_contribution, graphs, (q, sf, (hodge, hh)), jobs)
    return _finish(vals, sf.rank, len(graphs), q.mode)


def trivial_stacky_fan(fan: Fan) -> StackyFan:
    """The stacky fan of a smooth fan with b_i the primitive rays."""
    return StackyFan(fan.rank, [], fan.rays, fan.input_cones, fan.ample_functional, name=fan.name)
