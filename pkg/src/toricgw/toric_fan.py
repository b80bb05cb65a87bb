"""Smooth toric varieties from fan data.

Cones are sorted tuples of ray indices.  Maximal cones keep the order of the
input file; facets (codimension-one cones) are sorted.  Weights live in
M tensor Q and are written in the dual basis u1..ur of the standard lattice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exact_algebra import MultiPoly, RationalFunction, WeightVector
from . import lattice

__all__ = [
    "FanError",
    "Fan",
    "ValidationReport",
    "ToricGraph",
    "EdgeData",
    "load_fan",
    "validate_fan",
    "build_toric_graph",
    "equivariant_rr_line",
    "sr_ideal_generators",
    "projective_space_fan",
]


class FanError(ValueError):
    """Invalid or assumption-violating fan data."""


Cone = tuple


@dataclass
class ValidationReport:
    ok: bool
    messages: list = field(default_factory=list)
    compact: bool | None = None
    projective_witness: list | None = None

    def as_dict(self):
        return {
            "ok": self.ok,
            "messages": list(self.messages),
            "compact": self.compact,
            "projectiveWitness": self.projective_witness,
        }


class Fan:
    """Simplicial fan in Z^rank given by rays and maximal cones.

    ``generators`` are the vectors whose dual basis defines weights.  For an
    ordinary fan they are the primitive rays; the stacky module passes the
    images of the b_i instead.
    """

    def __init__(self, rank: int, rays, max_cones, ample_functional=None, generators=None, name=None):
        self.rank = int(rank)
        self.rays = [tuple(int(x) for x in v) for v in rays]
        self.generators = [tuple(int(x) for x in v) for v in (generators if generators is not None else rays)]
        mc = []
        for c in max_cones:
            t = tuple(sorted(int(i) for i in c))
            if t not in mc:
                mc.append(t)
        self.input_cones = mc
        self.ample_functional = None if ample_functional is None else [int(x) for x in ample_functional]
        self.name = name
        self.cones = set()
        for c in mc:
            for k in range(len(c) + 1):
                for f in itertools.combinations(c, k):
                    self.cones.add(f)
        self.max_cones = [c for c in mc if len(c) == self.rank]
        self.facets = sorted(c for c in self.cones if len(c) == self.rank - 1)
        self._dual_cache = {}

    # basic combinatorics
    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def max_cone_index(self, sigma: Cone) -> int:
        return self.max_cones.index(tuple(sorted(sigma)))

    def facet_index(self, tau: Cone) -> int:
        return self.facets.index(tuple(sorted(tau)))

    def max_cones_containing(self, tau: Cone) -> list:
        s = set(tau)
        return [c for c in self.max_cones if s <= set(c)]

    def is_compact_facet(self, tau: Cone) -> bool:
        return len(self.max_cones_containing(tau)) == 2

    def completing_ray(self, tau: Cone, sigma: Cone) -> int:
        (rho,) = set(sigma) - set(tau)
        return rho

    def facets_of(self, sigma: Cone) -> list:
        return [tuple(x for x in sigma if x != rho) for rho in sigma]

    # weights
    def dual_basis(self, sigma: Cone) -> dict:
        """Map ray index -> m in M_Q with <m, gen_rho'> = delta for rays of sigma."""
        sigma = tuple(sorted(sigma))
        hit = self._dual_cache.get(sigma)
        if hit is not None:
            return hit
        cols = [self.generators[i] for i in sigma]
        mat = [[cols[j][i] for j in range(len(sigma))] for i in range(self.rank)]
        if lattice.rank(mat) != len(sigma) or len(sigma) != self.rank:
            raise FanError(f"cone {sigma} is not a full-dimensional simplicial cone")
        inv = lattice.rational_inverse(mat)
        out = {rho: WeightVector(inv[k]) for k, rho in enumerate(sigma)}
        self._dual_cache[sigma] = out
        return out

    def flag_weight(self, tau: Cone, sigma: Cone) -> WeightVector:
        """w(tau, sigma): zero on rays of tau, one on the completing ray."""
        tau = tuple(sorted(tau))
        sigma = tuple(sorted(sigma))
        if not set(tau) < set(sigma) or len(tau) != self.rank - 1:
            raise FanError(f"({tau}, {sigma}) is not a flag")
        return self.dual_basis(sigma)[self.completing_ray(tau, sigma)]

    def restrict_divisor(self, rho: int, sigma: Cone) -> WeightVector:
        """c_1^T(O(D_rho)) at p_sigma; zero when rho is not a ray of sigma."""
        if rho not in sigma:
            return WeightVector.zero(self.rank)
        return self.dual_basis(sigma)[rho]

    def tangent_weights(self, sigma: Cone) -> list:
        sigma = tuple(sorted(sigma))
        return [self.flag_weight(tau, sigma) for tau in self.facets_of(sigma)]

    def vertex_weight(self, sigma: Cone) -> RationalFunction:
        out = RationalFunction.one(self.rank)
        for w in self.tangent_weights(sigma):
            out = out * w.to_rf()
        return out

    # serialization
    def to_json(self) -> dict:
        d = {"schemaVersion": 1, "rank": self.rank, "rays": [list(v) for v in self.rays],
             "maxCones": [list(c) for c in self.input_cones]}
        if self.ample_functional is not None:
            d["ampleFunctional"] = list(self.ample_functional)
        return d

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={self.rays}, maxCones={self.max_cones})"


def _check_fan_structure(fan: Fan) -> list:
    """Local fan checks: simplicial cones and walls separating their two cones."""
    problems = []
    for c in fan.input_cones:
        if len(c) > fan.rank:
            problems.append(f"cone {list(c)} has more rays than the rank")
            continue
        mat = [[fan.generators[j][i] for j in c] for i in range(fan.rank)]
        if lattice.rank(mat) != len(c):
            problems.append(f"cone {list(c)} is not simplicial")
    if problems:
        return problems
    for tau in fan.facets:
        around = fan.max_cones_containing(tau)
        if len(around) > 2:
            problems.append(f"facet {list(tau)} lies in {len(around)} maximal cones")
        elif len(around) == 2:
            s1, s2 = around
            if s1 == s2:
                problems.append(f"facet {list(tau)} has the same maximal cone on both sides")
                continue
            m = fan.flag_weight(tau, s1)
            other = fan.completing_ray(tau, s2)
            if m.pair(fan.generators[other]) >= 0:
                problems.append(
                    f"facet {list(tau)}: rays {fan.completing_ray(tau, s1)} and {other} lie on the same side, "
                    f"so {list(s1)} and {list(s2)} overlap"
                )
    return problems


def validate_fan(fan: Fan, require_smooth: bool = True) -> ValidationReport:
    msgs = []
    if fan.rank < 1:
        return ValidationReport(False, ["rank must be positive"])
    for i, v in enumerate(fan.rays):
        if len(v) != fan.rank:
            msgs.append(f"ray {i} has length {len(v)}, expected {fan.rank}")
        elif not any(v):
            msgs.append(f"ray {i} is zero")
        elif not lattice.is_primitive(v):
            msgs.append(f"ray {i} = {list(v)} is not primitive")
    for c in fan.input_cones:
        for i in c:
            if not 0 <= i < fan.n_rays:
                msgs.append(f"cone {list(c)} refers to unknown ray {i}")
    if msgs:
        return ValidationReport(False, msgs)
    msgs += _check_fan_structure(fan)
    if msgs:
        return ValidationReport(False, msgs)
    if not fan.max_cones:
        return ValidationReport(False, ["fan has no full-dimensional cone, so the torus action has no fixed point"])
    if require_smooth:
        for c in fan.max_cones:
            d = lattice.det([[fan.rays[j][i] for j in c] for i in range(fan.rank)])
            if abs(d) != 1:
                msgs.append(f"cone {list(c)} is not smooth: |det| = {abs(d)}")
    for tau in fan.facets:
        if not fan.max_cones_containing(tau):
            msgs.append(f"facet {list(tau)} lies in no maximal cone")
    used = set(itertools.chain.from_iterable(fan.input_cones))
    for i in range(fan.n_rays):
        if i not in used:
            msgs.append(f"ray {i} belongs to no cone")
    if msgs:
        return ValidationReport(False, msgs)
    compact = all(fan.is_compact_facet(t) for t in fan.facets)
    report = ValidationReport(True, ["valid"], compact=compact)
    if fan.ample_functional is not None:
        lam = fan.ample_functional
        if len(lam) != fan.n_rays:
            return ValidationReport(False, [f"ampleFunctional has length {len(lam)}, expected {fan.n_rays}"])
        if any(x < 0 for x in lam):
            return ValidationReport(False, ["ampleFunctional must be nonnegative"])
        g = build_toric_graph(fan)
        for e in g.compact_edges:
            val = sum(Fraction(a) * b for a, b in zip(lam, e.curve_class))
            if val <= 0:
                return ValidationReport(False, [f"ampleFunctional is not positive on the edge {list(e.tau)}"])
        report.projective_witness = list(lam)
    return report


def load_fan(path_or_dict, require_smooth: bool = True) -> Fan:
    if isinstance(path_or_dict, (str, Path)):
        with open(path_or_dict) as fh:
            data = json.load(fh)
        name = Path(path_or_dict).stem
    else:
        data = path_or_dict
        name = data.get("name")
    for key in ("rank", "rays", "maxCones"):
        if key not in data:
            raise FanError(f"fan file is missing '{key}'")
    fan = Fan(data["rank"], data["rays"], data["maxCones"], data.get("ampleFunctional"), name=name)
    rep = validate_fan(fan, require_smooth=require_smooth)
    if not rep.ok:
        raise FanError("; ".join(rep.messages))
    return fan


# toric graph


@dataclass(frozen=True)
class NormalEntry:
    ray: int | None  # ray of tau dropped from tau_i, None for the self-direction
    tau_i: Cone
    tau_i_prime: Cone
    a: Fraction


@dataclass
class EdgeData:
    tau: Cone
    compact: bool
    sigmas: tuple  # (sigma, sigma') or (sigma,)
    normal: list  # list of NormalEntry (compact edges only), self-direction last
    curve_class: tuple  # beta . D_rho per ray (compact edges only)


class ToricGraph:
    """Vertices, edges and flag weights of the toric graph of a fan."""

    def __init__(self, fan: Fan, scale=None):
        # scale(tau, sigma) -> r(tau, sigma); identity for ordinary fans
        self.fan = fan
        self.rank = fan.rank
        self._scale = scale or (lambda tau, sigma: 1)
        self.vertices = list(fan.max_cones)
        self.edges: list[EdgeData] = []
        self.flag_weights = {}
        for sigma in self.vertices:
            for tau in fan.facets_of(sigma):
                self.flag_weights[(tau, sigma)] = fan.flag_weight(tau, sigma)
        for tau in fan.facets:
            around = tuple(fan.max_cones_containing(tau))
            if len(around) == 2:
                self.edges.append(self._compact_edge(tau, around))
            else:
                self.edges.append(EdgeData(tau, False, around, [], ()))
        self._edge_by_tau = {e.tau: e for e in self.edges}
        self.compact_edges = [e for e in self.edges if e.compact]
        self.check_invariants()

    def _compact_edge(self, tau, around) -> EdgeData:
        fan = self.fan
        s, sp = around
        w = fan.flag_weight(tau, s)
        u = w.scale(self._scale(tau, s))
        rho_p = fan.completing_ray(tau, sp)
        normal = []
        for rho in tau:
            tau_i = tuple(x for x in s if x != rho)
            tau_ip = tuple(sorted([x for x in tau if x != rho] + [rho_p]))
            diff = fan.flag_weight(tau_i, s) - fan.flag_weight(tau_ip, sp)
            a = _proportionality(diff, u)
            if a is None:
                raise FanError(f"edge {list(tau)}: no normal degree for ray {rho}")
            normal.append(NormalEntry(rho, tau_i, tau_ip, a))
        a_self = _proportionality(w - fan.flag_weight(tau, sp), u)
        normal.append(NormalEntry(None, tau, tau, a_self))
        cls = []
        for rho in range(fan.n_rays):
            diff = fan.restrict_divisor(rho, s) - fan.restrict_divisor(rho, sp)
            c = _proportionality(diff, u)
            if c is None:
                raise FanError(f"edge {list(tau)}: divisor {rho} has no degree")
            cls.append(c)
        return EdgeData(tau, True, (s, sp), normal, tuple(cls))

    def edge(self, tau) -> EdgeData:
        return self._edge_by_tau[tuple(sorted(tau))]

    def other_end(self, tau, sigma):
        e = self.edge(tau)
        a, b = e.sigmas
        return b if sigma == a else a

    def weight(self, tau, sigma) -> WeightVector:
        return self.flag_weights[(tuple(sorted(tau)), tuple(sorted(sigma)))]

    def curve_class(self, tau) -> tuple:
        return self.edge(tau).curve_class

    def check_invariants(self):
        fan = self.fan
        for sigma in self.vertices:
            ws = [self.weight(t, sigma) for t in fan.facets_of(sigma)]
            d = lattice.det([list(w.coeffs) for w in ws])
            if d == 0:
                raise FanError(f"tangent weights at {sigma} are dependent")
        for e in self.compact_edges:
            s, sp = e.sigmas
            lhs = self.weight(e.tau, s).scale(self._scale(e.tau, s))
            rhs = self.weight(e.tau, sp).scale(self._scale(e.tau, sp))
            if lhs + rhs != WeightVector.zero(self.rank):
                raise FanError(f"edge {e.tau}: opposite weights do not cancel")
            if e.normal[-1].a != 2 and self._scale(e.tau, s) == self._scale(e.tau, sp) == 1:
                raise FanError(f"edge {e.tau}: self-degree is {e.normal[-1].a}, expected 2")
            rel = [sum(c * Fraction(g[i]) for c, g in zip(e.curve_class, fan.generators)) for i in range(fan.rank)]
            if any(rel):
                raise FanError(f"edge {e.tau}: curve class fails the lattice relation")

    def to_json(self) -> dict:
        return {
            "schemaVersion": 1,
            "vertices": [list(s) for s in self.vertices],
            "edges": [
                {
                    "tau": list(e.tau),
                    "compact": e.compact,
                    "maxCones": [list(s) for s in e.sigmas],
                    "curveClass": [_fmt(c) for c in e.curve_class] if e.compact else None,
                    "normalDegrees": [
                        {"tau_i": list(n.tau_i), "tau_i_prime": list(n.tau_i_prime), "a": _fmt(n.a)}
                        for n in e.normal
                    ],
                }
                for e in self.edges
            ],
            "flagWeights": [
                {"tau": list(t), "sigma": list(s), "weight": str(w)} for (t, s), w in sorted(self.flag_weights.items())
            ],
        }


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _proportionality(v: WeightVector, u: WeightVector):
    """Scalar c with v = c*u, or None."""
    c = None
    for a, b in zip(v.coeffs, u.coeffs):
        if b == 0:
            if a != 0:
                return None
            continue
        q = a / b
        if c is None:
            c = q
        elif c != q:
            return None
    return c if c is not None else Fraction(0)


def build_toric_graph(fan: Fan) -> ToricGraph:
    return ToricGraph(fan)


# Stanley-Reisner presentation


def sr_ideal_generators(fan: Fan) -> dict:
    """Generators of I, J, I', J' as strings in X1..Xs and u1..ur."""
    s = fan.n_rays
    faces = fan.cones
    minimal = []
    for k in range(1, fan.rank + 2):
        for sub in itertools.combinations(range(s), k):
            if sub in faces:
                continue
            if all(f in faces for f in itertools.combinations(sub, k - 1)):
                minimal.append(sub)
    mono = ["*".join(f"X{i + 1}" for i in sub) for sub in minimal]
    J, Jp = [], []
    for i in range(fan.rank):
        terms = []
        for a in range(s):
            c = fan.rays[a][i]
            if c:
                terms.append((c, f"X{a + 1}"))
        lin = _linear_str(terms)
        J.append(lin)
        Jp.append(_linear_str(terms + [(-1, f"u{i + 1}")]))
    return {"I": mono, "J": J, "Iprime": list(mono), "Jprime": Jp, "minimalNonFaces": [list(m) for m in minimal]}


def _linear_str(terms) -> str:
    out = ""
    for c, name in terms:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        body = name if abs(c) == 1 else f"{abs(c)}*{name}"
        out += (("-" if sign == "-" else "") + body) if not out else sign + body
    return out or "0"


# Riemann-Roch on P^1


def equivariant_rr_line(u: WeightVector, w: WeightVector, a: int) -> list:
    """Character of H^0 - H^1 of the degree-a line on P^1 as (sign, exponent) pairs.

    u is the tangent weight at 0 and w the weight of the fiber there.
    """
    if u.is_zero():
        raise ValueError("tangent weight must be nonzero")
    if a >= 0:
        return [(1, w - u.scale(i)) for i in range(a + 1)]
    return [(-1, w + u.scale(i)) for i in range(1, -a)]


def projective_space_fan(r: int) -> Fan:
    rays = [tuple(-1 for _ in range(r))] + [tuple(1 if j == i else 0 for j in range(r)) for i in range(r)]
    cones = [tuple(j for j in range(r + 1) if j != i) for i in range(r + 1)]
    return Fan(r, rays, cones, ample_functional=[1] * (r + 1), name=f"P{r}")
