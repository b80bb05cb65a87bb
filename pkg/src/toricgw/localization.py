"""Graph-sum evaluation of equivariant Gromov-Witten invariants.

A graph contributes

    1/|A_Gamma| * prod_e h(tau_e, d_e)
                * prod_v w(sigma_v)^(val-1) * prod_{i in S_v} i*gamma_i
                * vertex_integral(v)

with flag variables w(tau_e, sigma_v)/d_e.  For a noncompact target the same
sum is the definition of the (residue) invariant.
"""

from __future__ import annotations

import multiprocessing as mp
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

from .exact_algebra import RationalFunction, WeightVector
from .graph_enum import DecoratedGraph, classify_vertices, enumerate_graphs, ConfigurationError
from .psi_hodge import HodgeTable, Missing, VertexSpec, vertex_integral, required_integrals
from .toric_fan import ToricGraph

__all__ = [
    "Insertion",
    "InvariantQuery",
    "GWResult",
    "NonEquivariantCheckError",
    "parse_divisor_poly",
    "b_factor",
    "edge_factor",
    "vertex_weight",
    "restrict_insertion",
    "graph_contribution",
    "gw_invariant",
    "virtual_dimension",
    "genus_series",
    "tree_sum",
    "graph_vertex_specs",
]


class NonEquivariantCheckError(ArithmeticError):
    """The summed invariant is not a constant."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


_MONO = re.compile(r"^D(\d+)(?:\^(\d+))?$")


def parse_divisor_poly(s: str, n_rays: int) -> dict:
    """Parse e.g. ``"D1*D2 + 2*D3^2 - 1/2"`` into {exponent tuple: coefficient}.

    Divisors are numbered from 1 in ray order.
    """
    s = s.replace(" ", "")
    if not s:
        raise ValueError("empty insertion")
    out: dict = {}
    for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
        coef = Fraction(-1 if sign == "-" else 1)
        exps = [0] * n_rays
        for factor in body.split("*"):
            m = _MONO.match(factor)
            if m:
                idx = int(m.group(1)) - 1
                if not 0 <= idx < n_rays:
                    raise ValueError(f"divisor D{idx + 1} out of range (fan has {n_rays} rays)")
                exps[idx] += int(m.group(2) or 1)
            else:
                coef *= Fraction(factor)
        key = tuple(exps)
        out[key] = out.get(key, Fraction(0)) + coef
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class Insertion:
    """tau_a(gamma) with gamma a polynomial in the equivariant divisor classes."""

    poly: tuple  # sorted ((exponents, coefficient), ...)
    a: int = 0

    @classmethod
    def from_string(cls, s: str, n_rays: int, a: int = 0) -> "Insertion":
        if a < 0:
            raise ValueError("descendant power must be nonnegative")
        return cls(tuple(sorted(parse_divisor_poly(s, n_rays).items())), a)

    @classmethod
    def from_dict(cls, d: dict, a: int = 0) -> "Insertion":
        return cls(tuple(sorted((tuple(k), Fraction(v)) for k, v in d.items() if v)), a)

    def degree(self) -> int | None:
        degs = {sum(k) for k, _ in self.poly}
        if len(degs) != 1:
            return None
        return degs.pop()

    def __str__(self):
        parts = []
        for exps, c in self.poly:
            mono = "*".join(f"D{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e)
            parts.append((str(c) if c != 1 or not mono else "") + ("*" if c != 1 and mono else "") + mono)
        body = "+".join(parts).replace("+-", "-") or "0"
        return f"tau_{self.a}({body})" if self.a else body


@dataclass
class InvariantQuery:
    genus: int
    beta: tuple
    insertions: list = field(default_factory=list)
    mode: str = "equivariant"  # or "nonequivariantCheck"

    @property
    def n(self) -> int:
        return len(self.insertions)


@dataclass
class GWResult:
    value: RationalFunction | None
    missing: Missing | None
    graph_count: int
    constant: Fraction | None = None

    @property
    def is_missing(self) -> bool:
        return self.missing is not None


def virtual_dimension(fan, g: int, beta: Sequence, n: int) -> Fraction:
    c1 = sum(Fraction(b) for b in beta)
    return c1 + (fan.rank - 3) * (1 - g) + n


def b_factor(u: RationalFunction, w: RationalFunction, a) -> RationalFunction:
    """b(u, w, a) for integral a."""
    a = Fraction(a)
    if a.denominator != 1:
        raise ValueError("b-factor needs an integer degree")
    a = int(a)
    out = RationalFunction.one(u.nvars)
    if a >= 0:
        for j in range(a + 1):
            out = out * (w - u * j)
        return out.inverse()
    for j in range(1, -a):
        out = out * (w + u * j)
    return out


def edge_factor(tg: ToricGraph, tau, d: int, end: int = 0) -> RationalFunction:
    """h(tau, d) computed from the maximal cone ``tg.edge(tau).sigmas[end]``."""
    e = tg.edge(tau)
    if not e.compact:
        raise ValueError("edge factor of a noncompact edge")
    s, sp = e.sigmas if end == 0 else e.sigmas[::-1]
    w = tg.weight(e.tau, s)
    wr = w.to_rf()
    out = RationalFunction.constant(tg.rank, Fraction((-1) ** d * d ** (2 * d), factorial(d) ** 2)) / wr ** (2 * d)
    u = wr / d
    for ent in e.normal[:-1]:
        tau_i = ent.tau_i if end == 0 else ent.tau_i_prime
        wi = tg.weight(tau_i, s).to_rf()
        out = out * b_factor(u, wi, d * ent.a)
    return out


def vertex_weight(tg: ToricGraph, sigma) -> RationalFunction:
    return tg.fan.vertex_weight(sigma)


def restrict_insertion(tg: ToricGraph, ins: Insertion, sigma) -> RationalFunction:
    fan = tg.fan
    out = RationalFunction.zero(tg.rank)
    for exps, c in ins.poly:
        term = RationalFunction.constant(tg.rank, c)
        for rho, e in enumerate(exps):
            if e:
                w = fan.restrict_divisor(rho, sigma)
                if w.is_zero():
                    term = RationalFunction.zero(tg.rank)
                    break
                term = term * w.to_rf() ** e
        out = out + term
    return out


def _vertex_spec(tg: ToricGraph, graph: DecoratedGraph, info, insertions) -> VertexSpec:
    sigma = graph.vertices[info.index][0]
    facets = tg.fan.facets_of(sigma)
    weights = [tg.weight(t, sigma) for t in facets]
    flags = []
    for k, _end in info.edges:
        tau, d = graph.edges[k][0], graph.edges[k][1]
        flags.append((facets.index(tau), d))
    marks = [insertions[m].a for m in info.markings] if insertions else [0] * len(info.markings)
    return VertexSpec(info.genus, weights, flags, marks)


def graph_vertex_specs(tg: ToricGraph, graph: DecoratedGraph, insertions=None) -> list:
    return [_vertex_spec(tg, graph, info, insertions) for info in classify_vertices(graph)]


def graph_contribution(graph: DecoratedGraph, query: InvariantQuery, tg: ToricGraph, table: HodgeTable | None = None):
    nv = tg.rank
    total = RationalFunction.constant(nv, Fraction(1, graph.a_factor()))
    for tau, d, _u, _v, _ in graph.edges:
        total = total * edge_factor(tg, tau, d)
    missing = None
    for info in classify_vertices(graph):
        sigma = graph.vertices[info.index][0]
        for m in info.markings:
            r = restrict_insertion(tg, query.insertions[m], sigma)
            if r.is_zero():
                return RationalFunction.zero(nv)
            total = total * r
        spec = _vertex_spec(tg, graph, info, query.insertions)
        val = vertex_integral(spec, table)
        if isinstance(val, Missing):
            missing = val if missing is None else missing.merge(val)
            continue
        total = total * val
        if info.valence != 1:
            total = total * vertex_weight(tg, sigma) ** (info.valence - 1)
    return missing if missing is not None else total


def tree_sum(values: list, nvars: int) -> RationalFunction:
    """Pairwise-balanced exact summation."""
    vals = [v for v in values if not v.is_zero()]
    if not vals:
        return RationalFunction.zero(nvars)
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


# worker pool; the fork start method lets workers inherit the job globals


_JOB = None


def _work(graph):
    fn, args = _JOB
    return fn(graph, *args)


def map_contributions(fn, graphs: list, args: tuple, jobs: int = 1) -> list:
    global _JOB
    _JOB = (fn, args)
    try:
        if jobs <= 1 or len(graphs) < 2:
            return [_work(g) for g in graphs]
        ctx = mp.get_context("fork")
        with ctx.Pool(jobs) as pool:
            return pool.map(_work, graphs, chunksize=max(1, len(graphs) // (4 * jobs)))
    finally:
        _JOB = None


def marking_filter(tg: ToricGraph, insertions) -> list:
    out = []
    for ins in insertions:
        allowed = {s for s in tg.vertices if not restrict_insertion(tg, ins, s).is_zero()}
        out.append(allowed)
    return out


def _finish(values, nvars, count, mode) -> GWResult:
    missing = None
    rfs = []
    for v in values:
        if isinstance(v, Missing):
            missing = v if missing is None else missing.merge(v)
        else:
            rfs.append(v)
    if missing is not None:
        return GWResult(None, missing, count)
    total = tree_sum(rfs, nvars)
    res = GWResult(total, None, count, total.is_constant())
    if mode == "nonequivariantCheck":
        check_constant(total)
    return res


def check_constant(total: RationalFunction, seed: int = 20240601):
    c = total.is_constant()
    if c is None:
        raise NonEquivariantCheckError(f"result depends on the equivariant parameters: {total}", total)
    rng = random.Random(seed)
    vals = []
    for _ in range(2):
        while True:
            pt = [rng.randint(-10 ** 6, 10 ** 6) for _ in range(total.nvars)]
            try:
                vals.append(total.evaluate(pt))
                break
            except ArithmeticError:
                continue
    if vals[0] != vals[1] or vals[0] != c:
        raise NonEquivariantCheckError("specializations disagree", total)
    return c


def gw_invariant(query: InvariantQuery, tg: ToricGraph, table: HodgeTable | None = None, jobs: int = 1, lam=None) -> GWResult:
    if query.mode not in ("equivariant", "nonequivariantCheck"):
        raise ConfigurationError(f"unknown mode {query.mode!r}")
    filt = marking_filter(tg, query.insertions)
    graphs = list(enumerate_graphs(tg, query.genus, query.n, query.beta, lam=lam, marking_filter=filt))
    vals = map_contributions(graph_contribution, graphs, (query, tg, table), jobs)
    return _finish(vals, tg.rank, len(graphs), query.mode)


def required_for_query(query: InvariantQuery, tg: ToricGraph, lam=None) -> list:
    filt = marking_filter(tg, query.insertions)
    specs = []
    for gr in enumerate_graphs(tg, query.genus, query.n, query.beta, lam=lam, marking_filter=filt):
        specs.extend(graph_vertex_specs(tg, gr, query.insertions))
    return required_integrals(specs)


def genus_series(query: InvariantQuery, tg: ToricGraph, g_max: int, table: HodgeTable | None = None, jobs: int = 1) -> dict:
    """Invariants for genus 0..g_max with the same class and insertions."""
    out = {}
    for g in range(g_max + 1):
        q = InvariantQuery(g, query.beta, list(query.insertions), query.mode)
        out[g] = gw_invariant(q, tg, table, jobs)
    return out
