"""Decorated graphs indexing the torus-fixed loci of stable-map moduli.

A graph is stored with vertices ``(sigma, genus, markings)`` and edges
``(tau, d, u, v, twist)`` where ``u`` carries the first and ``v`` the second
maximal cone of ``tau`` (in the toric graph's order), so an edge never needs
flipping.  ``twist`` is None for ordinary graphs; the orbifold code stores
the pair of end twistings there.

Graphs are emitted in canonical form: colour refinement on vertex labels,
then a search over orderings inside each colour class for the
lexicographically smallest encoding.  The number of orderings reaching that
encoding is the vertex-automorphism count.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Sequence

from .toric_fan import ToricGraph

__all__ = [
    "ConfigurationError",
    "DecoratedGraph",
    "VertexInfo",
    "canonical_form",
    "enumerate_graphs",
    "automorphism_order",
    "classify_vertices",
    "validate_graph",
    "edge_multisets",
]


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class DecoratedGraph:
    vertices: tuple  # ((sigma, genus, markings), ...)
    edges: tuple  # ((tau, d, u, v, twist), ...)
    aut: int = 1

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def first_betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def degree_product(self) -> int:
        out = 1
        for e in self.edges:
            out *= e[1]
        return out

    def a_factor(self) -> int:
        """|A_Gamma| = |Aut| * prod d_e."""
        return self.aut * self.degree_product()

    def key(self) -> tuple:
        return (self.vertices, self.edges)

    def marking_vertex(self) -> dict:
        out = {}
        for i, (_, _, marks) in enumerate(self.vertices):
            for m in marks:
                out[m] = i
        return out

    def degree_profile(self) -> tuple:
        return tuple(sorted((e[0], e[1]) for e in self.edges))

    def describe(self) -> str:
        vs = ";".join(
            f"v{i}[{','.join(map(str, s))}|g={g}|m={','.join(str(m + 1) for m in marks) or '-'}]"
            for i, (s, g, marks) in enumerate(self.vertices)
        )
        es = ";".join(
            f"e[{','.join(map(str, t))}|d={d}|v{u}-v{v}"
            + (f"|k={_twist_str(tw)}" if tw is not None else "")
            + "]"
            for t, d, u, v, tw in self.edges
        )
        return vs + " " + es

    def to_json(self) -> dict:
        out = {
            "vertices": [{"sigma": list(s), "genus": g, "markings": [m + 1 for m in marks]} for s, g, marks in self.vertices],
            "edges": [{"tau": list(t), "degree": d, "ends": [u, v]} for t, d, u, v, _ in self.edges],
            "aut": self.aut,
        }
        for rec, e in zip(out["edges"], self.edges):
            if e[4] is not None:
                rec["twist"] = [list(x) if isinstance(x, tuple) else x for x in e[4]]
        return out


def _twist_str(tw) -> str:
    return "/".join("(" + ",".join(map(str, x)) + ")" if isinstance(x, tuple) else str(x) for x in tw)


# canonical form


def _refine(vertices, edges):
    colours = [vertices[i] for i in range(len(vertices))]
    while True:
        # rank current colours to small ints so keys stay comparable
        rank = {c: i for i, c in enumerate(sorted(set(colours)))}
        cur = [rank[c] for c in colours]
        nbr = [[] for _ in vertices]
        for t, d, u, v, tw in edges:
            nbr[u].append((0, t, d, tw, cur[v]))
            nbr[v].append((1, t, d, tw, cur[u]))
        new = [(cur[i], tuple(sorted(nbr[i], key=repr))) for i in range(len(vertices))]
        rank2 = {c: i for i, c in enumerate(sorted(set(new), key=repr))}
        newc = [rank2[c] for c in new]
        if len(set(newc)) == len(set(cur)):
            return cur
        colours = newc


def _encode(vertices, edges, order):
    pos = {old: new for new, old in enumerate(order)}
    vs = tuple(vertices[i] for i in order)
    es = tuple(sorted(((t, d, pos[u], pos[v], tw) for t, d, u, v, tw in edges), key=repr))
    return vs, es


def canonical_form(vertices, edges):
    """Return (vertices, edges, vertex_aut_count) in canonical form."""
    vertices = list(vertices)
    edges = list(edges)
    colours = _refine(vertices, edges)
    classes = {}
    for i, c in enumerate(colours):
        classes.setdefault(c, []).append(i)
    blocks = [classes[c] for c in sorted(classes)]
    best = None
    count = 0
    for perms in itertools.product(*[itertools.permutations(b) for b in blocks]):
        order = [i for p in perms for i in p]
        enc = _encode(vertices, edges, order)
        r = repr(enc)
        if best is None or r < best[0]:
            best = (r, enc)
            count = 1
        elif r == best[0]:
            count += 1
    vs, es = best[1]
    return vs, es, count


def _parallel_factor(edges) -> int:
    out = 1
    for m in Counter(edges).values():
        out *= factorial(m)
    return out


def make_graph(vertices, edges) -> DecoratedGraph:
    vs, es, vaut = canonical_form(vertices, edges)
    return DecoratedGraph(vs, es, vaut * _parallel_factor(es))


def automorphism_order(graph: DecoratedGraph) -> int:
    _, es, vaut = canonical_form(graph.vertices, graph.edges)
    return vaut * _parallel_factor(es)


# enumeration


def _positivity(tg: ToricGraph, lam):
    if lam is None:
        raise ConfigurationError("graph enumeration needs a positivity functional (ampleFunctional in the fan file)")
    out = {}
    for e in tg.compact_edges:
        val = sum(Fraction(a) * c for a, c in zip(lam, e.curve_class))
        if val <= 0:
            raise ConfigurationError(f"positivity functional is not positive on edge {list(e.tau)}")
        out[e.tau] = val
    return out


def edge_multisets(tg: ToricGraph, beta: Sequence, lam) -> list:
    """All multisets of (tau, d) with sum d * class(tau) = beta."""
    beta = tuple(Fraction(b) for b in beta)
    if len(beta) != tg.fan.n_rays:
        raise ConfigurationError(f"class has length {len(beta)}, expected {tg.fan.n_rays}")
    pos = _positivity(tg, lam)
    bound = sum(Fraction(a) * b for a, b in zip(lam, beta))
    taus = [e.tau for e in tg.compact_edges]
    out = []

    def rec(start, remaining, acc, chosen):
        if remaining == 0:
            if tuple(acc) == beta:
                out.append(tuple(chosen))
            return
        for i in range(start, len(taus)):
            tau = taus[i]
            w = pos[tau]
            cls = tg.curve_class(tau)
            dmin = chosen[-1][1] if chosen and chosen[-1][0] == tau else 1
            d = dmin
            while d * w <= remaining:
                rec(i, remaining - d * w, [a + d * c for a, c in zip(acc, cls)], chosen + [(tau, d)])
                d += 1

    if bound <= 0:
        return []
    rec(0, bound, [Fraction(0)] * len(beta), [])
    return out


def _connected(nv, edges) -> bool:
    if nv == 0:
        return False
    adj = [set() for _ in range(nv)]
    for _, _, u, v, _ in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == nv


def _shapes(tg: ToricGraph, multiset, nv) -> Iterator[tuple]:
    """Bare graphs (vertex labels, edges) for an edge multiset on nv vertices."""
    groups = Counter(multiset)
    items = sorted(groups.items())
    seen = set()
    for labels in itertools.combinations_with_replacement(range(len(tg.vertices)), nv):
        sig = [tg.vertices[i] for i in labels]
        per_group = []
        for (tau, d), m in items:
            s0, s1 = tg.edge(tau).sigmas
            ends = [(u, v) for u in range(nv) if sig[u] == s0 for v in range(nv) if sig[v] == s1]
            if not ends:
                break
            per_group.append([(tau, d, ch) for ch in itertools.combinations_with_replacement(ends, m)])
        else:
            for combo in itertools.product(*per_group):
                edges = tuple((tau, d, u, v, None) for tau, d, ch in combo for (u, v) in ch)
                used = set()
                for e in edges:
                    used.add(e[2])
                    used.add(e[3])
                if len(used) != nv or not _connected(nv, edges):
                    continue
                vs = tuple((s, 0, ()) for s in sig)
                cvs, ces, _ = canonical_form(vs, edges)
                if (cvs, ces) in seen:
                    continue
                seen.add((cvs, ces))
                yield cvs, ces


def enumerate_graphs(tg: ToricGraph, g: int, n: int, beta: Sequence, lam=None, marking_filter=None) -> Iterator[DecoratedGraph]:
    """Stream every decorated graph in G_{g,n}(X, beta) once, in canonical form.

    ``marking_filter[i]``, when given and not None, is the set of maximal
    cones at which marking i may sit (used to skip graphs whose insertion
    restricts to zero).  Without a filter the enumeration is complete.
    """
    if lam is None:
        lam = tg.fan.ample_functional
    if g < 0 or n < 0:
        raise ConfigurationError("genus and marking count must be nonnegative")
    if not any(Fraction(b) for b in beta):
        raise ConfigurationError("beta = 0 is not supported")
    emitted = set()
    for ms in edge_multisets(tg, beta, lam):
        ne = len(ms)
        for nv in range(max(2, ne + 1 - g), ne + 2):
            b1 = ne - nv + 1
            for vs, es in _shapes(tg, ms, nv):
                for genera in _compositions_bounded(g - b1, nv):
                    for place in itertools.product(range(nv), repeat=n):
                        if marking_filter is not None and any(
                            marking_filter[i] is not None and vs[place[i]][0] not in marking_filter[i] for i in range(n)
                        ):
                            continue
                        marks = [[] for _ in range(nv)]
                        for i, v in enumerate(place):
                            marks[v].append(i)
                        verts = tuple((vs[i][0], genera[i], tuple(marks[i])) for i in range(nv))
                        gr = make_graph(verts, es)
                        if gr.key() in emitted:
                            continue
                        emitted.add(gr.key())
                        yield gr


def _compositions_bounded(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions_bounded(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class VertexInfo:
    index: int
    kind: str  # "V1", "V11", "V2" or "VS"
    valence: int
    n_marks: int
    genus: int
    edges: tuple  # (edge index, end) with end 0 for u and 1 for v
    markings: tuple


def classify_vertices(graph: DecoratedGraph) -> list:
    inc = [[] for _ in graph.vertices]
    for k, (_, _, u, v, _) in enumerate(graph.edges):
        inc[u].append((k, 0))
        inc[v].append((k, 1))
    out = []
    for i, (_, g, marks) in enumerate(graph.vertices):
        val, nm = len(inc[i]), len(marks)
        if g == 0 and val == 1 and nm == 0:
            kind = "V1"
        elif g == 0 and val == 1 and nm == 1:
            kind = "V11"
        elif g == 0 and val == 2 and nm == 0:
            kind = "V2"
        else:
            kind = "VS"
        out.append(VertexInfo(i, kind, val, nm, g, tuple(inc[i]), tuple(marks)))
    return out


@dataclass
class GraphReport:
    ok: bool
    message: str


def validate_graph(graph: DecoratedGraph, tg: ToricGraph, g: int, n: int, beta: Sequence) -> GraphReport:
    """Check the decorated-graph constraints directly (independent of the enumerator)."""
    nv = len(graph.vertices)
    compact = {e.tau: e for e in tg.compact_edges}
    for t, d, u, v, _ in graph.edges:
        if t not in compact:
            return GraphReport(False, f"edge label {list(t)} is not a compact edge")
        if d < 1:
            return GraphReport(False, "edge degree must be positive")
        if not (0 <= u < nv and 0 <= v < nv) or u == v:
            return GraphReport(False, "edge endpoints invalid (loops are impossible)")
        s0, s1 = compact[t].sigmas
        if graph.vertices[u][0] != s0 or graph.vertices[v][0] != s1:
            return GraphReport(False, f"flag condition fails on edge {list(t)}")
    if not _connected(nv, graph.edges):
        return GraphReport(False, "graph is not connected")
    gsum = sum(x[1] for x in graph.vertices)
    if any(x[1] < 0 for x in graph.vertices) or gsum + graph.first_betti() != g:
        return GraphReport(False, "constraint (i) topology of the domain: sum g_v + b1 != g")
    marks = sorted(m for x in graph.vertices for m in x[2])
    if marks != list(range(n)):
        return GraphReport(False, "markings are not a bijection onto 1..n")
    acc = [Fraction(0)] * len(beta)
    for t, d, _, _, _ in graph.edges:
        acc = [a + d * c for a, c in zip(acc, compact[t].curve_class)]
    if tuple(acc) != tuple(Fraction(b) for b in beta):
        return GraphReport(False, "topology of the map: sum d_e [l_tau_e] != beta")
    return GraphReport(True, "valid")
