"""Command-line front end.

Every subcommand prints tab-delimited ``key<TAB>value`` lines by default, or a
single JSON document with ``--json``.  Exit codes: 0 value, 2 missing
integrals, 3 validation or schema failure, 4 internal invariant breach,
5 evaluation at a pole.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .exact_algebra import PoleError, WeightVector, frac_str, parse_fraction
from .graph_enum import ConfigurationError, classify_vertices, enumerate_graphs
from .localization import (
    Insertion,
    InvariantQuery,
    NonEquivariantCheckError,
    graph_contribution,
    gw_invariant,
    marking_filter,
    required_for_query,
    virtual_dimension,
)
from .psi_hodge import (
    HodgeKey,
    HodgeTable,
    PsiStore,
    UnstableError,
    attach_store,
    clear_memo,
    default_cache_dir,
    hodge_integral,
    parse_key_string,
    psi_integral,
)
from .stacky import (
    HurwitzHodgeTable,
    OrbQuery,
    box_and_inertia,
    enumerate_twisted_graphs,
    football_rr,
    gale_dual,
    involution,
    load_stacky_fan,
    orb_graph_contribution,
    orb_gw_invariant,
    orb_virtual_dimension,
    orbifold_cohomology_basis,
)
from .toric_fan import FanError, ToricGraph, equivariant_rr_line, load_fan, sr_ideal_generators, validate_fan, Fan

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_MISSING = 2
EXIT_VALIDATION = 3
EXIT_INTERNAL = 4
EXIT_POLE = 5


class SchemaError(ValueError):
    pass


# input resolution


def resolve_path(ref: str, base: Path | None = None) -> Path:
    """A file path, or ``builtin:NAME`` for a bundled example."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        p = resources.files("toricgw") / "data" / f"{name}.json"
        if not p.is_file():
            raise SchemaError(f"no bundled example named {name!r}")
        return Path(str(p))
    p = Path(ref)
    if base is not None and not p.is_absolute():
        p = base / p
    if not p.exists():
        raise SchemaError(f"file not found: {p}")
    return p


def _read_json(path: Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc})") from exc


def _is_stacky(data: dict) -> bool:
    return "b" in data or "torsion" in data


def load_target(ref: str, base: Path | None = None, stacky: bool | None = None):
    path = resolve_path(ref, base)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    if stacky is None:
        stacky = _is_stacky(data)
    data.setdefault("name", path.stem)
    if stacky:
        return load_stacky_fan(data)
    return load_fan(data)


def _parse_int_list(s: str) -> list:
    return [int(x) for x in s.replace(" ", "").split(",") if x != ""]


def _parse_frac_list(s: str) -> list:
    return [parse_fraction(x) for x in s.replace(" ", "").split(",") if x != ""]


def _parse_insertion(spec, n_rays: int) -> Insertion:
    """``"D1*D2"``, ``"D1*D2@2"`` (psi power 2) or {"class": ..., "psi": a}."""
    if isinstance(spec, dict):
        if "class" not in spec:
            raise SchemaError("insertion object needs 'class'")
        return Insertion.from_string(str(spec["class"]), n_rays, int(spec.get("psi", 0)))
    s = str(spec)
    a = 0
    if "@" in s:
        s, a_s = s.rsplit("@", 1)
        a = int(a_s)
    return Insertion.from_string(s, n_rays, a)


def query_from_dict(data: dict, base: Path | None = None) -> dict:
    """Normalize a QueryFile into {target, query, tables, jobs, stacky}."""
    if not isinstance(data, dict):
        raise SchemaError("query must be a JSON object")
    sv = data.get("schemaVersion", SCHEMA_VERSION)
    if sv != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schemaVersion {sv}")
    for k in ("target", "genus", "beta"):
        if k not in data:
            raise SchemaError(f"query is missing '{k}'")
    stacky = data.get("stacky")
    target = load_target(str(data["target"]), base, stacky)
    is_orb = not isinstance(target, Fan)
    fan = target.fan if is_orb else target
    try:
        genus = int(data["genus"])
        beta = tuple(parse_fraction(x) for x in data["beta"])
        ins = [_parse_insertion(x, fan.n_rays) for x in data.get("insertions", [])]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad query field: {exc}") from exc
    if genus < 0:
        raise SchemaError("genus must be nonnegative")
    if len(beta) != fan.n_rays:
        raise SchemaError(f"beta has {len(beta)} entries but the fan has {fan.n_rays} rays")
    mode = data.get("mode", "equivariant")
    if mode not in ("equivariant", "nonequivariantCheck"):
        raise SchemaError(f"unknown mode {mode!r}")
    if is_orb:
        sectors = [tuple(int(v) for v in s) for s in data.get("sectors", [])] or [(0,) * target.dim] * len(ins)
        if len(sectors) != len(ins):
            raise SchemaError("one sector per insertion is required")
        q = OrbQuery(genus, beta, ins, sectors, mode, bool(data.get("weighted", False)))
    else:
        if data.get("sectors"):
            raise SchemaError("sectors need a stacky target")
        if any(b.denominator != 1 for b in beta):
            raise SchemaError("beta must be integral on a smooth fan")
        q = InvariantQuery(genus, tuple(int(b) for b in beta), ins, mode)
    hodge, hh = HodgeTable(), HurwitzHodgeTable()
    for t in data.get("tables", []):
        p = resolve_path(str(t), base)
        hodge = hodge.merged(HodgeTable.load(p))
        for k, v in HurwitzHodgeTable.load(p).entries.items():
            hh.set(k, v)
    return {"target": target, "orb": is_orb, "query": q, "tables": (hodge, hh), "jobs": int(data.get("jobs", 1)),
            "raw": data}


def _query_args(p: argparse.ArgumentParser):
    p.add_argument("target", nargs="?", help="fan file, builtin:NAME, or a query file with --query")
    p.add_argument("--query", help="QueryFile (JSON)")
    p.add_argument("--genus", "-g", type=int, default=0)
    p.add_argument("--beta", help="comma-separated D_i . beta")
    p.add_argument("--insert", "-i", action="append", default=[], help="insertion like D1*D2 or D1@2 (psi power)")
    p.add_argument("--sector", action="append", default=[], help="Box element per insertion, comma-separated")
    p.add_argument("-n", type=int, help="number of markings when no insertions are given")
    p.add_argument("--mode", default=None, choices=["equivariant", "nonequivariantCheck"])
    p.add_argument("--table", action="append", default=[], help="Hodge or Hurwitz-Hodge table (JSON)")
    p.add_argument("--weighted", action="store_true", help="weight each marking by the order of its sector")


def _load_query(args) -> dict:
    if args.query:
        path = resolve_path(args.query)
        data = _read_json(path)
        base = path.parent
    else:
        if not args.target or args.beta is None:
            raise SchemaError("give a target and --beta, or --query FILE")
        ins = list(args.insert)
        if not ins and args.n:
            ins = ["1"] * args.n
        data = {"target": args.target, "genus": args.genus, "beta": args.beta.split(","), "insertions": ins,
                "tables": args.table}
        if args.sector:
            data["sectors"] = [_parse_int_list(s) for s in args.sector]
        if args.weighted:
            data["weighted"] = True
        base = None
    if args.mode:
        data["mode"] = args.mode
    if getattr(args, "jobs", None):
        data["jobs"] = args.jobs
    return query_from_dict(data, base)


def _query_hash(q: dict) -> str:
    raw = dict(q["raw"])
    raw.pop("jobs", None)
    target = q["target"]
    blob = {
        "query": raw,
        "target": target.to_json(),
        "hodge": q["tables"][0].to_json(),
        "hurwitzHodge": sorted((str(k), frac_str(v)) for k, v in q["tables"][1].entries.items()),
    }
    return hashlib.sha256(json.dumps(blob, sort_keys=True, default=str).encode()).hexdigest()[:16]


# output


class Out:
    def __init__(self, as_json: bool, stream=None):
        self.as_json = as_json
        self.stream = stream or sys.stdout
        self.doc = {"schemaVersion": SCHEMA_VERSION}
        self.rows = []

    def field(self, key, value):
        self.doc[key] = value
        self.rows.append(f"{key}\t{_cell(value)}")

    def table(self, key, header, rows):
        self.doc[key] = [dict(zip(header, r)) for r in rows]
        self.rows.append("#" + "\t".join(header))
        for r in rows:
            self.rows.append("\t".join(_cell(x) for x in r))

    def emit(self):
        if self.as_json:
            self.stream.write(json.dumps(self.doc, indent=1, sort_keys=True, default=_json_default) + "\n")
        else:
            self.stream.write("\n".join(self.rows) + "\n")


def _cell(x) -> str:
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, (list, tuple)):
        return "[" + ",".join(_cell(y) for y in x) + "]"
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "-"
    return str(x)


def _json_default(x):
    if isinstance(x, Fraction):
        return frac_str(x)
    return str(x)


# plotting


def plot_toric_graph(tg: ToricGraph, path, highlight=None, title=None):
    """Draw the toric graph of a rank-1 or rank-2 fan, or a schematic otherwise.

    Vertices sit at the normalized sum of their rays.  Edges in ``highlight``
    (a {tau: multiplicity} map) are drawn thicker and labelled.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import math

    fan = tg.fan
    pos = {}
    if fan.rank <= 2:
        for sigma in tg.vertices:
            x = y = 0.0
            for i in sigma:
                r = fan.rays[i]
                nr = math.hypot(*[float(c) for c in r])
                x += float(r[0]) / nr
                y += float(r[1]) / nr if fan.rank == 2 else 0.0
            pos[sigma] = (x, y if fan.rank == 2 else 0.0)
    else:
        k = len(tg.vertices)
        for j, sigma in enumerate(tg.vertices):
            pos[sigma] = (math.cos(2 * math.pi * j / k), math.sin(2 * math.pi * j / k))
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    highlight = highlight or {}
    for e in tg.edges:
        if e.compact:
            (x0, y0), (x1, y1) = pos[e.sigmas[0]], pos[e.sigmas[1]]
            m = highlight.get(e.tau, 0)
            ax.plot([x0, x1], [y0, y1], color="C1" if m else "0.4", lw=1.2 + 1.5 * bool(m), zorder=1)
            if m:
                ax.annotate(str(m), ((x0 + x1) / 2, (y0 + y1) / 2), color="C1", ha="center", va="bottom")
        else:
            (x0, y0) = pos[e.sigmas[0]]
            ax.plot([x0, x0 * 1.4 + 0.05], [y0, y0 * 1.4 + 0.05], color="0.6", ls="--", lw=1, zorder=1)
    for sigma, (x, y) in pos.items():
        ax.scatter([x], [y], s=60, color="C0", zorder=2)
        ax.annotate("{" + ",".join(str(i + 1) for i in sigma) + "}", (x, y), textcoords="offset points",
                    xytext=(6, 6), fontsize=8)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


# subcommands


def cmd_validate(args, out: Out) -> int:
    path = resolve_path(args.fan)
    data = _read_json(path)
    stacky = args.stacky or _is_stacky(data)
    try:
        if stacky:
            sf = load_stacky_fan(data)
            out.field("ok", True)
            out.field("kind", "stacky")
            out.field("compact", all(sf.fan.is_compact_facet(t) for t in sf.fan.facets))
            out.field("stabilizerOrders", [sf.stabilizer_order(s) for s in sf.fan.max_cones])
        else:
            fan = Fan(data["rank"], data["rays"], data["maxCones"], data.get("ampleFunctional"))
            rep = validate_fan(fan, require_smooth=not args.allow_singular)
            out.field("ok", rep.ok)
            out.field("kind", "smooth" if not args.allow_singular else "simplicial")
            for m in rep.messages:
                out.field("message", m)
            if rep.ok:
                out.field("compact", rep.compact)
                out.field("projectiveWitness", rep.projective_witness)
            if not rep.ok:
                out.emit()
                return EXIT_VALIDATION
    except KeyError as exc:
        raise SchemaError(f"fan file is missing {exc}") from exc
    out.emit()
    return EXIT_OK


def cmd_graph(args, out: Out) -> int:
    target = load_target(args.fan)
    tg = target.graph if not isinstance(target, Fan) else ToricGraph(target)
    if args.json:
        out.doc.update(tg.to_json())
    rows = []
    for e in tg.edges:
        rows.append(["edge", list(e.tau), [list(s) for s in e.sigmas], e.compact,
                     list(e.curve_class) if e.compact else None])
    out.table("edges", ["kind", "tau", "maxCones", "compact", "curveClass"], rows)
    wrows = [[list(t), list(s), str(w)] for (t, s), w in sorted(tg.flag_weights.items())]
    out.table("flagWeights", ["tau", "sigma", "weight"], wrows)
    if args.plot:
        p = plot_toric_graph(tg, args.plot, title=getattr(tg.fan, "name", None))
        out.field("plot", str(p))
    out.emit()
    return EXIT_OK


def cmd_graphs(args, out: Out) -> int:
    q = _load_query(args)
    target, query = q["target"], q["query"]
    rows = []
    pt = _parse_frac_list(args.at) if args.at else None
    if q["orb"]:
        graphs = list(enumerate_twisted_graphs(target, query.genus, query.sectors, query.beta, query.insertions))
        fn, extra = orb_graph_contribution, (query, target, q["tables"])
        tg = target.graph
    else:
        tg = ToricGraph(target)
        filt = marking_filter(tg, query.insertions)
        graphs = list(enumerate_graphs(tg, query.genus, query.n, query.beta, marking_filter=filt))
        fn, extra = graph_contribution, (query, tg, q["tables"][0])
    for i, gr in enumerate(graphs):
        kinds = "".join(sorted(v.kind[0:2] for v in classify_vertices(gr)))
        row = [i, gr.aut, kinds, gr.describe()]
        if args.contributions:
            val = fn(gr, *extra)
            row.append(repr(val) if not hasattr(val, "num") else str(val))
            if pt is not None:
                row.append(val.evaluate(pt) if hasattr(val, "num") else "-")
        rows.append(row)
    header = ["index", "aut", "vertexKinds", "graph"]
    if args.contributions:
        header += ["contribution"] + (["valueAt"] if pt is not None else [])
    out.field("count", len(graphs))
    out.table("graphs", header, rows)
    if args.plot:
        mult = {}
        for gr in graphs:
            for e in gr.edges:
                mult[e[0]] = mult.get(e[0], 0) + 1
        p = plot_toric_graph(tg, args.plot, highlight=mult, title=f"{len(graphs)} graphs")
        out.field("plot", str(p))
    out.emit()
    return EXIT_OK


def cmd_sr_ideal(args, out: Out) -> int:
    fan = load_target(args.fan, stacky=False)
    sr = sr_ideal_generators(fan)
    for k in ("I", "J", "Iprime", "Jprime", "minimalNonFaces"):
        out.field(k, sr[k])
    out.emit()
    return EXIT_OK


def cmd_rr_line(args, out: Out) -> int:
    u = WeightVector(_parse_frac_list(args.u))
    w = WeightVector(_parse_frac_list(args.w))
    if len(u.coeffs) != len(w.coeffs):
        raise SchemaError("u and w must have the same length")
    terms = equivariant_rr_line(u, w, args.a)
    out.field("euler", sum(s for s, _ in terms))
    out.table("character", ["sign", "weight"], [[s, str(x)] for s, x in terms])
    out.emit()
    return EXIT_OK


def cmd_psi(args, out: Out) -> int:
    val = psi_integral(args.genus, args.exponents)
    out.field("key", HodgeKey.make(args.genus, args.exponents).__str__())
    out.field("value", val)
    out.emit()
    return EXIT_OK


def cmd_hodge(args, out: Out) -> int:
    table = HodgeTable()
    for t in args.table:
        table = table.merged(HodgeTable.load(resolve_path(t)))
    key = HodgeKey.make(args.genus, _parse_int_list(args.psi or ""), _parse_int_list(args.lam or ""))
    val = hodge_integral(key, table)
    out.field("key", str(key))
    if hasattr(val, "keys") and not isinstance(val, Fraction):
        out.field("missing", [str(k) for k in val.sorted_keys()])
        out.emit()
        return EXIT_MISSING
    out.field("value", val)
    out.emit()
    return EXIT_OK


def cmd_required(args, out: Out) -> int:
    q = _load_query(args)
    if q["orb"]:
        res = orb_gw_invariant(OrbQuery(**{**q["query"].__dict__, "mode": "equivariant"}), q["target"],
                               HodgeTable(), HurwitzHodgeTable(), jobs=q["jobs"])
        keys = res.missing.sorted_keys() if res.missing else []
    else:
        keys = required_for_query(q["query"], ToricGraph(q["target"]))
    out.field("count", len(keys))
    out.table("keys", ["key"], [[str(k)] for k in keys])
    if args.json:
        out.doc["keyObjects"] = [k.to_json() for k in keys]
    out.emit()
    return EXIT_OK


def _run_gw(args, out: Out, want_orb: bool) -> int:
    q = _load_query(args)
    if q["orb"] != want_orb:
        raise SchemaError("orb-gw needs a stacky target" if want_orb else "gw needs a smooth fan; use orb-gw")
    t0 = time.perf_counter()
    if want_orb:
        res = orb_gw_invariant(q["query"], q["target"], *q["tables"], jobs=q["jobs"])
        vdim = orb_virtual_dimension(q["target"], q["query"].genus, q["query"].beta, q["query"].sectors)
        nv = q["target"].rank
    else:
        tg = ToricGraph(q["target"])
        res = gw_invariant(q["query"], tg, q["tables"][0], jobs=q["jobs"])
        vdim = virtual_dimension(q["target"], q["query"].genus, q["query"].beta, q["query"].n)
        nv = tg.rank
    out.field("queryHash", _query_hash(q))
    out.field("engineVersion", __version__)
    out.field("graphCount", res.graph_count)
    out.field("virtualDimension", Fraction(vdim))
    if args.timing:
        out.field("wallTime", f"{time.perf_counter() - t0:.3f}")
    if res.missing is not None:
        keys = res.missing.sorted_keys()
        out.field("status", "missing")
        out.table("missing", ["key"], [[str(k)] for k in keys])
        if args.json:
            out.doc["missingKeys"] = [k.to_json() for k in keys]
        out.emit()
        return EXIT_MISSING
    out.field("status", "value")
    out.field("value", str(res.value))
    out.field("constant", res.constant)
    out.field("nvars", nv)
    if args.at:
        pt = _parse_frac_list(args.at)
        if len(pt) != nv:
            raise SchemaError(f"--at needs {nv} coordinates")
        out.field("valueAt", res.value.evaluate(pt))
    out.emit()
    return EXIT_OK


def cmd_gw(args, out: Out) -> int:
    return _run_gw(args, out, False)


def cmd_orb_gw(args, out: Out) -> int:
    return _run_gw(args, out, True)


def cmd_inertia(args, out: Out) -> int:
    sf = load_target(args.fan, stacky=True)
    rows = []
    for c in box_and_inertia(sf):
        inv = involution(sf, c)
        rows.append([list(c.box_element), list(c.minimal_cone), c.age, list(inv)])
    out.field("components", len(rows))
    out.table("inertia", ["boxElement", "minimalCone", "age", "involution"], rows)
    if all(sf.fan.is_compact_facet(t) for t in sf.fan.facets):
        basis = orbifold_cohomology_basis(sf)
        out.table("orbifoldCohomology", ["degree", "boxElement", "dimension"],
                  [[Fraction(d), list(v), k] for d, v, k in basis])
    out.emit()
    return EXIT_OK


def cmd_box(args, out: Out) -> int:
    sf = load_target(args.fan, stacky=True)
    elems = [list(c.box_element) for c in box_and_inertia(sf)]
    out.field("size", len(elems))
    out.field("box", sorted(elems))
    out.emit()
    return EXIT_OK


def cmd_football_rr(args, out: Out) -> int:
    if args.s1 < 1 or args.s2 < 1:
        raise SchemaError("football orders must be positive")
    w1, w3 = WeightVector((Fraction(1), Fraction(0))), WeightVector((Fraction(0), Fraction(1)))
    h0, h1 = football_rr(args.s1, args.s2, args.c1, args.c2, w1, w3=w3)
    out.field("euler", len(h0) - len(h1))
    out.field("H0", [str(x).replace("u1", "w1").replace("u2", "w3") for x in h0])
    out.field("H1", [str(x).replace("u1", "w1").replace("u2", "w3") for x in h1])
    out.emit()
    return EXIT_OK


def cmd_gale(args, out: Out) -> int:
    sf = load_target(args.fan, stacky=True)
    g = gale_dual(sf)
    out.field("invariantFactors", g["invariantFactors"])
    out.field("freeRank", g["freeRank"])
    out.table("dualMap", ["i", "image"], [[i + 1, img] for i, img in enumerate(g["images"])])
    out.emit()
    return EXIT_OK


def cmd_cache(args, out: Out) -> int:
    store = PsiStore(args.cache_dir or default_cache_dir())
    if args.action == "inspect":
        rows = [[ks, vs, ok] for ks, vs, ok in store.entries()]
        out.field("path", str(store.path))
        out.field("entries", len(rows))
        out.table("cache", ["key", "value", "checksumOk"], rows)
        out.emit()
        return EXIT_OK
    if args.action == "clear":
        store.clear()
        out.field("path", str(store.path))
        out.field("entries", 0)
        out.emit()
        return EXIT_OK
    # verify
    entries = list(store.entries())
    ok_entries = [(ks, vs) for ks, vs, ok in entries if ok]
    bad = [ks for ks, vs, ok in entries if not ok]
    sample = ok_entries
    if args.sample is not None and args.sample < len(ok_entries):
        sample = random.Random(args.seed).sample(ok_entries, args.sample)
    attach_store(None)
    clear_memo()
    mismatched = []
    for ks, vs in sample:
        g, exps = parse_key_string(ks)
        if psi_integral(g, exps) != parse_fraction(vs):
            mismatched.append(ks)
    out.field("path", str(store.path))
    out.field("checked", len(sample))
    out.field("corrupt", bad)
    out.field("mismatched", mismatched)
    out.field("ok", not bad and not mismatched)
    out.emit()
    return EXIT_OK if not bad and not mismatched else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    # common options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit one JSON document")
    common.add_argument("--jobs", "-j", type=int, default=argparse.SUPPRESS, help="worker processes for graph sums")
    common.add_argument("--cache-dir", default=argparse.SUPPRESS, help="psi cache directory (default $TORICGW_CACHE_DIR)")
    common.add_argument("--no-cache", action="store_true", default=argparse.SUPPRESS, help="do not use the psi cache")
    p = argparse.ArgumentParser(prog="toricgw", parents=[common],
                                description="Exact Gromov-Witten invariants of toric targets by localization.")
    p.add_argument("--version", action="version", version=f"toricgw {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("validate", help="validate a fan or stacky fan")
    s.add_argument("fan")
    s.add_argument("--stacky", action="store_true")
    s.add_argument("--allow-singular", action="store_true", help="accept simplicial, non-smooth cones")
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser("graph", help="toric graph, flag weights and curve classes")
    s.add_argument("fan")
    s.add_argument("--plot", help="write a PNG of the toric graph")
    s.set_defaults(fn=cmd_graph)

    s = sub.add_parser("graphs", help="list decorated graphs of a query")
    _query_args(s)
    s.add_argument("--contributions", action="store_true")
    s.add_argument("--plot", help="write a PNG with edge usage over all graphs")
    s.add_argument("--at", help="with --contributions, also evaluate each one at u = comma-separated rationals")
    s.set_defaults(fn=cmd_graphs)

    s = sub.add_parser("sr-ideal", help="Stanley-Reisner presentation")
    s.add_argument("fan")
    s.set_defaults(fn=cmd_sr_ideal)

    s = sub.add_parser("rr-line", help="equivariant Riemann-Roch on P^1")
    s.add_argument("--u", required=True, help="tangent weight, comma-separated")
    s.add_argument("--w", required=True, help="fiber weight at 0, comma-separated")
    s.add_argument("--a", type=int, required=True, help="degree")
    s.set_defaults(fn=cmd_rr_line)

    s = sub.add_parser("psi", help="descendant integral <tau_a1 ... tau_an>_g")
    s.add_argument("--genus", "-g", type=int, required=True)
    s.add_argument("exponents", type=int, nargs="*")
    s.set_defaults(fn=cmd_psi)

    s = sub.add_parser("hodge", help="Hodge integral lookup")
    s.add_argument("--genus", "-g", type=int, required=True)
    s.add_argument("--psi", default="")
    s.add_argument("--lam", "--lambda", dest="lam", default="", help="exponents of lambda_1..lambda_g")
    s.add_argument("--table", action="append", default=[])
    s.set_defaults(fn=cmd_hodge)

    s = sub.add_parser("required-integrals", help="Hodge keys a query needs")
    _query_args(s)
    s.set_defaults(fn=cmd_required)

    for name, fn in (("gw", cmd_gw), ("orb-gw", cmd_orb_gw)):
        s = sub.add_parser(name, help="evaluate an invariant" + (" of a toric stack" if name == "orb-gw" else ""))
        _query_args(s)
        s.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
        s.add_argument("--at", help="also evaluate the value at u = comma-separated rationals")
        s.set_defaults(fn=fn)

    for name, fn, h in (("inertia", cmd_inertia, "inertia components and ages"), ("box", cmd_box, "Box elements"),
                        ("gale", cmd_gale, "Gale dual")):
        s = sub.add_parser(name, help=h)
        s.add_argument("fan")
        s.set_defaults(fn=fn)

    s = sub.add_parser("football-rr", help="H^0 and H^1 of O(c1 p1 + c2 p2) on C_{s1,s2}")
    for k in ("s1", "s2", "c1", "c2"):
        s.add_argument(k, type=int)
    s.set_defaults(fn=cmd_football_rr)

    s = sub.add_parser("cache", help="inspect, verify or clear the psi cache")
    s.add_argument("action", choices=["inspect", "verify", "clear"])
    s.add_argument("--sample", type=int, default=None, help="verify a random sample of this size")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_cache)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k, v in (("json", False), ("jobs", None), ("cache_dir", None), ("no_cache", False)):
        if not hasattr(args, k):
            setattr(args, k, v)
    out = Out(args.json)
    if args.command != "cache" and not args.no_cache:
        try:
            attach_store(PsiStore(args.cache_dir or default_cache_dir()))
        except OSError:
            attach_store(None)
    try:
        return args.fn(args, out)
    except (SchemaError, FanError, ConfigurationError, UnstableError) as exc:
        print(f"toricgw: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PoleError as exc:
        print(f"toricgw: evaluation at a pole: {exc}", file=sys.stderr)
        return EXIT_POLE
    except NonEquivariantCheckError as exc:
        print(f"toricgw: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"toricgw: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"toricgw: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        attach_store(None)


if __name__ == "__main__":
    sys.exit(main())
