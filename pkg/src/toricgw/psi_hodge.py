"""Descendant and Hodge integrals on moduli of stable curves.

Pure psi-integrals in every genus come from the DVV (Virasoro) recursion,
run from the single base value <tau_0^3>_0 = 1.  The one correlator the
recursion cannot reach directly, <tau_1>_1, is obtained by feeding the
string relation <tau_1>_1 = <tau_0 tau_2>_1 back into DVV and solving the
resulting linear equation.

Integrals involving lambda classes are table inputs.  Lookups that fail
return a :class:`Missing` value carrying the exact keys, so a graph sum can
report a complete work order instead of guessing.
"""

from __future__ import annotations

import fcntl
import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from pathlib import Path
from typing import Iterable, Sequence

from .exact_algebra import RationalFunction, WeightVector, frac_str, parse_fraction

__all__ = [
    "UnstableError",
    "psi_integral",
    "genus0_closed",
    "HodgeKey",
    "HodgeTable",
    "Missing",
    "hodge_integral",
    "VertexSpec",
    "vertex_integral",
    "vertex_bracket",
    "unstable_convention",
    "required_integrals",
    "PsiStore",
    "attach_store",
    "memo_items",
]


class UnstableError(ValueError):
    """Moduli space with 2g - 2 + n <= 0."""


def _dfact(n: int) -> int:
    """Double factorial with (-1)!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


_MEMO: dict = {}
_STORE = None


def _key(g: int, exps: Iterable[int]) -> tuple:
    return (g, tuple(sorted(exps, reverse=True)))


def _stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def _dvv_terms(g: int, exps: tuple):
    """DVV expansion of <tau_{k+1} tau_rest>_g, applied to the largest exponent.

    Returns a list of (coefficient, [keys]) whose products sum to the
    correlator.
    """
    m = exps[0]
    rest = list(exps[1:])
    k = m - 1
    base = Fraction(1, _dfact(2 * k + 3))
    terms = []
    for j, dj in enumerate(rest):
        new = rest[:j] + [dj + k] + rest[j + 1:]
        c = Fraction(_dfact(2 * k + 2 * dj + 1), _dfact(2 * dj - 1))
        terms.append((base * c, [_key(g, new)]))
    for r in range(k):
        s = k - 1 - r
        c = base * Fraction(_dfact(2 * r + 1) * _dfact(2 * s + 1), 2)
        if g >= 1:
            terms.append((c, [_key(g - 1, rest + [r, s])]))
        idx = range(len(rest))
        for g1 in range(g + 1):
            g2 = g - g1
            for size in range(len(rest) + 1):
                for sub in itertools.combinations(idx, size):
                    left = [rest[i] for i in sub] + [r]
                    right = [rest[i] for i in idx if i not in sub] + [s]
                    terms.append((c, [_key(g1, left), _key(g2, right)]))
    return terms


def _corr(key: tuple) -> Fraction:
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    g, exps = key
    n = len(exps)
    if g < 0 or not _stable(g, n) or sum(exps) != 3 * g - 3 + n:
        return Fraction(0)
    if key == (0, (0, 0, 0)):
        val = Fraction(1)
    elif key == (1, (1,)):
        # <tau_1>_1 = <tau_2 tau_0>_1 (string), then DVV on tau_2 is linear in <tau_1>_1
        coef, const = Fraction(0), Fraction(0)
        for c, keys in _dvv_terms(1, (2, 0)):
            if keys == [(1, (1,))]:
                coef += c
            else:
                prod = c
                for kk in keys:
                    prod *= _corr(kk)
                const += prod
        val = const / (1 - coef)
    else:
        val = Fraction(0)
        for c, keys in _dvv_terms(g, exps):
            prod = c
            for kk in keys:
                if prod == 0:
                    break
                prod *= _corr(kk)
            val += prod
    _MEMO[key] = val
    if _STORE is not None:
        _STORE.put(key, val)
    return val


def psi_integral(g: int, exponents: Sequence[int]) -> Fraction:
    """<tau_{a_1} ... tau_{a_n}>_g, zero on dimension mismatch."""
    n = len(exponents)
    if any(a < 0 for a in exponents):
        raise ValueError("negative psi exponent")
    if not _stable(g, n):
        raise UnstableError(f"moduli space M_{{{g},{n}}} is unstable")
    return _corr(_key(g, exponents))


def genus0_closed(exponents: Sequence[int]) -> Fraction:
    n = len(exponents)
    if n < 3:
        raise UnstableError("genus-0 closed form needs n >= 3")
    if sum(exponents) != n - 3:
        return Fraction(0)
    den = 1
    for a in exponents:
        den *= factorial(a)
    return Fraction(factorial(n - 3), den)


def memo_items():
    return dict(_MEMO)


def clear_memo():
    _MEMO.clear()


# on-disk cache


def key_string(key: tuple) -> str:
    g, exps = key
    return f"g={g};psi={','.join(map(str, exps))}"


def parse_key_string(s: str) -> tuple:
    parts = dict(p.split("=", 1) for p in s.split(";"))
    exps = tuple(int(x) for x in parts["psi"].split(",") if x != "")
    return (int(parts["g"]), exps)


def _checksum(ks: str, vs: str) -> str:
    return hashlib.sha256(f"{ks}|{vs}".encode()).hexdigest()[:16]


class PsiStore:
    """Append-only JSON-lines store of psi-integral values.

    Each line carries a checksum over key and value.  Appends take an
    exclusive lock so concurrent writers serialize; duplicate keys are
    harmless because values are deterministic.
    """

    FILENAME = "psi_cache.jsonl"

    def __init__(self, directory):
        self.dir = Path(directory)
        self.path = self.dir / self.FILENAME
        self._known = set()

    def entries(self):
        """Yield (key_string, value_string, ok) for every stored line."""
        if not self.path.exists():
            return
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    ok = rec.get("sha") == _checksum(rec["key"], rec["value"])
                    yield rec["key"], rec["value"], ok
                except (json.JSONDecodeError, KeyError, TypeError):
                    yield line, None, False

    def load(self) -> dict:
        out = {}
        for ks, vs, ok in self.entries():
            if ok:
                out[parse_key_string(ks)] = parse_fraction(vs)
        self._known = {key_string(k) for k in out}
        return out

    def put(self, key: tuple, value: Fraction):
        ks = key_string(key)
        if ks in self._known:
            return
        vs = frac_str(value)
        self.dir.mkdir(parents=True, exist_ok=True)
        line = json.dumps({"key": ks, "value": vs, "sha": _checksum(ks, vs)}) + "\n"
        with open(self.path, "a") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.write(line)
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
        self._known.add(ks)

    def clear(self):
        if self.path.exists():
            with open(self.path, "w") as fh:
                fcntl.flock(fh, fcntl.LOCK_EX)
                fh.truncate(0)
                fcntl.flock(fh, fcntl.LOCK_UN)
        self._known = set()


def attach_store(store: PsiStore | None):
    """Use ``store`` for persistence; verified entries seed the memo."""
    global _STORE
    _STORE = store
    if store is not None:
        for k, v in store.load().items():
            _MEMO.setdefault(k, v)


def default_cache_dir() -> Path:
    env = os.environ.get("TORICGW_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "toricgw"


# Hodge integrals


@dataclass(frozen=True, order=True)
class HodgeKey:
    """Key for int psi^a lambda_1^{k_1} ... lambda_g^{k_g} over M_{g,n}."""

    genus: int
    psi: tuple
    lam: tuple

    @classmethod
    def make(cls, genus: int, psi: Iterable[int], lam: Iterable[int] = ()) -> "HodgeKey":
        lam = list(lam)
        if len(lam) > genus:
            if any(lam[genus:]):
                raise ValueError(f"lambda_{len(lam)} does not exist in genus {genus}")
            lam = lam[:genus]
        lam += [0] * (genus - len(lam))
        return cls(int(genus), tuple(sorted((int(a) for a in psi), reverse=True)), tuple(int(k) for k in lam))

    @property
    def n(self) -> int:
        return len(self.psi)

    def degree(self) -> int:
        return sum(self.psi) + sum((j + 1) * k for j, k in enumerate(self.lam))

    def dimension(self) -> int:
        return 3 * self.genus - 3 + self.n

    def dimension_ok(self) -> bool:
        return self.degree() == self.dimension()

    def has_lambda(self) -> bool:
        return any(self.lam)

    def __str__(self):
        lam = ",".join(map(str, self.lam))
        return f"g={self.genus};psi=({','.join(map(str, self.psi))});lambda=({lam})"

    def to_json(self) -> dict:
        return {"genus": self.genus, "psi": list(self.psi), "lambda": list(self.lam)}


class Missing:
    """Result placeholder listing table entries that were not available."""

    def __init__(self, keys: Iterable = ()):
        self.keys = frozenset(keys)

    def merge(self, other: "Missing") -> "Missing":
        return Missing(self.keys | other.keys)

    def sorted_keys(self) -> list:
        return sorted(self.keys, key=lambda k: (type(k).__name__, str(k)))

    def __bool__(self):
        return True

    def __repr__(self):
        return f"Missing({[str(k) for k in self.sorted_keys()]})"


class HodgeTable:
    """Exact values of Hodge integrals with per-entry provenance notes."""

    def __init__(self, entries: dict | None = None, notes: dict | None = None):
        self.entries: dict = {}
        self.notes: dict = {}
        for k, v in (entries or {}).items():
            self.set(k, v, (notes or {}).get(k, ""))

    def set(self, key: HodgeKey, value, note: str = ""):
        value = Fraction(value)
        if key.genus == 0 and key.has_lambda() and value != 0:
            raise ValueError(f"{key}: genus-0 lambda integrals vanish")
        self.entries[key] = value
        self.notes[key] = note

    def get(self, key: HodgeKey):
        return self.entries.get(key)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    @classmethod
    def load(cls, path) -> "HodgeTable":
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = data.get("entries", [])
        t = cls()
        for rec in data:
            if "group" in rec:
                continue  # twisted entries belong to HurwitzHodgeTable
            key = HodgeKey.make(rec["genus"], rec["psi"], rec.get("lambda", []))
            t.set(key, parse_fraction(rec["value"]), rec.get("note", ""))
        return t

    def to_json(self) -> list:
        return [
            dict(k.to_json(), value=frac_str(v), note=self.notes.get(k, ""))
            for k, v in sorted(self.entries.items())
        ]

    def merged(self, other: "HodgeTable") -> "HodgeTable":
        t = HodgeTable(dict(self.entries), dict(self.notes))
        for k, v in other.entries.items():
            t.set(k, v, other.notes.get(k, ""))
        return t


def hodge_integral(key: HodgeKey, table: HodgeTable | None = None):
    """Value of the key, or Missing([key]) when a table entry is needed."""
    if not key.dimension_ok():
        return Fraction(0)
    if not key.has_lambda():
        return psi_integral(key.genus, key.psi)
    if key.genus == 0:
        return Fraction(0)
    if table is not None:
        v = table.get(key)
        if v is not None:
            return v
    return Missing([key])


# vertex integrals


@dataclass
class VertexSpec:
    """Data of one vertex moduli space.

    ``flags`` lists (direction, degree) for each incident edge, so the flag
    variable is weights[direction]/degree.  ``markings`` lists descendant
    exponents of the marked points at the vertex.
    """

    genus: int
    weights: list
    flags: list
    markings: list = field(default_factory=list)

    @classmethod
    def from_partitions(cls, genus, weights, partitions, markings=()):
        flags = [(j, d) for j, mu in enumerate(partitions) for d in mu]
        return cls(genus, list(weights), flags, list(markings))

    @property
    def valence(self) -> int:
        return len(self.flags)

    @property
    def n_special(self) -> int:
        return len(self.flags) + len(self.markings)

    def flag_variables(self) -> list:
        return [self.weights[j].scale(Fraction(1, d)).to_rf() for j, d in self.flags]

    def is_stable(self) -> bool:
        return _stable(self.genus, self.n_special)


def unstable_convention(kind: str, w1, w2=None, a: int = 0) -> RationalFunction:
    """Values assigned to the unstable moduli M_{0,1} and M_{0,2}."""
    w1 = w1.to_rf() if isinstance(w1, WeightVector) else w1
    if kind == "val1":
        return w1
    if kind == "val2":
        w2 = w2.to_rf() if isinstance(w2, WeightVector) else w2
        return (w1 + w2).inverse()
    if kind == "marked1":
        if a < 0:
            raise ValueError("descendant power must be nonnegative")
        return (-w1) ** a
    raise ValueError(f"unknown unstable vertex kind {kind!r}")


def _lambda_expansion(genus: int, weights: list, max_degree: int) -> dict:
    """prod_j Lambda_g^dual(w_j) as {lambda exponent tuple: coefficient}."""
    nv = weights[0].rank if weights else 1
    out = {tuple([0] * genus): RationalFunction.one(nv)}
    if genus == 0:
        return out
    for w in weights:
        wr = w.to_rf()
        powers = [RationalFunction.one(nv)]
        for _ in range(genus):
            powers.append(powers[-1] * wr)
        new = {}
        for mono, c in out.items():
            for i in range(genus + 1):
                m = list(mono)
                if i:
                    m[i - 1] += 1
                deg = sum((j + 1) * k for j, k in enumerate(m))
                if deg > max_degree:
                    continue
                term = c * powers[genus - i]
                if i % 2:
                    term = -term
                key = tuple(m)
                new[key] = new[key] + term if key in new else term
        out = {k: v for k, v in new.items() if not v.is_zero()}
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _expand_stable(spec: VertexSpec, flag_vars: list, table, collect_only=False):
    g = spec.genus
    n = spec.n_special
    dim = 3 * g - 3 + n
    nv = spec.weights[0].rank
    lam = _lambda_expansion(g, spec.weights, dim)
    inv = [fv.inverse() for fv in flag_vars]
    inv_pows: list[list] = [[RationalFunction.one(nv)] for _ in flag_vars]
    total = RationalFunction.zero(nv)
    missing = set()
    need = set()
    base_a = sum(spec.markings)
    for mono, coef in sorted(lam.items()):
        ldeg = sum((j + 1) * k for j, k in enumerate(mono))
        rem = dim - ldeg - base_a
        if rem < 0:
            continue
        acc = RationalFunction.zero(nv)
        for ks in _compositions(rem, len(flag_vars)):
            key = HodgeKey.make(g, list(ks) + list(spec.markings), mono)
            if key.has_lambda():
                need.add(key)
                if collect_only:
                    continue
            if collect_only:
                continue
            val = hodge_integral(key, table)
            if isinstance(val, Missing):
                missing |= val.keys
                continue
            if val == 0:
                continue
            term = RationalFunction.constant(nv, val)
            for e, k in enumerate(ks):
                while len(inv_pows[e]) <= k + 1:
                    inv_pows[e].append(inv_pows[e][-1] * inv[e])
                term = term * inv_pows[e][k + 1]
            acc = acc + term
        if not collect_only and not acc.is_zero():
            total = total + coef * acc
    if collect_only:
        return need
    if missing:
        return Missing(missing)
    return total


def vertex_integral(spec: VertexSpec, table: HodgeTable | None = None, flag_vars=None):
    """int prod_j Lambda_g^dual(w_j) prod psi^a / prod_e (w_e - psi_e).

    Unstable vertices use the conventions of :func:`unstable_convention`.
    ``flag_vars`` overrides the flag variables (used by the orbifold code).
    """
    fv = flag_vars if flag_vars is not None else spec.flag_variables()
    if not spec.is_stable():
        if spec.genus != 0:
            raise UnstableError("unstable vertex of positive genus")
        if len(fv) == 1 and not spec.markings:
            return unstable_convention("val1", fv[0])
        if len(fv) == 2 and not spec.markings:
            return unstable_convention("val2", fv[0], fv[1])
        if len(fv) == 1 and len(spec.markings) == 1:
            return unstable_convention("marked1", fv[0], a=spec.markings[0])
        raise UnstableError("vertex without edges")
    return _expand_stable(spec, fv, table)


def vertex_bracket(spec: VertexSpec, table: HodgeTable | None = None):
    """The bracket with prod_i w_i^{l(mu)-1} included, i.e. w(sigma)^{val-1} times vertex_integral."""
    val = vertex_integral(spec, table)
    if isinstance(val, Missing):
        return val
    wsig = RationalFunction.one(spec.weights[0].rank)
    for w in spec.weights:
        wsig = wsig * w.to_rf()
    return val * wsig ** (spec.valence - 1)


def required_integrals(specs: Iterable[VertexSpec]) -> list:
    """Deduplicated Hodge keys needed to evaluate the given vertices."""
    need = set()
    for spec in specs:
        if spec.is_stable() and spec.genus > 0:
            need |= _expand_stable(spec, spec.flag_variables(), None, collect_only=True)
    return sorted(need)
