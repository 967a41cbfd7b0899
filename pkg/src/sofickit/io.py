"""JSON (de)serialization for every persisted object.

Rationals are always written as lowest-terms ``"p/q"`` strings.  Readers
raise :class:`SchemaError` on anything malformed.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

from .embed import AlmostMorphism, Defect
from .errors import SofickitError
from .measured import WeightedSpace
from .pbij import PartialBijection
from .relation import FiniteRelation, LocalIso, make_relation


class SchemaError(SofickitError, ValueError):
    pass


def rat(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rat(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise SchemaError(f"expected a 'p/q' string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {s!r}") from exc


def _need(obj, key, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise SchemaError(f"field {key!r} has the wrong type")
    return val


# -- partial bijections ------------------------------------------------------------

def pbij_to_json(f: PartialBijection) -> dict:
    return {"n": f.n, "map": [[i, j] for i, j in f.pairs()]}


def pbij_from_json(obj) -> PartialBijection:
    n = _need(obj, "n", int)
    pairs = _need(obj, "map", list)
    try:
        return PartialBijection.from_pairs(n, [(int(i), int(j)) for i, j in pairs])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SofickitError):
            raise
        raise SchemaError(f"bad map entry: {exc}") from exc


# -- spaces and relations ----------------------------------------------------------

def space_to_json(space: WeightedSpace) -> dict:
    return {"atoms": [{"id": a, "weight": rat(w)} for a, w in zip(space.atoms, space.weights)]}


def space_from_json(obj) -> WeightedSpace:
    atoms = _need(obj, "atoms", list)
    ids = [str(_need(a, "id", (str, int))) for a in atoms]
    weights = [parse_rat(_need(a, "weight", (str, int))) for a in atoms]
    return WeightedSpace(tuple(ids), tuple(weights))


def relation_to_json(R: FiniteRelation) -> dict:
    ids = R.space.atoms
    return {"space": space_to_json(R.space), "classes": [[ids[x] for x in c] for c in R.classes]}


def relation_from_json(obj) -> FiniteRelation:
    space = space_from_json(_need(obj, "space", dict))
    classes = _need(obj, "classes", list)
    try:
        return make_relation(space, [[space.index[str(a)] for a in c] for c in classes])
    except KeyError as exc:
        raise SchemaError(f"unknown atom id {exc.args[0]!r}") from None


def localiso_to_json(f: LocalIso) -> dict:
    ids = f.relation.space.atoms
    return {"map": [[ids[i], ids[j]] for i, j in f.map.pairs()]}


def localiso_from_json(obj, R: FiniteRelation) -> LocalIso:
    pairs = _need(obj, "map", list)
    idx = R.space.index
    try:
        table = [(idx[str(a)], idx[str(b)]) for a, b in pairs]
    except KeyError as exc:
        raise SchemaError(f"unknown atom id {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad map entry: {exc}") from exc
    return LocalIso(R, PartialBijection.from_pairs(R.n, table))


# -- morphisms and reports ---------------------------------------------------------

def morphism_to_json(m: AlmostMorphism) -> dict:
    """Entries list the carrier first, then the remaining stored images."""
    keys = list(m.carrier) + [f for f in m.table if f not in set(m.carrier)]
    return {
        "target_n": m.target_n,
        "entries": [{"element": localiso_to_json(f), "image": pbij_to_json(m.table[f])} for f in keys],
        "carrier": list(range(len(m.carrier))),
    }


def morphism_from_json(obj, R: FiniteRelation) -> AlmostMorphism:
    """Read a morphism of ``R``; without ``"carrier"`` every entry is in the carrier."""
    N = _need(obj, "target_n", int)
    entries = _need(obj, "entries", list)
    table = {}
    order = []
    for e in entries:
        f = localiso_from_json(_need(e, "element", dict), R)
        table[f] = pbij_from_json(_need(e, "image", dict))
        order.append(f)
    carrier_idx = obj.get("carrier")
    if carrier_idx is None:
        carrier = order
    else:
        if not isinstance(carrier_idx, list) or not all(isinstance(i, int) and 0 <= i < len(order) for i in carrier_idx):
            raise SchemaError("carrier must list entry indices")
        carrier = [order[i] for i in carrier_idx]
    return AlmostMorphism(R, tuple(carrier), N, table)


def choice_system_to_json(cs) -> dict:
    return {"psi": [localiso_to_json(p) for p in cs.psi]}


def defect_report(d: Defect, seed: int | None = None) -> dict:
    out = {
        "eps_mult": rat(d.eps_mult),
        "eps_trace": rat(d.eps_trace),
        "worst_pair": list(d.worst_pair) if d.worst_pair is not None else [],
    }
    if seed is not None:
        out["seed"] = seed
    return out


def stamp(report: dict) -> dict:
    """Copy of ``report`` with a UTC timestamp, the only nondeterministic field."""
    return {**report, "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}


# -- files ---------------------------------------------------------------------

def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)
