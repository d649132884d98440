"""Smooth fields of stresses, forces and jet sections.

A field is a :class:`SmoothMap` whose outputs are the flat components of a
value type, in the order listed by :func:`component_keys`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..jetfield.jets import JetPoint
from ..jetfield.maps import PolyMap, SmoothMap, map_from_json
from ..multiindex import MultiIndex
from .values import BodyForce, NonHolStress, TractionStress, VariationalStress, component_keys, flat_size

__all__ = ["Field", "field_from_json", "field_to_json", "zero_field"]

_VALUE = {
    "variational": lambda n, m, k, v: VariationalStress(n, m, k, v),
    "traction": lambda n, m, k, v: TractionStress(n, m, k, v),
    "nonholonomic": lambda n, m, k, v: NonHolStress.from_flat(n, m, k, v),
    "bodyforce": lambda n, m, k, v: BodyForce(n, m, k, v),
}


@dataclass(frozen=True, eq=False)
class Field:
    kind: str
    n: int
    m: int
    k: int
    map: SmoothMap

    def __post_init__(self):
        size = flat_size(self.kind, self.n, self.m, self.k)
        if self.map.n_out != size or self.map.n_in != self.n:
            raise ValueError(
                f"{self.kind} field with (n, m, k) = {(self.n, self.m, self.k)} needs a map R^{self.n} -> R^{size}, "
                f"got R^{self.map.n_in} -> R^{self.map.n_out}"
            )

    def at(self, x):
        """Value object at ``x`` (jet sections give a ``(m, N_{k-1})`` JetPoint)."""
        v = self.map(np.asarray(x, dtype=float))
        if self.kind == "jetsection":
            return JetPoint(self.n, self.m, self.k - 1, v)
        return _VALUE[self.kind](self.n, self.m, self.k, v)

    def values_batch(self, X) -> np.ndarray:
        return self.map.values_batch(X)

    def jet_batch(self, X, order: int) -> np.ndarray:
        return self.map.jet_batch(X, order)

    def keys(self) -> list[dict]:
        return component_keys(self.kind, self.n, self.m, self.k)


def zero_field(kind: str, n: int, m: int, k: int) -> Field:
    return Field(kind, n, m, k, PolyMap.zeros(n, flat_size(kind, n, m, k)))


def _match(desc: dict, comp: dict) -> bool:
    if int(comp["alpha"]) != desc["alpha"] or list(comp["index"]) != desc["index"]:
        return False
    if "slot" in desc and int(comp.get("slot", -1)) != desc["slot"]:
        return False
    if "part" in desc and comp.get("part", "P") != desc["part"]:
        return False
    return True


def field_from_json(data: dict) -> Field:
    """Parse ``{n, m, k, kind, components: [{alpha, index, slot?, part?, expr}]}``.

    Components that are not listed are zero.  Index entries are count vectors.
    """
    n, m, k, kind = int(data["n"]), int(data["m"]), int(data["k"]), data["kind"]
    keys = component_keys(kind, n, m, k)
    lookup = {}
    for d_pos, d in enumerate(keys):
        lookup[(d["alpha"], tuple(d["index"]), d.get("slot"), d.get("part"))] = d_pos
    trees = [0] * len(keys)
    for comp in data.get("components", []):
        MultiIndex(tuple(comp["index"]))  # validates counts
        if len(comp["index"]) != n:
            raise ValueError(f"index {comp['index']} does not have n={n} entries")
        part = comp.get("part", "P") if kind == "nonholonomic" else None
        slot = comp.get("slot")
        slot = int(slot) if slot is not None else None
        key = (int(comp["alpha"]), tuple(comp["index"]), slot, part)
        if key not in lookup:
            raise ValueError(f"component {comp} is not part of a {kind} field with (n, m, k) = {(n, m, k)}")
        trees[lookup[key]] = comp["expr"]
    return Field(kind, n, m, k, map_from_json(trees, n))


def field_to_json(field: Field) -> dict:
    trees = field.map.to_json()
    comps = []
    for d, t in zip(field.keys(), trees):
        if isinstance(t, (int, float)) and t == 0:
            continue
        if isinstance(t, dict) and t.get("op") == "poly" and not t["terms"]:
            continue
        entry = {k: v for k, v in d.items() if k != "key"}
        entry["expr"] = t
        comps.append(entry)
    return {"n": field.n, "m": field.m, "k": field.k, "kind": field.kind, "components": comps}
