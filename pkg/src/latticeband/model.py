"""Lattice model definition, validation, canonicalization, and the built-in models.

A model is a unit cell: an ordered list of point masses (one scalar
displacement coordinate each) plus springs. Each spring connects node ``a``
in the reference cell to node ``b`` in the cell displaced by an integer
``offset`` (length = lattice dimension); ``offset = 0`` means both ends live
in the same cell. Only topology and stiffness matter; masses have no
geometric positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    Diagnostic,
    LatticeBandError,
    ModelError,
    NegativeValue,
    UnknownBuiltin,
    UnknownConstantName,
    ZeroSelfSpring,
)

# Default stiffness values for built-ins: K_i = i-th prime. Distinct
# incommensurate values make index-transposition bugs visible in the
# per-offset block checks.
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
           53, 59, 61, 67, 71, 73, 79, 83, 89, 97)

BUILTIN_NAMES = ("mono1d", "chain2n", "trichain3", "penta2d")


@dataclass(frozen=True)
class MassNode:
    id: str
    mass: float


@dataclass(frozen=True)
class Spring:
    """Spring of stiffness ``k`` from node ``a`` (reference cell) to node ``b``
    (cell displaced by ``offset``). ``label`` is an optional handle for
    constant overrides (built-ins use K1..K25)."""

    a: str
    b: str
    offset: tuple[int, ...]
    k: float
    label: str | None = None


@dataclass(frozen=True)
class LatticeModel:
    """Immutable unit-cell description. Node order fixes coordinate indices."""

    name: str
    dimension: int
    nodes: tuple[MassNode, ...]
    springs: tuple[Spring, ...]

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    @property
    def n(self) -> int:
        return len(self.nodes)

    def masses(self) -> list[float]:
        return [node.mass for node in self.nodes]


def canonicalize(spring: Spring, node_index: Mapping[str, int]) -> Spring:
    """Return the physically identical spring in canonical form.

    Canonical means: first nonzero offset component positive, or (for zero
    offsets) endpoint ids in node order. A spring is undirected, so
    (a, b, offset) and (b, a, -offset) describe the same spring.

    Raises ZeroSelfSpring for a zero-offset self loop (physically null).
    """
    if all(c == 0 for c in spring.offset):
        if spring.a == spring.b:
            raise ZeroSelfSpring(
                f"spring {spring.a}->{spring.b} with zero offset is null"
            )
        if node_index[spring.a] > node_index[spring.b]:
            return replace(spring, a=spring.b, b=spring.a)
        return spring
    first = next(c for c in spring.offset if c != 0)
    if first < 0:
        return replace(
            spring,
            a=spring.b,
            b=spring.a,
            offset=tuple(-c for c in spring.offset),
        )
    return spring


def validate(model: LatticeModel) -> list[Diagnostic]:
    """Check all model invariants. Returns diagnostics; never raises.

    An empty error list means the model is usable by the assembly and
    oracle modules. Isolated nodes are only warned about (they contribute
    a flat band at omega = 0).
    """
    diags: list[Diagnostic] = []

    if model.dimension not in (1, 2, 3):
        diags.append(Diagnostic("error", "InvalidDimension",
                                f"dimension must be 1, 2 or 3, got {model.dimension}"))

    seen = set()
    for node in model.nodes:
        if node.id in seen:
            diags.append(Diagnostic("error", "DuplicateNodeId",
                                    f"node id {node.id!r} appears more than once"))
        seen.add(node.id)
        if not node.mass > 0:
            diags.append(Diagnostic("error", "NonPositiveMass",
                                    f"node {node.id!r} has mass {node.mass}"))

    touched: set[str] = set()
    for i, s in enumerate(model.springs):
        where = s.label or f"spring #{i}"
        for end in (s.a, s.b):
            if end not in seen:
                diags.append(Diagnostic("error", "UnknownNodeId",
                                        f"{where} references unknown node {end!r}"))
        if len(s.offset) != model.dimension:
            diags.append(Diagnostic("error", "OffsetDimensionMismatch",
                                    f"{where} has offset {s.offset} but dimension "
                                    f"is {model.dimension}"))
        if s.k < 0:
            diags.append(Diagnostic("error", "NegativeStiffness",
                                    f"{where} has k = {s.k}"))
        if all(c == 0 for c in s.offset) and s.a == s.b:
            diags.append(Diagnostic("error", "ZeroSelfSpring",
                                    f"{where} connects {s.a!r} to itself with zero offset"))
        touched.update((s.a, s.b))

    for node in model.nodes:
        if node.id not in touched:
            diags.append(Diagnostic("warning", "IsolatedNode",
                                    f"node {node.id!r} has no incident spring "
                                    "(flat band at omega = 0)"))
    return diags


def canonicalize_model(model: LatticeModel) -> LatticeModel:
    """Canonicalize every spring, merge duplicates by summing k, sort.

    Duplicate (a, b, offset) triples are physically parallel springs; their
    stiffnesses add. The first label encountered wins. Springs are sorted by
    (offset, endpoint indices) so equal models have equal representations.
    """
    index = model.node_index
    merged: dict[tuple[str, str, tuple[int, ...]], Spring] = {}
    for s in model.springs:
        c = canonicalize(s, index)
        key = (c.a, c.b, c.offset)
        if key in merged:
            old = merged[key]
            merged[key] = replace(old, k=old.k + c.k)
        else:
            merged[key] = c
    ordered = sorted(merged.values(),
                     key=lambda s: (s.offset, index[s.a], index[s.b]))
    return replace(model, springs=tuple(ordered))


def build_model(
    name: str,
    dimension: int,
    nodes: Iterable[MassNode],
    springs: Iterable[Spring],
) -> LatticeModel:
    """Validate and canonicalize a model; raise ModelError on any error."""
    raw = LatticeModel(name, dimension, tuple(nodes), tuple(springs))
    diags = validate(raw)
    if any(d.severity == "error" for d in diags):
        raise ModelError(diags)
    return canonicalize_model(raw)


def require_valid(model: LatticeModel) -> None:
    """Raise ModelError unless the model validates with zero errors."""
    diags = [d for d in validate(model) if d.severity == "error"]
    if diags:
        raise ModelError(diags)


def _k(i: int) -> float:
    return float(_PRIMES[i - 1])


def builtin(name: str) -> LatticeModel:
    """Return one of the four reference models.

    mono1d     1-D single-mass chain, nearest neighbor only.
    chain2n    1-D single-mass chain with 1st and 2nd neighbor springs.
    trichain3  1-D three-mass chain, interactions up to the 3rd neighbor.
    penta2d    2-D five-mass lattice with 25 springs over 8 cell offsets.

    All masses default to 1 and stiffness K_i defaults to the i-th prime;
    use override_constants (or the CLI --set flag) for other values.
    """
    if name == "mono1d":
        return build_model(
            "mono1d", 1,
            [MassNode("m", 1.0)],
            [Spring("m", "m", (1,), _k(1), "K1")],
        )
    if name == "chain2n":
        return build_model(
            "chain2n", 1,
            [MassNode("m", 1.0)],
            [Spring("m", "m", (1,), _k(1), "K1"),
             Spring("m", "m", (2,), _k(2), "K2")],
        )
    if name == "trichain3":
        return build_model(
            "trichain3", 1,
            [MassNode("m1", 1.0), MassNode("m2", 1.0), MassNode("m3", 1.0)],
            [Spring("m1", "m2", (0,), _k(1), "K1"),
             Spring("m2", "m3", (0,), _k(2), "K2"),
             Spring("m3", "m1", (1,), _k(3), "K3"),
             Spring("m1", "m3", (0,), _k(4), "K4"),
             Spring("m1", "m1", (2,), _k(5), "K5"),
             Spring("m2", "m2", (2,), _k(6), "K6"),
             Spring("m3", "m3", (3,), _k(7), "K7")],
        )
    if name == "penta2d":
        nodes = [MassNode(f"m{i}", 1.0) for i in range(1, 6)]
        # (offset, a, b, stiffness index); connectivity per the five-mass
        # lattice's interaction tables, one entry per drawn spring.
        table = [
            ((0, 0), "m1", "m2", 1),
            ((0, 0), "m2", "m3", 2),
            ((0, 0), "m3", "m4", 3),
            ((0, 0), "m1", "m4", 4),
            ((0, 0), "m4", "m5", 8),
            ((1, 0), "m3", "m5", 7),
            ((1, 0), "m5", "m5", 10),
            ((0, 1), "m1", "m5", 5),
            ((0, 1), "m5", "m5", 9),
            ((1, 1), "m2", "m5", 6),
            ((2, 0), "m1", "m1", 11),
            ((2, 0), "m1", "m4", 12),
            ((2, 0), "m4", "m4", 13),
            ((2, 0), "m4", "m5", 14),
            ((2, 0), "m5", "m5", 15),
            ((2, 1), "m1", "m1", 16),
            ((2, 1), "m1", "m4", 17),
            ((2, 1), "m4", "m4", 18),
            ((2, 1), "m5", "m5", 19),
            ((0, 2), "m1", "m1", 20),
            ((0, 2), "m4", "m4", 21),
            ((0, 2), "m5", "m5", 22),
            ((1, 2), "m1", "m1", 23),
            ((1, 2), "m1", "m4", 24),
            ((1, 2), "m4", "m5", 25),
        ]
        springs = [Spring(a, b, off, _k(i), f"K{i}") for off, a, b, i in table]
        return build_model("penta2d", 2, nodes, springs)
    raise UnknownBuiltin(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")


def override_constants(model: LatticeModel, assignments: Mapping[str, float]) -> LatticeModel:
    """Return a copy of the model with substituted stiffnesses and/or masses.

    Each name must match exactly one spring label (sets k) or node id (sets
    mass). Raises UnknownConstantName / NegativeValue. The original model is
    untouched; distinct names compose order-independently.
    """
    labels = {s.label for s in model.springs if s.label is not None}
    ids = {node.id for node in model.nodes}

    springs = list(model.springs)
    nodes = list(model.nodes)
    for name, value in assignments.items():
        value = float(value)
        if name in labels and name in ids:
            raise LatticeBandError(
                f"{name!r} names both a spring and a node; rename one in the model file"
            )
        if name in labels:
            if value < 0:
                raise NegativeValue(f"stiffness {name} = {value} < 0")
            springs = [replace(s, k=value) if s.label == name else s for s in springs]
        elif name in ids:
            if value <= 0:
                raise NegativeValue(f"mass {name} = {value} <= 0")
            nodes = [replace(nd, mass=value) if nd.id == name else nd for nd in nodes]
        else:
            raise UnknownConstantName(
                f"{name!r} matches no spring label and no node id in {model.name!r}"
            )
    return canonicalize_model(replace(model, nodes=tuple(nodes), springs=tuple(springs)))


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------

def model_to_dict(model: LatticeModel) -> dict:
    springs = []
    for s in model.springs:
        entry = {"a": s.a, "b": s.b, "offset": list(s.offset), "k": s.k}
        if s.label is not None:
            entry["label"] = s.label
        springs.append(entry)
    return {
        "name": model.name,
        "dimension": model.dimension,
        "nodes": [{"id": node.id, "mass": node.mass} for node in model.nodes],
        "springs": springs,
    }


def dumps_model(model: LatticeModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def save_model(model: LatticeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def model_from_dict(data: dict) -> LatticeModel:
    """Build a model from parsed JSON; canonicalizes and merges duplicates.

    Non-canonical spring orientation is accepted. Springs without a "label"
    get S1, S2, ... in file order so --set can address them by index.
    """
    try:
        name = str(data["name"])
        dimension = int(data["dimension"])
        nodes = [MassNode(str(nd["id"]), float(nd["mass"])) for nd in data["nodes"]]
        springs = []
        for i, sp in enumerate(data["springs"]):
            label = sp.get("label")
            springs.append(
                Spring(
                    str(sp["a"]),
                    str(sp["b"]),
                    tuple(int(c) for c in sp["offset"]),
                    float(sp["k"]),
                    str(label) if label is not None else f"S{i + 1}",
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError([Diagnostic("error", "MalformedModel", str(exc))]) from exc
    return build_model(name, dimension, nodes, springs)


def loads_model(text: str) -> LatticeModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError([Diagnostic("error", "MalformedModel", f"bad JSON: {exc}")]) from exc
    return model_from_dict(data)


def load_model(path) -> LatticeModel:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())
