"""Divisor configurations as decorated intersection graphs.

A configuration is a list of components (homology class + genus) together
with a multiset of edges between component ids.  Edge multiplicity between
two components must equal the intersection pairing of their classes, and
all pairings must be non-negative.  Genus is forced by adjunction since
components are embedded surfaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lattice import (
    AmbientLattice,
    AreaVector,
    HomologyClass,
    adjunction_genus,
    area,
    canonical,
    pair,
)


class DivisorError(ValueError):
    pass


@dataclass(frozen=True)
class DivisorComponent:
    id: str
    cls: HomologyClass
    genus: int


@dataclass(frozen=True)
class DivisorConfig:
    ambient: AmbientLattice
    components: tuple[DivisorComponent, ...]
    edges: tuple[tuple[str, str], ...]

    @staticmethod
    def build(ambient: AmbientLattice, components, edges) -> "DivisorConfig":
        """components: iterable of (id, cls) or (id, cls, genus); genus
        defaults to the adjunction value of the class."""
        comps = []
        for item in components:
            if len(item) == 2:
                cid, cls = item
                g = adjunction_genus(cls)
                if g is None:
                    raise DivisorError(f"component {cid}: class admits no embedded genus")
            else:
                cid, cls, g = item
            comps.append(DivisorComponent(str(cid), cls, int(g)))
        comps.sort(key=lambda c: c.id)
        norm_edges = tuple(sorted(tuple(sorted((str(a), str(b)))) for a, b in edges))
        return DivisorConfig(ambient, tuple(comps), norm_edges)

    def component(self, cid: str) -> DivisorComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise DivisorError(f"no component with id {cid!r}")

    def has_component(self, cid: str) -> bool:
        return any(c.id == cid for c in self.components)

    def ids(self) -> list[str]:
        return [c.id for c in self.components]

    def edge_multiplicity(self, a: str, b: str) -> int:
        key = tuple(sorted((a, b)))
        return sum(1 for e in self.edges if e == key)

    def degree(self, cid: str) -> int:
        return sum(1 for a, b in self.edges if cid in (a, b))

    def neighbors(self, cid: str) -> list[str]:
        out = []
        for a, b in self.edges:
            if a == cid:
                out.append(b)
            elif b == cid:
                out.append(a)
        return out

    def replace_class(self, cid: str, cls: HomologyClass, genus: int | None = None) -> "DivisorConfig":
        comps = []
        for c in self.components:
            if c.id == cid:
                g = genus if genus is not None else adjunction_genus(cls)
                if g is None:
                    raise DivisorError(f"component {cid}: class admits no embedded genus")
                comps.append(DivisorComponent(cid, cls, g))
            else:
                comps.append(c)
        return DivisorConfig(self.ambient, tuple(comps), self.edges)

    def without_component(self, cid: str) -> "DivisorConfig":
        comps = tuple(c for c in self.components if c.id != cid)
        edges = tuple(e for e in self.edges if cid not in e)
        return DivisorConfig(self.ambient, comps, edges)


# -- validation --------------------------------------------------------------


def validate(config: DivisorConfig, w: AreaVector | None = None) -> list[str]:
    """Return the list of violated invariants; empty means valid."""
    problems: list[str] = []
    if not config.components:
        problems.append("configuration is empty")
        return problems

    seen = set()
    for c in config.components:
        if c.id in seen:
            problems.append(f"duplicate component id {c.id!r}")
        seen.add(c.id)
        if c.cls.ambient != config.ambient:
            problems.append(f"component {c.id}: class lives in a different ambient")
            return problems
        g = adjunction_genus(c.cls)
        if g is None:
            problems.append(f"component {c.id}: class {c.cls} admits no embedded genus")
        elif g != c.genus:
            problems.append(
                f"component {c.id}: declared genus {c.genus} but adjunction forces {g}"
            )
        if w is not None and area(c.cls, w) <= 0:
            problems.append(f"component {c.id}: non-positive area {area(c.cls, w)}")

    for a, b in config.edges:
        if a == b:
            problems.append(f"self-edge on component {a!r}")
        for cid in (a, b):
            if cid not in seen:
                problems.append(f"edge references unknown component {cid!r}")
                return problems

    comps = list(config.components)
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            p = pair(comps[i].cls, comps[j].cls)
            m = config.edge_multiplicity(comps[i].id, comps[j].id)
            if p < 0:
                problems.append(
                    f"components {comps[i].id},{comps[j].id}: negative pairing {p}"
                )
            elif m != p:
                problems.append(
                    f"components {comps[i].id},{comps[j].id}: {m} edges but pairing {p}"
                )
    return problems


def require_valid(config: DivisorConfig, w: AreaVector | None = None) -> None:
    problems = validate(config, w)
    if problems:
        raise DivisorError("invalid configuration: " + "; ".join(problems))


# -- graph helpers -----------------------------------------------------------


def connected_components(config: DivisorConfig) -> list[list[str]]:
    ids = config.ids()
    remaining = set(ids)
    out = []
    while remaining:
        start = next(i for i in ids if i in remaining)
        stack = [start]
        comp = []
        remaining.discard(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in config.neighbors(v):
                if u in remaining:
                    remaining.discard(u)
                    stack.append(u)
        out.append(sorted(comp))
    return out


def is_connected(config: DivisorConfig) -> bool:
    return len(connected_components(config)) == 1


def first_betti(config: DivisorConfig) -> int:
    """dim H1 of the dual graph: E - V + #components (edges with multiplicity)."""
    return len(config.edges) - len(config.components) + len(connected_components(config))


# -- total class and genus ----------------------------------------------------


def total_class(config: DivisorConfig) -> HomologyClass:
    out = config.ambient.zero()
    for c in config.components:
        out = out + c.cls
    return out


def total_genus_parts(config: DivisorConfig) -> tuple[int, int]:
    """(closed adjunction formula, graph formula); they agree on valid input."""
    d = total_class(config)
    closed = (pair(d, d) + pair(canonical(config.ambient), d)) // 2 + 1
    graph = (
        sum(c.genus for c in config.components)
        + first_betti(config)
        - len(connected_components(config))
        + 1
    )
    return closed, graph


def total_genus(config: DivisorConfig) -> int:
    closed, graph = total_genus_parts(config)
    if closed != graph:
        raise DivisorError(
            f"total genus disagreement: adjunction gives {closed}, graph gives {graph}"
        )
    return closed


# -- smoothing ----------------------------------------------------------------


@dataclass(frozen=True)
class SmoothedSurface:
    cls: HomologyClass
    genus: int
    source_ids: tuple[str, ...]


def smooth_all(config: DivisorConfig) -> list[SmoothedSurface]:
    """Smooth every intersection point: one surface per connected sub-graph,
    with class the sum of classes and genus the sum of genera plus the
    cycle rank of that sub-graph."""
    out = []
    for group in connected_components(config):
        ids = set(group)
        cls = config.ambient.zero()
        genus_sum = 0
        n_edges = 0
        for c in config.components:
            if c.id in ids:
                cls = cls + c.cls
                genus_sum += c.genus
        for a, b in config.edges:
            if a in ids:
                n_edges += 1
        b1 = n_edges - len(group) + 1
        out.append(SmoothedSurface(cls, genus_sum + b1, tuple(group)))
    return out


# -- hypothesis and tree checks -------------------------------------------------


def adjoint_area(config: DivisorConfig, w: AreaVector) -> Fraction:
    return area(canonical(config.ambient) + total_class(config), w)


def check_hypothesis(config: DivisorConfig, w: AreaVector) -> bool:
    """Strict negativity of the adjoint class area, exactly."""
    return adjoint_area(config, w) < 0


def check_tree_of_spheres(config: DivisorConfig, w: AreaVector) -> list[str]:
    """For a connected rational-ambient configuration with negative adjoint
    area: all components are spheres, the graph is a tree, and the total
    class T satisfies T.T + K.T = -2.  Returns violations."""
    problems = []
    for c in config.components:
        if c.genus != 0:
            problems.append(f"component {c.id} has genus {c.genus}, expected sphere")
    if first_betti(config) != 0:
        problems.append("dual graph contains a loop")
    d = total_class(config)
    v = pair(d, d) + pair(canonical(config.ambient), d)
    if v != -2:
        problems.append(f"[D]^2 + K.[D] = {v}, expected -2")
    return problems
