from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from sympdiv.divisor import DivisorConfig, adjoint_area, validate
from sympdiv.lattice import AmbientLattice, AreaVector
from sympdiv.moves import (
    ExteriorBlowup,
    HalfToricBlowup,
    NonToricBlowup,
    ToricBlowup,
    area_after_blowup,
    blowup,
)

FIXTURES = Path(__file__).parent / "fixtures"


def decreasing_areas(amb: AmbientLattice, head=Fraction(1)) -> AreaVector:
    """Sharply decreasing exceptional areas, the generic regime of the
    reduction pipelines."""
    vals = {}
    if amb.kind == "rational_blowup" or amb.kind == "projective_plane":
        vals["H"] = head
    elif amb.kind == "product_of_spheres":
        vals["f1"] = head
        vals["f2"] = head
    elif amb.kind == "ruled_trivial":
        vals["B"] = 20 * head
        vals["F"] = head
    else:
        vals["B1"] = 20 * head
        vals["F"] = head
    for step, i in enumerate(amb.exc_indices, start=1):
        vals[amb.names[i]] = head / 4**step
    return AreaVector(amb, tuple(vals[n] for n in amb.names))


def cp2_13_cusp():
    """A CP2#13 configuration whose reduction finds an (8,3)-cusp class."""
    amb = AmbientLattice.rational_blowup(13)
    c = amb.cls
    comps = [
        ("P1", c(E3=1, E7=-1, E8=-1)),
        ("P2", c(E2=1, E3=-1, E5=-1)),
        ("P3", c(H=2, E1=-1, E2=-1, E5=-1, E6=-1)),
        ("P4", c(H=1, E1=-1)),
        ("P5", c(E1=1, E2=-1, E3=-1, E4=-1, E7=-1)),
        ("Q5", c(E5=1, E6=-1)),
        ("Q6", c(E6=1, E9=-1)),
        ("R9", c(E9=1, E10=-1)),
        ("R10", c(E10=1, E11=-1, E12=-1)),
        ("R11", c(E11=1, E12=-1)),
        ("R12", c(E12=1)),
    ]
    edges = [
        ("P1", "P2"), ("P2", "Q5"), ("Q5", "Q6"), ("Q6", "P3"), ("P3", "P4"),
        ("P4", "P5"), ("Q6", "R9"), ("R9", "R10"), ("R10", "R12"), ("R11", "R12"),
    ]
    cfg = DivisorConfig.build(amb, comps, edges)
    return cfg, decreasing_areas(amb)


def first_kind_cp2_8():
    """Quasi-minimal first-kind pair in CP2#8 whose partially minimal
    reduction lands on the (H-E8, 2H-E8) chain in CP2#1."""
    amb = AmbientLattice.rational_blowup(8)
    c = amb.cls
    comps = [
        ("T1", c(H=1, E1=-1, E8=-1)),
        ("T2", c(H=2, E1=-1, E2=-1, E3=-1, E4=-1, E5=-1, E6=-1, E7=-1, E8=-1)),
        ("X1", c(E1=1, E2=-1)),
        ("X2", c(E2=1, E3=-1)),
        ("X3", c(E3=1)),
    ]
    edges = [("T1", "X1"), ("X1", "X2"), ("X2", "X3"), ("X3", "T2")]
    cfg = DivisorConfig.build(amb, comps, edges)
    return cfg, decreasing_areas(amb)


def second_kind_cp2_4():
    """Quasi-minimal second-kind trident in CP2#4 (blowup of three
    concurrent lines)."""
    amb = AmbientLattice.rational_blowup(4)
    c = amb.cls
    comps = [
        ("D0", c(E4=1)),
        ("U1", c(H=1, E1=-1, E4=-1)),
        ("V1", c(H=1, E2=-1, E4=-1)),
        ("W1", c(H=1, E3=-1, E4=-1)),
    ]
    edges = [("D0", "U1"), ("D0", "V1"), ("D0", "W1")]
    cfg = DivisorConfig.build(amb, comps, edges)
    return cfg, decreasing_areas(amb)


def ruled_comb():
    """Comb over a genus-2 base in an 11-point blowup of the trivial
    bundle; one genus-2 section, fiber trees, two detached pieces."""
    amb = AmbientLattice.ruled_trivial(2, 11)
    c = amb.cls
    comps = [
        ("S", c(B=1, F=-2, E5=-1)),
        ("T1", c(F=1, E1=-1)), ("T2", c(E1=1, E2=-1)), ("T3", c(E2=1)),
        ("T4", c(F=1, E3=-1, E4=-1)), ("T5", c(E3=1)), ("T6", c(E4=1)),
        ("T7", c(F=1)),
        ("T8", c(F=1, E5=-1, E6=-1)), ("T9", c(E6=1)),
        ("T10", c(F=1, E7=-1, E8=-1)), ("T11", c(E7=1)),
    ]
    edges = [
        ("S", "T1"), ("T1", "T2"), ("T2", "T3"), ("S", "T4"), ("T4", "T5"),
        ("T4", "T6"), ("S", "T7"), ("T8", "T9"), ("S", "T10"), ("T10", "T11"),
    ]
    cfg = DivisorConfig.build(amb, comps, edges)
    return cfg, decreasing_areas(amb)


# -- synthetic chains ----------------------------------------------------------


def synthetic_chain(a_seq):
    """Embed negative-self-intersection data (a_1..a_k) as a sphere chain of
    length k+1 in a blowup of the plane: interior members are built from
    bridge and filler generators, the k-th member carries the degree."""
    a = tuple(int(x) for x in a_seq)
    k = len(a)
    names = []
    counter = [0]

    def fresh():
        counter[0] += 1
        names.append(f"E{counter[0]}")
        return names[-1]

    bridges = [fresh() for _ in range(k)]  # u_1..u_k
    specs = []  # (id, {name: coeff}, h_degree)
    if k == 1:
        b = max(0, -(-(1 - a[0]) // 2))  # ceil((1 - a_1)/2)
        p = 2 * b - 1 + a[0]
        entry = {bridges[0]: -1}
        entry[fresh()] = -1  # E_c
        if b:
            entry[fresh()] = -b
        for _ in range(p):
            entry[fresh()] = -1
        specs.append(("D1", entry, 1 + b))
    else:
        entry = {bridges[0]: 1}
        for _ in range(a[0] - 1):
            entry[fresh()] = -1
        specs.append(("D1", entry, 0))
        for i in range(1, k - 1):
            entry = {bridges[i - 1]: -1, bridges[i]: 1}
            for _ in range(a[i] - 2):
                entry[fresh()] = -1
            specs.append((f"D{i + 1}", entry, 0))
        b = max(0, -(-(2 - a[k - 1]) // 2))  # ceil((2 - a_k)/2)
        p = 2 * b - 2 + a[k - 1]
        entry = {bridges[k - 2]: -1, bridges[k - 1]: -1}
        entry[fresh()] = -1
        if b:
            entry[fresh()] = -b
        for _ in range(p):
            entry[fresh()] = -1
        specs.append((f"D{k}", entry, 1 + b))
    tail = {bridges[k - 1]: 1, fresh(): -1}
    specs.append((f"D{k + 1}", tail, 0))

    amb = AmbientLattice.rational_blowup(len(names), tuple(names))
    comps = []
    for cid, entry, deg in specs:
        coeffs = dict(entry)
        if deg:
            coeffs["H"] = deg
        comps.append((cid, amb.cls(**coeffs)))
    edges = [(f"D{i}", f"D{i + 1}") for i in range(1, k + 1)]
    cfg = DivisorConfig.build(amb, comps, edges)
    assert not validate(cfg), validate(cfg)
    return cfg, [f"D{i}" for i in range(1, k + 2)]


def sample_admissible(rng: random.Random):
    """Admissible data within |a_i| <= 6, k <= 8; cusp size kept moderate so
    resolutions stay a few dozen blowups."""
    while True:
        k = rng.randint(1, 8)
        if k == 1:
            a = (rng.randint(-6, -1),)
        else:
            a = tuple(
                [rng.randint(1, 6)]
                + [rng.randint(2, 6) for _ in range(k - 2)]
                + [rng.randint(-6, 0)]
            )
        from sympdiv.cusp import admissible_check

        adm = admissible_check(a)
        if adm.accepted and max(abs(x) for x in a) <= 6 and adm.p + adm.q <= 300:
            return a


# -- random configurations -------------------------------------------------------


def _seed_config(rng: random.Random):
    kind = rng.choice(["lines", "line", "ruled", "product"])
    if kind == "lines":
        amb = AmbientLattice.projective_plane()
        cfg = DivisorConfig.build(
            amb, [("A", amb.cls(H=1)), ("B", amb.cls(H=1))], [("A", "B")]
        )
        w = AreaVector.from_values(amb, [1])
    elif kind == "line":
        amb = AmbientLattice.projective_plane()
        cfg = DivisorConfig.build(amb, [("A", amb.cls(H=1))], [])
        w = AreaVector.from_values(amb, [1])
    elif kind == "product":
        amb = AmbientLattice.product_of_spheres()
        cfg = DivisorConfig.build(
            amb, [("A", amb.cls(f1=1)), ("B", amb.cls(f2=1))], [("A", "B")]
        )
        w = AreaVector.from_values(amb, [1, 1])
    else:
        g = rng.randint(1, 2)
        amb = AmbientLattice.ruled_trivial(g, 0)
        cfg = DivisorConfig.build(
            amb, [("S", amb.cls(B=1)), ("A", amb.cls(F=1))], [("S", "A")]
        )
        w = AreaVector.from_values(amb, [8, 1])
    return cfg, w


def random_move(rng: random.Random, cfg: DivisorConfig):
    options = ["exterior", "exterior_comp", "non_toric", "half_toric"]
    if cfg.edges:
        options += ["toric", "toric"]
    choice = rng.choice(options)
    if choice == "toric":
        a, b = rng.choice(cfg.edges)
        return ToricBlowup(a, b)
    if choice == "non_toric":
        return NonToricBlowup(rng.choice(cfg.ids()))
    if choice == "half_toric":
        return HalfToricBlowup(rng.choice(cfg.ids()))
    return ExteriorBlowup(add_component=(choice == "exterior_comp"))


def random_blowup_config(rng: random.Random, max_moves=8):
    """Random valid configuration built by blowups from a small seed, with
    a transported area vector keeping the adjoint area negative."""
    cfg, w = _seed_config(rng)
    for _ in range(rng.randint(1, max_moves)):
        move = random_move(rng, cfg)
        nxt = blowup(cfg, move)
        slack = -adjoint_area(cfg, w)
        new_area = min(min(w.areas), slack) / 8
        w = area_after_blowup(cfg, nxt, w, new_area)
        cfg = nxt
    return cfg, w
