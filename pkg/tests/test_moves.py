from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import random_blowup_config
from sympdiv.divisor import DivisorConfig, adjoint_area
from sympdiv.lattice import AmbientLattice, AreaVector, pair
from sympdiv.moves import (
    ExteriorBlowup,
    HalfToricBlowup,
    MoveError,
    NonToricBlowup,
    ToricBlowup,
    area_after_blowup,
    blowdown,
    blowup,
    is_toric_blowup_seq,
    replay_blowdown,
    replay_toric_witness,
    toric_seq_blowup,
)


def two_lines():
    pp = AmbientLattice.projective_plane()
    return DivisorConfig.build(
        pp, [("A", pp.cls(H=1)), ("B", pp.cls(H=1))], [("A", "B")]
    )


def test_toric_blowup_shape():
    up = blowup(two_lines(), ToricBlowup("A", "B"))
    classes = {c.id: str(c.cls) for c in up.components}
    assert classes == {"A": "H-E1", "B": "H-E1", "E1": "E1"}
    assert up.edges == (("A", "E1"), ("B", "E1"))


def test_toric_blowup_on_multiple_edge():
    # a double intersection: blowing up separates one of the two points
    pp = AmbientLattice.projective_plane()
    cfg = DivisorConfig.build(
        pp, [("A", pp.cls(H=1)), ("B", pp.cls(H=2))], [("A", "B"), ("A", "B")]
    )
    up = blowup(cfg, ToricBlowup("A", "B"))
    assert up.edge_multiplicity("A", "B") == 1
    assert up.edge_multiplicity("A", "E1") == 1
    assert up.edge_multiplicity("B", "E1") == 1
    step = blowdown(up, up.ambient.basis_class("E1"))
    assert step.config == cfg


def test_exterior_blowup_flag():
    up = blowup(two_lines(), ExteriorBlowup(add_component=True))
    e = up.component("E1")
    assert all(pair(e.cls, c.cls) == 0 for c in up.components if c.id != "E1")
    up2 = blowup(two_lines(), ExteriorBlowup(add_component=False))
    assert len(up2.components) == 2


def test_half_toric_then_toric_resolution_shape():
    pp = AmbientLattice.projective_plane()
    cfg = DivisorConfig.build(pp, [("D1", pp.cls(H=2))], [])
    one = blowup(cfg, HalfToricBlowup("D1"))
    assert one.component("D1").cls == one.ambient.cls(H=2, E1=-1)
    assert one.edges == (("D1", "E1"),)
    two = blowup(one, ToricBlowup("D1", "E1"))
    assert two.component("D1").cls == two.ambient.cls(H=2, E1=-1, E2=-1)
    assert two.component("E1").cls == two.ambient.cls(E1=1, E2=-1)


def test_blowup_rejects_twisted():
    tw = AmbientLattice.ruled_twisted(1)
    cfg = DivisorConfig.build(tw, [("F", tw.cls(B1=0, F=1))], [])
    with pytest.raises(MoveError):
        blowup(cfg, ExteriorBlowup())


def test_blowdown_types_roundtrip():
    cfg = two_lines()
    for move in (
        ToricBlowup("A", "B"),
        NonToricBlowup("A"),
        HalfToricBlowup("B"),
        ExteriorBlowup(add_component=True),
        ExteriorBlowup(add_component=False),
    ):
        up = blowup(cfg, move)
        e = up.ambient.basis_class("E1")
        step = blowdown(up, e)
        assert step.config == cfg
        assert replay_blowdown(step) == up
        assert step.kind == move.kind


def test_blowdown_area_transport():
    cfg = two_lines()
    w = AreaVector.from_values(cfg.ambient, [1])
    up = blowup(cfg, ToricBlowup("A", "B"))
    wu = area_after_blowup(cfg, up, w, Fraction(1, 7))
    step = blowdown(up, up.ambient.basis_class("E1"), wu)
    assert step.new_area == w


def test_blowdown_pattern_errors():
    rb = AmbientLattice.rational_blowup(2)
    # pairing spread over two components matches no pattern
    cfg = DivisorConfig.build(
        rb,
        [("A", rb.cls(H=1, E1=-1)), ("B", rb.cls(H=1, E1=-1)), ("C", rb.cls(H=1))],
        [("A", "C"), ("B", "C"), ("A", "B")],
    )
    with pytest.raises(MoveError):
        blowdown(cfg, rb.basis_class("E1"))


def test_normalized_blowdown_exterior():
    # an exceptional class that is not a generator: H - E1 - E2 in CP2#3
    rb = AmbientLattice.rational_blowup(3)
    cfg = DivisorConfig.build(rb, [("X", rb.cls(E3=1))], [])
    e = rb.cls(H=1, E1=-1, E2=-1)
    step = blowdown(cfg, e)
    assert step.kind == "exterior"
    assert step.config.ambient.n_exc == 2
    assert replay_blowdown(step) == cfg


def test_normalized_blowdown_non_toric():
    rb = AmbientLattice.rational_blowup(3)
    cfg = DivisorConfig.build(rb, [("X", rb.cls(E1=1)), ("Y", rb.cls(E3=1))], [])
    e = rb.cls(H=1, E1=-1, E2=-1)
    assert pair(e, cfg.component("X").cls) == 1
    step = blowdown(cfg, e)
    assert step.kind == "non_toric"
    assert replay_blowdown(step) == cfg


def test_product_blowup_and_bridge_roundtrip():
    ps = AmbientLattice.product_of_spheres()
    cfg = DivisorConfig.build(
        ps, [("A", ps.cls(f1=1)), ("B", ps.cls(f2=1))], [("A", "B")]
    )
    up = blowup(cfg, ToricBlowup("A", "B"), new_id="e")
    assert up.ambient.describe() == "CP2#2"
    e = up.ambient.cls(H=1, E1=-1, E2=-1)
    # f1 converts to H - E2, then the toric rewrite subtracts e
    assert up.component("A").cls == up.ambient.cls(H=1, E1=0, E2=-1) - e
    assert up.component("e").cls == e
    step = blowdown(up, e)
    assert step.config == cfg
    assert replay_blowdown(step) == up


def test_twisted_bridge_blowdown():
    rt = AmbientLattice.ruled_trivial(2, 1)
    cfg = DivisorConfig.build(
        rt, [("S", rt.cls(B=1, F=1)), ("X", rt.cls(F=1, E1=-1))], [("S", "X")]
    )
    e = rt.cls(F=1, E1=-1)
    step = blowdown(cfg, e)
    assert step.config.ambient.kind == "ruled_twisted"
    assert replay_blowdown(step) == cfg


def test_hypothesis_preserved_by_blowdowns():
    rng = random.Random(99)
    for _ in range(60):
        cfg, w = random_blowup_config(rng)
        if cfg.ambient.n_exc == 0:
            continue
        name = cfg.ambient.names[cfg.ambient.dim - 1]
        e = cfg.ambient.basis_class(name)
        try:
            step = blowdown(cfg, e, w)
        except MoveError:
            continue
        assert adjoint_area(step.config, step.new_area) <= adjoint_area(cfg, w)


def test_blowup_hypothesis_threshold():
    cfg = two_lines()
    w = AreaVector.from_values(cfg.ambient, [1])
    slack = -adjoint_area(cfg, w)
    up = blowup(cfg, HalfToricBlowup("A"))
    small = area_after_blowup(cfg, up, w, slack / 2)
    assert adjoint_area(up, small) < 0
    big = area_after_blowup(cfg, up, w, slack * 2)
    assert adjoint_area(up, big) >= 0


# -- toric blowup sequences -----------------------------------------------------


def test_toric_seq_examples():
    assert toric_seq_blowup((0, 0), 1) == (-1, -1, -1)
    assert toric_seq_blowup((-1, -1, -1), 2) == (-1, -2, -1, -2)
    assert len(toric_seq_blowup((0, 0), 1)) == 3
    with pytest.raises(MoveError):
        toric_seq_blowup((0, 0), 2)


def test_is_toric_blowup_seq():
    ok, witness = is_toric_blowup_seq((0, 0))
    assert ok and witness == []
    ok, witness = is_toric_blowup_seq((-1, -1, -1))
    assert ok and replay_toric_witness(witness) == (-1, -1, -1)
    ok, _ = is_toric_blowup_seq((-2, -1, -2))
    assert not ok


def test_toric_seq_random_roundtrip():
    rng = random.Random(31)
    for _ in range(200):
        seq = (0, 0)
        w = []
        for _ in range(rng.randint(0, 9)):
            k = rng.randint(1, len(seq) - 1)
            w.append(k)
            seq = toric_seq_blowup(seq, k)
        ok, witness = is_toric_blowup_seq(seq)
        assert ok
        assert replay_toric_witness(witness) == seq
        if seq != (0, 0):
            # the provable invariant; sequences with exactly two -1 entries
            # exist from the second blowup on (see the acceptance notes)
            assert len(seq) >= 3 and -1 in seq
