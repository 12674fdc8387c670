"""Normalized area vectors on blown-up irrational ruled manifolds, the
membership regions for symplectic and negative-canonical-pairing forms,
and the recursive inflation planner realizing any vector of the latter
region as a reachable class.

A normalized reduced vector (d_B, d_1, .., d_n) records the areas of
B, E_1, .., E_n with the fiber normalized to area 1.  Inflating along a
class Z adds t * (Z . x) to every area; for Z.Z < 0 the step size is
bounded by area(Z) / (-Z.Z).  Plans are nested: a seed node carries the
plan for the smaller manifold plus the small area given to the new
exceptional sphere, and zig-zag nodes alternate two classes in N equal
substeps so every intermediate stays inside the area constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .checks import Check, all_passed
from .lattice import (
    AmbientLattice,
    AreaVector,
    HomologyClass,
    area,
    pair,
)


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizedVector:
    g: int
    entries: tuple[Fraction, ...]  # (d_B, d_1, ..., d_n)

    def __post_init__(self):
        if self.g < 1:
            raise PlanError("base genus must be >= 1")
        if any(e <= 0 for e in self.entries):
            raise PlanError("normalized vector entries must be positive")

    @property
    def n(self) -> int:
        return len(self.entries) - 1

    @staticmethod
    def of(g: int, values) -> "NormalizedVector":
        return NormalizedVector(g, tuple(Fraction(v) for v in values))


def in_region(v: NormalizedVector, variant: str) -> bool:
    """Strict membership in the symplectic region ("P") or the region of
    forms pairing negatively with the canonical class ("P_g")."""
    d = v.entries
    n = v.n
    db, rest = d[0], d[1:]
    if variant == "P":
        if n == 0:
            return db > 0
        if n == 1:
            return 2 * db - rest[0] ** 2 > 0 and rest[0] < 1
        return (
            2 * db - sum(x * x for x in rest) > 0
            and rest[0] + rest[1] < 1
            and all(rest[i] >= rest[i + 1] for i in range(n - 1))
        )
    if variant == "P_g":
        g = v.g
        if n == 0:
            return db > g
        if n == 1:
            return 2 - 2 * g + 2 * db - rest[0] > 0 and rest[0] < 1
        return (
            2 - 2 * g + 2 * db - sum(rest) > 0
            and rest[0] + rest[1] < 1
            and all(rest[i] >= rest[i + 1] for i in range(n - 1))
        )
    raise PlanError(f"unknown region variant {variant!r}")


def region_slack(v: NormalizedVector) -> Fraction:
    """Smallest slack among the strict inequalities of P_g at g = 1."""
    d = v.entries
    n = v.n
    slacks = []
    if n == 0:
        slacks.append(d[0] - 1)
    elif n == 1:
        slacks.append(2 * d[0] - d[1])
        slacks.append(1 - d[1])
    else:
        slacks.append(2 * d[0] - sum(d[1:]))
        slacks.append(1 - d[1] - d[2])
    return min(slacks)


# -- states and the inflation step ------------------------------------------------


def plan_ambient(g: int, n: int) -> AmbientLattice:
    return AmbientLattice.ruled_trivial(g, n)


def state_from_vector(g: int, entries) -> AreaVector:
    """Area vector (B, F, E..) with fiber area 1 from (d_B, d_1, ..)."""
    entries = tuple(Fraction(e) for e in entries)
    amb = plan_ambient(g, len(entries) - 1)
    return AreaVector(amb, (entries[0], Fraction(1)) + entries[1:])


def lam_bound(a: AreaVector, z: HomologyClass) -> Fraction | None:
    """Inflation range along z: None means unbounded (z.z >= 0)."""
    sq = pair(z, z)
    if sq >= 0:
        return None
    return area(z, a) / (-sq)


def inflate_step(a: AreaVector, z: HomologyClass, t: Fraction) -> AreaVector:
    """New areas x -> area(x) + t * (z . x); t must respect the bound and
    every generator area must stay positive."""
    t = Fraction(t)
    if t < 0:
        raise PlanError("negative inflation parameter")
    if area(z, a) <= 0:
        raise PlanError(f"class {z} has non-positive area")
    lam = lam_bound(a, z)
    if lam is not None and t >= lam:
        raise PlanError(f"t = {t} exceeds the inflation bound {lam} along {z}")
    amb = a.ambient
    out = []
    for i, name in enumerate(amb.names):
        gen = amb.basis_class(name)
        out.append(a.areas[i] + t * pair(z, gen))
    if any(v <= 0 for v in out):
        raise PlanError("inflation made a generator area non-positive")
    return AreaVector(amb, tuple(out))


def normalize(a: AreaVector) -> NormalizedVector:
    """Divide by the fiber area; only meaningful on ruled ambients."""
    amb = a.ambient
    f = a.areas[1]
    if f <= 0:
        raise PlanError("fiber area must be positive")
    entries = (a.areas[0] / f,) + tuple(v / f for v in a.areas[2:])
    return NormalizedVector(amb.g, entries)


# -- plans -------------------------------------------------------------------------


@dataclass(frozen=True)
class SeedNode:
    base: "InflationPlan | None"
    epsilon: Fraction | None
    vector: tuple[Fraction, ...]  # normalized entries after the seed
    assumption: str


@dataclass(frozen=True)
class InflateNode:
    z: tuple[int, ...]
    label: str
    t: Fraction


@dataclass(frozen=True)
class ZigZagNode:
    z_diag: tuple[int, ...]
    z_down: tuple[int, ...]
    label: str
    total: Fraction
    substeps: int


PlanNode = SeedNode | InflateNode | ZigZagNode


@dataclass(frozen=True)
class InflationPlan:
    g: int
    n: int
    target: tuple[Fraction, ...]
    nodes: tuple[PlanNode, ...]

    def assumptions(self) -> list[str]:
        out = []
        for node in self.nodes:
            if isinstance(node, SeedNode):
                if node.base is not None:
                    out.extend(node.base.assumptions())
                out.append(node.assumption)
        return list(dict.fromkeys(out))


def verify_plan(plan: InflationPlan) -> list[Check]:
    """Replay the plan: seed arithmetic, every bound, every positivity,
    and exact equality of the normalized endpoint with the target."""
    checks: list[Check] = []
    state = _replay(plan, checks, prefix="")
    if state is None:
        return checks
    end = normalize(state)
    checks.append(
        Check(
            "endpoint equals target exactly",
            end.entries == plan.target,
            f"{[str(e) for e in end.entries]}",
        )
    )
    return checks


def _replay(plan: InflationPlan, checks: list[Check], prefix: str) -> AreaVector | None:
    amb = plan_ambient(plan.g, plan.n)
    if not plan.nodes or not isinstance(plan.nodes[0], SeedNode):
        checks.append(Check(f"{prefix}seed first", False, "plan must start with a seed node"))
        return None
    seed = plan.nodes[0]
    if seed.base is not None:
        sub_checks: list[Check] = []
        sub_state = _replay(seed.base, sub_checks, prefix=prefix + "  ")
        checks.extend(sub_checks)
        if sub_state is None:
            return None
        sub_end = normalize(sub_state)
        ok = (
            seed.epsilon is not None
            and seed.epsilon > 0
            and seed.vector == sub_end.entries + (seed.epsilon,)
            and sub_end.entries == seed.base.target
        )
        checks.append(
            Check(
                f"{prefix}seed extends the base plan by a positive area",
                bool(ok),
                f"epsilon = {seed.epsilon}",
            )
        )
        if not ok:
            return None
    else:
        ok = all(v > 0 for v in seed.vector)
        checks.append(Check(f"{prefix}primitive seed is positive", ok, seed.assumption))
        if not ok:
            return None
    state = state_from_vector(plan.g, seed.vector)

    for node in plan.nodes[1:]:
        if isinstance(node, InflateNode):
            z = amb.from_coeffs(node.z)
            state, check = _checked_step(state, z, node.t, f"{prefix}inflate {node.label}")
            checks.append(check)
            if state is None:
                return None
        elif isinstance(node, ZigZagNode):
            zd = amb.from_coeffs(node.z_diag)
            ze = amb.from_coeffs(node.z_down)
            if node.substeps < 1 or node.total < 0:
                checks.append(Check(f"{prefix}zigzag {node.label}", False, "bad substep data"))
                return None
            s = node.total / node.substeps
            ok = True
            for i in range(node.substeps):
                state, c1 = _checked_step(state, zd, s, f"{prefix}zigzag {node.label} diag {i}")
                if state is None:
                    checks.append(c1)
                    return None
                state, c2 = _checked_step(state, ze, s, f"{prefix}zigzag {node.label} down {i}")
                if state is None:
                    checks.append(c2)
                    return None
            checks.append(
                Check(
                    f"{prefix}zigzag {node.label} ({node.substeps} substeps)",
                    ok,
                    f"total {node.total}",
                )
            )
        else:
            checks.append(Check(f"{prefix}node", False, f"unexpected node {node!r}"))
            return None
    return state


def _checked_step(state, z, t, name):
    try:
        nxt = inflate_step(state, z, t)
        return nxt, Check(name, True, f"t = {t}")
    except PlanError as exc:
        return None, Check(name, False, str(exc))


# -- the planner --------------------------------------------------------------------


def plan_kahler(target: NormalizedVector) -> InflationPlan:
    """Recursive realization of a vector in the negative-pairing region;
    the emitted plan replays exactly onto the target."""
    if not in_region(NormalizedVector(1, target.entries), "P_g"):
        raise PlanError(f"target {tuple(map(str, target.entries))} is outside the region")
    last = None
    for attempt in range(6):
        shrink = Fraction(1, 4**attempt)
        plan = _build(target.g, target.entries, shrink)
        checks = verify_plan(plan)
        if all_passed(checks):
            return plan
        last = [c for c in checks if not c.passed]
    raise PlanError(f"planner failed after retries: {last}")


def _build(g: int, d: tuple[Fraction, ...], shrink: Fraction) -> InflationPlan:
    n = len(d) - 1
    amb = plan_ambient(g, n)
    if n == 0:
        seed = SeedNode(
            None, None, d,
            "every symplectic form on a minimal ruled surface is Kahler",
        )
        return InflationPlan(g, 0, d, (seed,))

    if n == 1:
        db, d1 = d
        s = db / d1 - Fraction(1, 2)
        cap = min(1 - d1, s / (s + Fraction(1, 2)))
        eps = cap * shrink / 4
        y = 1 - eps
        t = y / d1 - 1
        x = db * (1 + t)
        seed = SeedNode(
            None, None, (x, y),
            "classes near the unit-fiber ray on the one-point blowup are Kahler",
        )
        b = amb.basis_class("B")
        return InflationPlan(g, 1, d, (seed, InflateNode(b.coeffs, "B", t)))

    if n % 2 == 0:
        eps = min(d[n], region_slack(NormalizedVector(1, d))) * shrink / 4
        t = d[n] - eps
        sub = list(d[:-1])
        sub[0] = d[0] - t
        sub[n - 1] = d[n - 1] - t
        base = _build(g, tuple(sub), shrink)
        seed = SeedNode(
            base, eps, tuple(sub) + (eps,),
            "a sufficiently small blowup of a Kahler class stays Kahler",
        )
        z = amb.basis_class("F") - amb.basis_class(f"E{n - 1}") - amb.basis_class(f"E{n}")
        return InflationPlan(g, n, d, (seed, InflateNode(z.coeffs, str(z), t)))

    # odd n = 2k - 1 >= 3
    k = (n + 1) // 2
    t = Fraction(3, 4) * shrink * d[n] / (1 - d[n])
    eps = (1 + t) * d[n] - t
    sub = [(1 + t) * d[0] - (k - 1) * t, (1 + t) * d[1]]
    for j in range(2, n):
        sub.append((1 + t) * d[j] - t)
    base = _build(g, tuple(sub), shrink)
    seed = SeedNode(
        base, eps, tuple(sub) + (eps,),
        "a sufficiently small blowup of a Kahler class stays Kahler",
    )
    nodes: list[PlanNode] = [seed]
    state = state_from_vector(g, seed.vector)

    z1 = amb.basis_class("F") - amb.basis_class(f"E{n}")
    nodes.append(InflateNode(z1.coeffs, str(z1), t))
    state = inflate_step(state, z1, t)

    for el in range(2, k):
        z_diag = (
            amb.basis_class("F")
            - amb.basis_class(f"E{2 * el - 1}")
            - amb.basis_class(f"E{2 * el}")
        )
        z_down = amb.basis_class(f"E{2 * el}")
        substeps, state = _zigzag_substeps(state, z_diag, z_down, t)
        nodes.append(
            ZigZagNode(z_diag.coeffs, z_down.coeffs, f"E{2 * el - 1}/E{2 * el}", t, substeps)
        )

    zb = amb.basis_class("B")
    for el in range(1, k):
        zb = zb - amb.basis_class(f"E{2 * el}")
    nodes.append(InflateNode(zb.coeffs, str(zb), t))
    return InflationPlan(g, n, d, tuple(nodes))


def _zigzag_substeps(state, z_diag, z_down, total):
    """Smallest substep count whose alternating replay stays in bounds,
    found by doubling then bisecting."""
    if total == 0:
        return 1, state

    def attempt(nsub):
        cur = state
        s = total / nsub
        try:
            for _ in range(nsub):
                cur = inflate_step(cur, z_diag, s)
                cur = inflate_step(cur, z_down, s)
        except PlanError:
            return None
        return cur

    n = 1
    end = attempt(n)
    while end is None:
        n *= 2
        if n > 2**20:
            raise PlanError("zig-zag substep search exhausted")
        end = attempt(n)
    lo, hi = max(1, n // 2), n
    while lo < hi:
        mid = (lo + hi) // 2
        if attempt(mid) is not None:
            hi = mid
        else:
            lo = mid + 1
    return hi, attempt(hi)
