"""Blowdown reduction pipelines for divisor configurations.

Rational ambients: repeatedly contract the minimal-area exceptional class
until the pair is quasi-minimal (the minimal class meets the total divisor
class at least twice) or b2 <= 2.  Quasi-minimal pairs split into first and
second kind by whether the minimal class occurs among the components; the
first kind admits a further partially-minimal reduction to a chain, the
second kind a greedy reduction to b2 <= 2.

Irrational ruled ambients have their own loop contracting the cheapest
exceptional generator according to its incidence pattern.

Every trace step stores the full blowdown data so that replaying the trace
as blowups from the terminal configuration reproduces the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checks import Check
from .divisor import (
    DivisorConfig,
    DivisorError,
    check_hypothesis,
    is_connected,
    require_valid,
    total_class,
    validate,
)
from .exceptional import (
    DEFAULT_COEFF_BOUND,
    NormalizeError,
    enumerate_exceptional,
    minimal_area,
)
from .lattice import (
    KIND_PP,
    KIND_RATIONAL,
    KIND_RULED,
    KIND_S2S2,
    KIND_TWISTED,
    AreaVector,
    HomologyClass,
    area,
    canonical,
    is_exceptional_class,
    pair,
)
from .moves import BlowdownStep, MoveError, blowdown, replay_blowdown


class ReductionError(ValueError):
    pass


class ClassifyError(ReductionError):
    pass


@dataclass(frozen=True)
class TraceStep:
    blowdown: BlowdownStep
    b2_before: int
    b2_after: int
    hyp_before: bool
    hyp_after: bool

    @property
    def target(self) -> HomologyClass:
        return self.blowdown.target

    @property
    def kind(self) -> str:
        return self.blowdown.kind


@dataclass(frozen=True)
class ReductionTrace:
    stage: str
    steps: tuple[TraceStep, ...]
    terminal: str


def verify_trace(trace: ReductionTrace, initial: DivisorConfig) -> list[Check]:
    """Replay every step as a blowup and compare with the recorded input."""
    out = []
    cur = initial
    for i, ts in enumerate(trace.steps):
        ok = ts.blowdown.pre_config == cur
        out.append(Check(f"{trace.stage}[{i}] chains", ok, f"step {ts.kind} {ts.target}"))
        replayed = replay_blowdown(ts.blowdown)
        out.append(
            Check(
                f"{trace.stage}[{i}] replay",
                replayed == ts.blowdown.pre_config,
                "blowup of the contracted configuration reproduces the input",
            )
        )
        out.append(
            Check(
                f"{trace.stage}[{i}] hypothesis",
                ts.hyp_before and ts.hyp_after,
                "adjoint area stays negative",
            )
        )
        cur = ts.blowdown.config
    return out


def _do_step(cur, curw, target, steps) -> tuple[DivisorConfig, AreaVector]:
    hyp_before = check_hypothesis(cur, curw)
    bd = blowdown(cur, target, curw)
    hyp_after = check_hypothesis(bd.config, bd.new_area)
    steps.append(
        TraceStep(bd, cur.ambient.b2, bd.config.ambient.b2, hyp_before, hyp_after)
    )
    if not hyp_after:
        raise ReductionError(f"blowdown of {target} lost the adjoint-area hypothesis")
    return bd.config, bd.new_area


# -- quasi-minimal reduction ----------------------------------------------------


def _require_pipeline_input(config: DivisorConfig, w: AreaVector) -> None:
    require_valid(config, w)
    if not config.ambient.is_rational:
        raise ReductionError("rational pipelines need a rational ambient")
    if not is_connected(config):
        raise ReductionError("configuration must be connected")
    if not check_hypothesis(config, w):
        raise ReductionError("adjoint area is not negative; hypothesis rejected up front")


def quasi_minimal_reduce(
    config: DivisorConfig,
    w: AreaVector,
    coeff_bound: int = DEFAULT_COEFF_BOUND,
) -> tuple[DivisorConfig, AreaVector, ReductionTrace]:
    _require_pipeline_input(config, w)
    steps: list[TraceStep] = []
    cur, curw = config, w
    while True:
        if cur.ambient.b2 <= 2:
            terminal = "SmallB2"
            break
        es = enumerate_exceptional(cur.ambient, curw, coeff_bound=coeff_bound)
        mins = minimal_area(es)
        d = total_class(cur)
        if any(pair(m, d) >= 2 for m in mins):
            info = classify_kind(cur, curw, coeff_bound)
            terminal = (
                "QuasiMinimalFirstKind" if info.kind == "first" else "QuasiMinimalSecondKind"
            )
            break
        cur, curw = _attempt_candidates(cur, curw, mins, steps, "quasi-minimal")
    return cur, curw, ReductionTrace("quasi_minimal", tuple(steps), terminal)


def _attempt_candidates(cur, curw, candidates, steps, stage):
    errors = []
    for cand in candidates:
        try:
            return _do_step(cur, curw, cand, steps)
        except (MoveError, NormalizeError, DivisorError) as exc:
            errors.append(f"{cand}: {exc}")
    raise ReductionError(
        f"stuck in {stage} reduction on {cur.ambient.describe()}; "
        f"tried {len(candidates)} candidates: " + " | ".join(errors)
    )


@dataclass(frozen=True)
class KindInfo:
    kind: str  # "first" | "second"
    e_min: HomologyClass
    carrier: str | None


def classify_kind(
    config: DivisorConfig,
    w: AreaVector,
    coeff_bound: int = DEFAULT_COEFF_BOUND,
) -> KindInfo:
    """Certify -[D]-K as the unique minimal-area exceptional class meeting
    [D] twice, and split by whether a component carries it."""
    amb = config.ambient
    d = total_class(config)
    cand = -(d + canonical(amb))
    if not is_exceptional_class(cand):
        raise ClassifyError(f"-[D]-K = {cand} is not an exceptional class")
    if area(cand, w) <= 0:
        raise ClassifyError(f"-[D]-K = {cand} has non-positive area")
    es = enumerate_exceptional(amb, w, coeff_bound=coeff_bound)
    mins = minimal_area(es)
    if mins != [cand]:
        raise ClassifyError(
            f"-[D]-K = {cand} is not the unique minimal-area class (got {mins})"
        )
    if pair(cand, d) != 2:
        raise ClassifyError(f"E_min.[D] = {pair(cand, d)}, expected 2")
    carriers = [c.id for c in config.components if c.cls == cand]
    if carriers:
        cid = carriers[0]
        if config.degree(cid) != 3:
            raise ClassifyError(
                f"second-kind carrier {cid} meets {config.degree(cid)} components, expected 3"
            )
        return KindInfo("second", cand, cid)
    return KindInfo("first", cand, None)


# -- partially minimal reduction -------------------------------------------------


def partially_minimal_reduce(
    config: DivisorConfig,
    w: AreaVector,
    coeff_bound: int = DEFAULT_COEFF_BOUND,
) -> tuple[DivisorConfig, AreaVector, ReductionTrace]:
    """Remove toric (-1)-components and non-toric exceptional generators
    orthogonal to E_min until none remain.

    Non-toric candidates are restricted to basis generators: the general
    enumeration would keep contracting through basis changes past every
    terminal the chain construction needs, and basis moves suffice for the
    reduction to reach an admissible subchain."""
    info = classify_kind(config, w, coeff_bound)
    if info.kind != "first":
        raise ReductionError("partially minimal reduction expects a first-kind pair")
    steps: list[TraceStep] = []
    cur, curw = config, w
    while True:
        if cur.ambient.b2 <= 2:
            terminal = "SmallB2"
            break
        info = classify_kind(cur, curw, coeff_bound)
        if info.kind != "first":
            raise ReductionError("pair left the first-kind regime during reduction")
        emin = info.e_min
        d = total_class(cur)

        toric = [
            c for c in cur.components
            if pair(c.cls, c.cls) == -1 and pair(c.cls, d - c.cls) == 2
        ]
        for c in toric:
            if pair(c.cls, emin) != 0:
                raise ClassifyError(
                    f"toric candidate {c.id} meets E_min; quasi-minimality violated"
                )
        toric.sort(key=lambda c: (area(c.cls, curw), c.id))
        if toric:
            cur, curw = _attempt_candidates(
                cur, curw, [c.cls for c in toric], steps, "partially-minimal(toric)"
            )
            continue

        gens = [
            cur.ambient.basis_class(cur.ambient.names[i]) for i in cur.ambient.exc_indices
        ]
        nontoric = [
            g for g in gens
            if pair(g, emin) == 0
            and all(pair(g, c.cls) >= 0 for c in cur.components)
            and not any(c.cls == g for c in cur.components)
        ]
        for g in nontoric:
            if pair(g, d) != 1:
                raise ClassifyError(f"non-toric candidate {g} pairs {pair(g, d)} with [D]")
        nontoric.sort(key=lambda g: (area(g, curw), g.coeffs))
        if nontoric:
            cur, curw = _attempt_candidates(
                cur, curw, nontoric, steps, "partially-minimal(non-toric)"
            )
            continue

        terminal = "QuasiMinimalFirstKind"
        break
    return cur, curw, ReductionTrace("partially_minimal", tuple(steps), terminal)


# -- good chains ------------------------------------------------------------------


@dataclass(frozen=True)
class GoodChain:
    ids: tuple[str, ...]
    squares: tuple[int, ...]
    k: int  # 1-based
    bullet: int  # 1 or 2


def chain_order(config: DivisorConfig) -> list[str]:
    """Order the components of a chain along its path."""
    ids = config.ids()
    if len(ids) < 2:
        raise ReductionError("chain needs at least two components")
    degs = {i: config.degree(i) for i in ids}
    ends = [i for i in ids if degs[i] == 1]
    if len(ends) != 2 or any(degs[i] > 2 for i in ids):
        raise ReductionError("configuration is not a chain")
    start = min(ends)
    order = [start]
    prev = None
    while len(order) < len(ids):
        nxt = [u for u in config.neighbors(order[-1]) if u != prev]
        if len(nxt) != 1:
            raise ReductionError("configuration is not a chain")
        prev = order[-1]
        order.append(nxt[0])
    return order


def good_chain_candidates(config: DivisorConfig) -> list[GoodChain]:
    """Every (labeling, k) matching one of the two bullets, best first:
    larger k wins, ties break on the labeling."""
    base = chain_order(config)
    candidates = []
    for order in (base, list(reversed(base))):
        squares = [pair(config.component(i).cls, config.component(i).cls) for i in order]
        n = len(order)
        for k in range(1, n):  # 1-based k, k <= n-1
            if squares[k - 1] >= 0 and all(s <= -2 for s in squares[: k - 1]):
                candidates.append((k, 1, tuple(order), tuple(squares)))
        if n >= 3 and squares[0] == -1 and squares[1] == 0:
            candidates.append((2, 2, tuple(order), tuple(squares)))
    candidates.sort(key=lambda t: (-t[0], t[2]))
    return [GoodChain(order, squares, k, bullet) for k, bullet, order, squares in candidates]


def good_chain(config: DivisorConfig) -> GoodChain:
    """Label the chain and find k per the two-bullet dichotomy."""
    candidates = good_chain_candidates(config)
    if not candidates:
        raise ReductionError("no good-chain labeling exists; hypotheses violated")
    return candidates[0]


# -- second kind -------------------------------------------------------------------

_TYPE_RANK = {"toric": 0, "half_toric": 1, "non_toric": 2, "exterior": 3}


def second_kind_reduce(
    config: DivisorConfig,
    w: AreaVector,
    coeff_bound: int = DEFAULT_COEFF_BOUND,
) -> tuple[DivisorConfig, AreaVector, ReductionTrace]:
    """Greedy blowdowns (cheapest class first, toric before half-toric
    before non-toric before exterior) until b2 <= 2."""
    steps: list[TraceStep] = []
    if config.ambient.b2 <= 2:
        return config, w, ReductionTrace("second_kind", (), "SmallB2")
    info = classify_kind(config, w, coeff_bound)
    if info.kind != "second":
        raise ReductionError("second-kind reduction expects a second-kind pair")
    cur, curw = config, w
    while cur.ambient.b2 > 2:
        bound = 4 * max(
            area(cur.ambient.basis_class(cur.ambient.names[i]), curw)
            for i in cur.ambient.exc_indices
        )
        es = enumerate_exceptional(cur.ambient, curw, area_bound=bound, coeff_bound=coeff_bound)
        ranked = []
        for e in es.classes:
            try:
                bd = blowdown(cur, e, curw)
            except (MoveError, NormalizeError, DivisorError):
                continue
            ranked.append((area(e, curw), _TYPE_RANK[bd.kind], e.coeffs, e, bd))
        if not ranked:
            raise ReductionError(
                "stuck in second-kind reduction; no exceptional class matches a "
                f"blowdown pattern on {cur.ambient.describe()} with components "
                + ", ".join(f"{c.id}={c.cls}" for c in cur.components)
            )
        ranked.sort(key=lambda t: t[:3])
        _, _, _, e, bd = ranked[0]
        hyp_before = check_hypothesis(cur, curw)
        hyp_after = check_hypothesis(bd.config, bd.new_area)
        steps.append(TraceStep(bd, cur.ambient.b2, bd.config.ambient.b2, hyp_before, hyp_after))
        if not hyp_after:
            raise ReductionError("hypothesis lost during second-kind reduction")
        cur, curw = bd.config, bd.new_area
    return cur, curw, ReductionTrace("second_kind", tuple(steps), "SmallB2")


# -- minimal model classification ----------------------------------------------------


@dataclass(frozen=True)
class MinimalModelTag:
    case: str
    params: dict


def classify_minimal_model(config: DivisorConfig) -> MinimalModelTag | None:
    """Match b2 <= 2 configurations (and ruled combs) against the minimal
    model tables; None when nothing matches."""
    if validate(config):
        return None
    amb = config.ambient
    if amb.kind == KIND_PP:
        return _classify_pp(config)
    if amb.kind == KIND_S2S2:
        return _classify_product(config)
    if amb.kind == KIND_RATIONAL and amb.n_exc == 1:
        return _classify_one_blowup(config)
    if amb.is_ruled:
        if not ruled_validate(config):
            return MinimalModelTag("CombLike", {"components": len(config.components)})
        return None
    return None


def _classify_pp(config):
    degrees = sorted(c.cls.coeffs[0] for c in config.components)
    if degrees == [1, 2]:
        return MinimalModelTag("A1", {})
    if degrees == [1, 1, 1]:
        return MinimalModelTag("A2", {})
    if degrees == [1]:
        return MinimalModelTag("A1p", {})
    if degrees == [1, 1]:
        return MinimalModelTag("A2p", {})
    if degrees == [2]:
        return MinimalModelTag("A3p", {})
    return None


def _classify_product(config):
    coords = [tuple(c.cls.coeffs) for c in config.components]
    for swap in (False, True):
        pts = [(b, a) if swap else (a, b) for a, b in coords]
        tag = _match_product(sorted(pts))
        if tag is not None:
            return tag
    return None


def _match_product(pts):
    # log Calabi-Yau cycles
    if len(pts) == 2 and all(b == 1 for _, b in pts) and pts[0][0] + pts[1][0] == 2:
        return MinimalModelTag("B1", {"k": max(p[0] for p in pts)})
    if len(pts) == 3 and (1, 0) in pts:
        rest = [p for p in pts if p != (1, 0)]
        if len(rest) == 2 and all(b == 1 for _, b in rest) and rest[0][0] + rest[1][0] == 1:
            return MinimalModelTag("B2", {"k": max(p[0] for p in rest)})
    if len(pts) == 4 and pts.count((1, 0)) == 2:
        rest = [p for p in pts if p != (1, 0)]
        if len(rest) == 2 and all(b == 1 for _, b in rest) and rest[0][0] + rest[1][0] == 0:
            return MinimalModelTag("B3", {"k": max(p[0] for p in rest)})
    # strictly negative adjoint area shapes
    head = [p for p in pts if p != (0, 1)]
    if len(head) == 1 and head[0][0] == 1 and len(pts) - 1 == pts.count((0, 1)):
        return MinimalModelTag("B1p", {"k": head[0][1], "n": len(pts)})
    if len(pts) == 3 and (0, 1) in pts:
        rest = [p for p in pts if p != (0, 1)]
        if (
            len(rest) == 2
            and all(p[0] == 1 for p in rest)
            and rest[0][1] + rest[1][1] == 0
            and max(r[1] for r in rest) >= 0
        ):
            return MinimalModelTag("B2p", {"k": max(r[1] for r in rest)})
    if len(pts) == 2 and all(p[0] == 1 for p in pts) and pts[0][1] + pts[1][1] == 1:
        k = max(pts[0][1], pts[1][1]) - 1
        if k >= 0:
            return MinimalModelTag("B3p", {"k": k})
    return None


def _fs_coords(config):
    # (a, c) -> alpha*f + beta*s with f = H - E, s = H
    out = []
    for c in config.components:
        a, e = c.cls.coeffs
        out.append((-e, a + e))
    return sorted(out)


def _classify_one_blowup(config):
    pts = _fs_coords(config)
    if len(pts) == 2 and all(b == 1 for _, b in pts) and pts[0][0] + pts[1][0] == 1:
        return MinimalModelTag("C1", {"k": max(p[0] for p in pts)})
    if sorted(pts) == sorted([(0, 2), (1, 0)]):
        return MinimalModelTag("C1", {"k": None, "variant": "2s+f"})
    if len(pts) == 3 and (1, 0) in pts:
        rest = [p for p in pts if p != (1, 0)]
        if len(rest) == 2 and all(b == 1 for _, b in rest):
            ks = sorted(r[0] for r in rest)
            if ks[0] + ks[1] == 0:
                return MinimalModelTag("C2", {"k": ks[1]})
            if ks[0] + ks[1] == -1 and ks[1] >= 0:
                return MinimalModelTag("C2p", {"k": ks[1]})
    if len(pts) == 4 and pts.count((1, 0)) == 2:
        rest = [p for p in pts if p != (1, 0)]
        if len(rest) == 2 and all(b == 1 for _, b in rest) and rest[0][0] + rest[1][0] == -1:
            return MinimalModelTag("C3", {"k": max(r[0] for r in rest)})
    head = [p for p in pts if p != (1, 0)]
    if len(head) == 1 and head[0][1] == 1 and len(pts) - 1 == pts.count((1, 0)):
        return MinimalModelTag("C1p", {"k": head[0][0], "n": len(pts)})
    if len(pts) == 2 and all(b == 1 for _, b in pts) and pts[0][0] + pts[1][0] == 0:
        k = max(p[0] for p in pts)
        if k >= 0:
            return MinimalModelTag("C3p", {"k": k})
    return None


# -- irrational ruled validation and reduction -----------------------------------------


def ruled_validate(config: DivisorConfig) -> list[str]:
    """Shape constraints for divisor components over an irrational base:
    spherical components are fiber-type F - sum(E) or exceptional-type
    E_l - sum(E); at most one section-type component of genus g."""
    amb = config.ambient
    problems = validate(config)
    if problems:
        return problems
    if not amb.is_ruled:
        return ["ambient is not an irrational ruled lattice"]
    sections = 0
    for c in config.components:
        v = c.cls.coeffs
        if amb.kind == KIND_TWISTED:
            if v[0] == 1:
                sections += 1
                if c.genus != amb.g:
                    problems.append(f"section {c.id} has genus {c.genus}, expected {amb.g}")
            elif v[0] == 0 and v[1] == 1:
                pass
            else:
                problems.append(f"component {c.id} class {c.cls} matches no allowed shape")
            continue
        b, f = v[0], v[1]
        exc = v[2:]
        if b == 1 and all(x in (0, -1) for x in exc):
            sections += 1
            if c.genus != amb.g:
                problems.append(f"section {c.id} has genus {c.genus}, expected {amb.g}")
        elif b == 0 and f == 1 and all(x in (0, -1) for x in exc):
            pass
        elif (
            b == 0
            and f == 0
            and sum(1 for x in exc if x == 1) == 1
            and all(x in (0, -1, 1) for x in exc)
        ):
            pass
        else:
            problems.append(f"component {c.id} class {c.cls} matches no allowed shape")
    if sections > 1:
        problems.append(f"{sections} section-type components, at most one allowed")
    return problems


def ruled_reduce(
    config: DivisorConfig,
    w: AreaVector,
) -> tuple[DivisorConfig, AreaVector, ReductionTrace]:
    """Contract exceptional generators cheapest-first; a generator meeting
    two components is skipped, and when every generator is blocked the
    edge-free fiber-type component F - E_j is contracted instead."""
    require_valid(config, w)
    if not config.ambient.is_ruled:
        raise ReductionError("ruled reduction needs a ruled ambient")
    if not check_hypothesis(config, w):
        raise ReductionError("adjoint area is not negative; hypothesis rejected up front")
    problems = ruled_validate(config)
    if problems:
        raise ReductionError("ruled shape validation failed: " + "; ".join(problems))

    steps: list[TraceStep] = []
    cur, curw = config, w
    while cur.ambient.kind == KIND_RULED and cur.ambient.n_exc > 0:
        gens = sorted(cur.ambient.exc_indices, key=lambda i: curw.areas[i])
        performed = False
        for i in gens:
            e = cur.ambient.basis_class(cur.ambient.names[i])
            try:
                cur, curw = _do_step(cur, curw, e, steps)
                performed = True
                break
            except (MoveError, NormalizeError, DivisorError):
                continue
        if performed:
            continue
        fib = cur.ambient.basis_class("F")
        cands = []
        for c in cur.components:
            diff = fib - c.cls
            if (
                cur.degree(c.id) == 0
                and is_exceptional_class(c.cls)
                and sum(1 for x in diff.coeffs if x != 0) == 1
            ):
                cands.append(c.cls)
        cands.sort(key=lambda x: area(x, curw))
        if not cands:
            raise ReductionError(
                "stuck in ruled reduction: every generator is blocked and no "
                "edge-free fiber-type exceptional component exists"
            )
        cur, curw = _attempt_candidates(cur, curw, cands, steps, "ruled")
    return cur, curw, ReductionTrace("ruled", tuple(steps), "MinimalRuled")
