"""JSON documents for configurations, certificates and plans, plus DOT
emission for dual graphs.  Rationals travel as "p/q" strings so documents
stay exact and language-neutral; emission is deterministic."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .cusp import AffineRuledCertificate
from .divisor import DivisorConfig
from .inflation import InflateNode, InflationPlan, SeedNode, ZigZagNode
from .lattice import (
    KIND_PP,
    KIND_RATIONAL,
    KIND_RULED,
    KIND_S2S2,
    KIND_TWISTED,
    AmbientLattice,
    AreaVector,
    HomologyClass,
    LatticeError,
)

CONFIG_SCHEMA = "sympdiv/config/v1"
CERTIFICATE_SCHEMA = "sympdiv/certificate/v1"
PLAN_SCHEMA = "sympdiv/plan/v1"


class DocumentError(ValueError):
    pass


# -- primitives ---------------------------------------------------------------


def parse_fraction(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise DocumentError(f"expected a rational string, got {s!r}")
    try:
        f = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"malformed rational {s!r}: {exc}") from exc
    return f


def frac_str(f: Fraction) -> str:
    return str(f)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


# -- ambients -------------------------------------------------------------------


def ambient_to_doc(amb: AmbientLattice) -> dict:
    doc = {"kind": amb.kind}
    if amb.kind == KIND_RATIONAL:
        doc["n"] = amb.n_exc
        doc["names"] = list(amb.names[1:])
    elif amb.kind == KIND_RULED:
        doc["g"] = amb.g
        doc["n"] = amb.n_exc
        doc["names"] = list(amb.names[2:])
    elif amb.kind == KIND_TWISTED:
        doc["g"] = amb.g
    return doc


def doc_to_ambient(doc) -> AmbientLattice:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DocumentError("ambient: expected an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == KIND_PP:
            return AmbientLattice.projective_plane()
        if kind == KIND_S2S2:
            return AmbientLattice.product_of_spheres()
        if kind == KIND_RATIONAL:
            n = int(doc["n"])
            names = tuple(doc["names"]) if "names" in doc else None
            return AmbientLattice.rational_blowup(n, names)
        if kind == KIND_RULED:
            n = int(doc["n"])
            names = tuple(doc["names"]) if "names" in doc else None
            return AmbientLattice.ruled_trivial(int(doc["g"]), n, names)
        if kind == KIND_TWISTED:
            return AmbientLattice.ruled_twisted(int(doc["g"]))
    except (KeyError, TypeError, ValueError, LatticeError) as exc:
        raise DocumentError(f"ambient: {exc}") from exc
    raise DocumentError(f"ambient: unknown kind {kind!r}")


# -- classes and configurations ---------------------------------------------------


def class_to_doc(cls: HomologyClass) -> dict:
    return {n: c for n, c in zip(cls.ambient.names, cls.coeffs) if c != 0}


def doc_to_class(doc, amb: AmbientLattice, where: str) -> HomologyClass:
    if not isinstance(doc, dict):
        raise DocumentError(f"{where}: class must be an object of name -> coefficient")
    vec = [0] * amb.dim
    for name, c in doc.items():
        if name not in amb.names:
            raise DocumentError(f"{where}: unknown generator {name!r}")
        if not isinstance(c, int):
            raise DocumentError(f"{where}: coefficient of {name} must be an integer")
        vec[amb.index_of(name)] = c
    return amb.from_coeffs(vec)


def config_to_doc(config: DivisorConfig, w: AreaVector | None = None) -> dict:
    doc = {
        "schema": CONFIG_SCHEMA,
        "ambient": ambient_to_doc(config.ambient),
        "components": [
            {"id": c.id, "class": class_to_doc(c.cls), "genus": c.genus}
            for c in config.components
        ],
        "edges": [list(e) for e in config.edges],
    }
    if w is not None:
        doc["areas"] = {n: frac_str(v) for n, v in zip(config.ambient.names, w.areas)}
    return doc


def parse_config(doc) -> tuple[DivisorConfig, AreaVector | None]:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    amb = doc_to_ambient(doc.get("ambient"))
    comps = []
    raw = doc.get("components")
    if not isinstance(raw, list) or not raw:
        raise DocumentError("components: expected a non-empty list")
    for i, c in enumerate(raw):
        if not isinstance(c, dict) or "id" not in c or "class" not in c:
            raise DocumentError(f"components[{i}]: need 'id' and 'class'")
        cls = doc_to_class(c["class"], amb, f"components[{i}]")
        if "genus" in c:
            comps.append((c["id"], cls, int(c["genus"])))
        else:
            comps.append((c["id"], cls))
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        if not isinstance(e, list) or len(e) != 2:
            raise DocumentError(f"edges[{i}]: expected a pair of component ids")
        edges.append((e[0], e[1]))
    try:
        config = DivisorConfig.build(amb, comps, edges)
    except (ValueError, LatticeError) as exc:
        raise DocumentError(str(exc)) from exc
    w = None
    if "areas" in doc:
        named = doc["areas"]
        if not isinstance(named, dict):
            raise DocumentError("areas: expected an object of generator -> rational")
        vec = []
        for name in amb.names:
            if name not in named:
                raise DocumentError(f"areas: missing generator {name}")
            vec.append(parse_fraction(named[name]))
        try:
            w = AreaVector(amb, tuple(vec))
        except LatticeError as exc:
            raise DocumentError(f"areas: {exc}") from exc
    return config, w


def area_to_doc(w: AreaVector) -> dict:
    return {n: frac_str(v) for n, v in zip(w.ambient.names, w.areas)}


# -- DOT -----------------------------------------------------------------------


def config_to_dot(config: DivisorConfig, title: str = "divisor") -> str:
    lines = [f'graph "{title}" {{']
    for c in config.components:
        from .lattice import pair as _pair

        sq = _pair(c.cls, c.cls)
        lines.append(f'  "{c.id}" [label="{c.id}: {c.cls} (sq {sq}, g {c.genus})"];')
    for a, b in config.edges:
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines)


# -- checks, traces, certificates --------------------------------------------------


def _checks_doc(checks) -> list:
    return [c.as_dict() for c in checks]


def certificate_to_doc(cert: AffineRuledCertificate) -> dict:
    input_doc = config_to_doc(cert.input_config, cert.input_area)
    doc = {
        "schema": CERTIFICATE_SCHEMA,
        "input": input_doc,
        "input_digest": digest(input_doc),
        "route": cert.route,
        "route_tag": cert.route_tag,
        "bounds": {
            "coeff_bound": cert.bounds.get("coeff_bound"),
            "area_bound": (
                frac_str(cert.bounds["area_bound"])
                if cert.bounds.get("area_bound") is not None
                else None
            ),
        },
        "hypothesis": cert.hypothesis.as_dict(),
        "traces": [
            {
                "stage": tr.stage,
                "terminal": tr.terminal,
                "steps": [
                    {
                        "class": class_to_doc(s.target),
                        "type": s.kind,
                        "b2_before": s.b2_before,
                        "b2_after": s.b2_after,
                        "hypothesis_before": s.hyp_before,
                        "hypothesis_after": s.hyp_after,
                    }
                    for s in tr.steps
                ],
            }
            for tr in cert.traces
        ],
        "trace_checks": _checks_doc(cert.trace_checks),
        "terminal": config_to_doc(cert.terminal_config, cert.terminal_area),
        "weights": list(cert.weights),
        "d_goodness": _checks_doc(cert.dgood),
        "assumptions": list(cert.assumptions),
    }
    if cert.cusp is not None:
        c = cert.cusp
        doc["cusp"] = {
            "p": c.p,
            "q": c.q,
            "spellings": [list(s) for s in c.spelled],
            "chain": list(c.chain_ids),
            "k": c.k,
            "negative_squares": list(c.a),
            "coefficients": list(c.c),
            "class": class_to_doc(c.cls),
            "d_a": c.da,
            "d_b": c.db,
            "checks": _checks_doc(c.checks),
        }
    else:
        doc["cusp"] = None
    if cert.resolution is not None:
        r = cert.resolution
        doc["resolution"] = {
            "total_transform": config_to_doc(r.config, None),
            "areas": area_to_doc(cert.resolution_area) if cert.resolution_area else None,
            "class": class_to_doc(r.a_tilde),
            "multiplicities": list(r.multiplicities),
            "exceptional": list(r.exc_names),
            "transverse": r.transverse_id,
            "checks": _checks_doc(r.checks),
        }
    else:
        doc["resolution"] = None
    if cert.combination is not None:
        doc["combination"] = {k: v for k, v in sorted(cert.combination.items())}
        doc["combination_check"] = (
            cert.combination_check.as_dict() if cert.combination_check else None
        )
    else:
        doc["combination"] = None
        doc["combination_check"] = None
    if cert.original is not None:
        o = cert.original
        doc["original"] = {
            "class": class_to_doc(o.cls),
            "p": o.p,
            "q": o.q,
            "d_a": o.da,
            "d_b": o.db,
            "checks": _checks_doc(o.checks),
            "notes": list(o.notes),
        }
    else:
        doc["original"] = None
    doc["all_passed"] = all(c.passed for c in cert.all_checks())
    return doc


def certificate_dot(cert: AffineRuledCertificate) -> str:
    """Dual graphs of every pipeline stage, deterministically ordered."""
    blocks = [config_to_dot(cert.input_config, "input")]
    cur = cert.input_config
    for tr in cert.traces:
        for i, s in enumerate(tr.steps):
            cur = s.blowdown.config
            blocks.append(config_to_dot(cur, f"{tr.stage}[{i}] after {s.kind} {s.target}"))
    blocks.append(config_to_dot(cert.terminal_config, "terminal"))
    if cert.resolution is not None:
        blocks.append(config_to_dot(cert.resolution.config, "resolution total transform"))
    return "\n\n".join(blocks) + "\n"


# -- plans ---------------------------------------------------------------------


def plan_to_doc(plan: InflationPlan) -> dict:
    nodes = []
    for node in plan.nodes:
        if isinstance(node, SeedNode):
            nodes.append(
                {
                    "type": "seed",
                    "base": plan_to_doc(node.base) if node.base is not None else None,
                    "epsilon": frac_str(node.epsilon) if node.epsilon is not None else None,
                    "vector": [frac_str(v) for v in node.vector],
                    "assumption": node.assumption,
                }
            )
        elif isinstance(node, InflateNode):
            nodes.append(
                {
                    "type": "inflate",
                    "class": list(node.z),
                    "label": node.label,
                    "t": frac_str(node.t),
                }
            )
        else:
            nodes.append(
                {
                    "type": "zigzag",
                    "diag": list(node.z_diag),
                    "down": list(node.z_down),
                    "label": node.label,
                    "total": frac_str(node.total),
                    "substeps": node.substeps,
                }
            )
    return {
        "schema": PLAN_SCHEMA,
        "g": plan.g,
        "n": plan.n,
        "target": [frac_str(v) for v in plan.target],
        "nodes": nodes,
    }


def doc_to_plan(doc) -> InflationPlan:
    if not isinstance(doc, dict) or doc.get("schema") != PLAN_SCHEMA:
        raise DocumentError("not an inflation plan document")
    try:
        g = int(doc["g"])
        n = int(doc["n"])
        target = tuple(parse_fraction(v) for v in doc["target"])
        nodes = []
        for i, nd in enumerate(doc["nodes"]):
            t = nd["type"]
            if t == "seed":
                base = doc_to_plan(nd["base"]) if nd.get("base") is not None else None
                eps = parse_fraction(nd["epsilon"]) if nd.get("epsilon") is not None else None
                nodes.append(
                    SeedNode(
                        base,
                        eps,
                        tuple(parse_fraction(v) for v in nd["vector"]),
                        nd.get("assumption", ""),
                    )
                )
            elif t == "inflate":
                nodes.append(
                    InflateNode(tuple(nd["class"]), nd.get("label", ""), parse_fraction(nd["t"]))
                )
            elif t == "zigzag":
                nodes.append(
                    ZigZagNode(
                        tuple(nd["diag"]),
                        tuple(nd["down"]),
                        nd.get("label", ""),
                        parse_fraction(nd["total"]),
                        int(nd["substeps"]),
                    )
                )
            else:
                raise DocumentError(f"nodes[{i}]: unknown node type {t!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"plan document: {exc}") from exc
    return InflationPlan(g, n, target, tuple(nodes))
