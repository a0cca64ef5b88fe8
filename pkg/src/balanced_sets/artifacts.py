"""Versioned JSON artifacts.

Every document carries ``format`` (``balanced-sets/<kind>``) and ``version``.
Rationals are always strings ``"p/q"`` (``"p"`` when integral), intervals are
two-element lists of such strings, multi-indices are lists of ints. Output is
key-sorted with fixed indentation so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .construction import BalancedSystem, ConstructionPlan, IndexFunction
from .contraction import FiniteMap
from .errors import ArtifactError
from .gauge import GaugeFunction
from .measure import Cover, LowerBoundCertificate
from .numerics import ClosedInterval, format_rational, parse_rational

VERSION = 1
PREFIX = "balanced-sets/"


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def envelope(kind: str, body: dict) -> dict:
    return {"format": PREFIX + kind, "version": VERSION, **body}


def write(path, kind: str, body: dict) -> str:
    text = dumps(envelope(kind, body))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read(path, kind: Optional[str] = None) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    return check(doc, kind, str(path))


def check(doc, kind: Optional[str] = None, where: str = "document") -> dict:
    if not isinstance(doc, dict) or not str(doc.get("format", "")).startswith(PREFIX):
        raise ArtifactError(f"{where} is not a balanced-sets artifact")
    if doc.get("version") != VERSION:
        raise ArtifactError(f"{where}: unsupported version {doc.get('version')!r}")
    if kind is not None and doc["format"] != PREFIX + kind:
        raise ArtifactError(f"{where}: expected {kind}, found {doc['format'][len(PREFIX):]}")
    return doc


def kind_of(doc: dict) -> str:
    return doc["format"][len(PREFIX):]


# --------------------------------------------------------------------------

def plan_to_json(plan: ConstructionPlan) -> dict:
    return {
        "branching": list(plan.branching),
        "ambient": plan.ambient.to_json(),
        "strict_growth": plan.strict_growth,
    }


def plan_from_json(doc: dict) -> ConstructionPlan:
    try:
        return ConstructionPlan(
            tuple(int(a) for a in doc["branching"]),
            ClosedInterval.from_json(doc.get("ambient", ["0", "1"])),
            bool(doc.get("strict_growth", True)),
        )
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"malformed plan: {exc}") from exc


def system_to_json(system: BalancedSystem) -> dict:
    pieces = []
    for n in range(1, system.depth + 1):
        for idx in system.level_indices(n):
            pieces.append([list(idx), system.pieces[idx].to_json()])
    pieces.sort(key=lambda p: p[0])
    return {
        "plan": plan_to_json(system.plan),
        "separations": [format_rational(b) for b in system.separations],
        "phi": {str(n): list(v) for n, v in sorted(system.phi.table.items())},
        "pieces": pieces,
    }


def system_from_json(doc: dict) -> BalancedSystem:
    try:
        plan = plan_from_json(doc["plan"])
        table = {int(n): tuple(v) for n, v in doc["phi"].items()}
        pieces = {tuple(idx): ClosedInterval.from_json(iv) for idx, iv in doc["pieces"]}
        seps = tuple(parse_rational(b) for b in doc["separations"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed system: {exc}") from exc
    return BalancedSystem(plan, pieces, seps, IndexFunction(plan.branching, table))


def cover_to_json(cover: Cover) -> dict:
    return {
        "target": None if cover.target is None else list(cover.target),
        "elements": [e.to_json() for e in cover.elements],
    }


def cover_from_json(doc: dict) -> Cover:
    try:
        target = doc.get("target")
        return Cover(
            tuple(ClosedInterval.from_json(e) for e in doc["elements"]),
            None if target is None else tuple(int(i) for i in target),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed cover: {exc}") from exc


def certificate_to_json(cert: LowerBoundCertificate) -> dict:
    return {
        "target": None if cert.target is None else list(cert.target),
        "m": cert.m,
        "level_count": cert.level_count,
        "required": cert.required,
        "claimed": format_rational(cert.claimed),
        "elements": [e.to_json() for e in cert.elements],
        "counts": list(cert.counts),
        "values": [format_rational(v) for v in cert.values],
        "total": cert.total,
        "bound": format_rational(cert.bound),
        "cost": format_rational(cert.cost),
        "gauge": cert.gauge.to_json(),
        "verdict": "pass" if cert.passed else "fail",
        "failures": list(cert.failures),
    }


def certificate_from_json(doc: dict) -> LowerBoundCertificate:
    try:
        target = doc.get("target")
        return LowerBoundCertificate(
            target=None if target is None else tuple(target),
            m=int(doc["m"]),
            level_count=int(doc["level_count"]),
            required=int(doc["required"]),
            claimed=parse_rational(doc["claimed"]),
            elements=tuple(ClosedInterval.from_json(e) for e in doc["elements"]),
            counts=[int(s) for s in doc["counts"]],
            gauge=GaugeFunction.from_json(doc["gauge"]),
            values=[parse_rational(v) for v in doc["values"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed certificate: {exc}") from exc


def map_from_json(doc: dict) -> FiniteMap:
    try:
        return FiniteMap.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed map: {exc}") from exc


def rational_pairs(pairs) -> list:
    return [[format_rational(Fraction(x)), format_rational(Fraction(y))] for x, y in pairs]
