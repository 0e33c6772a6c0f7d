"""JSON reports of evaluated states (schema ``rbs-report/1``)."""

from __future__ import annotations

import json
from fractions import Fraction

from .exact_algebra import CoefficientRing, GradedModule
from .graded_ring import UNIT, Generator, Provenance, make_algebra
from .reeb_state import ReebState

SCHEMA = "rbs-report/1"


def _provenance(p: Provenance) -> dict:
    attrs = {}
    for k, v in p.attrs:
        attrs[k] = _provenance(v) if isinstance(v, Provenance) else str(v)
    return {"kind": p.kind, "attrs": attrs}


def _module(m: GradedModule) -> dict:
    return {str(d): [str(q) for q in m.factors(d)] for d in range(m.top_degree + 1)}


def report_dict(state: ReebState, verdicts=()) -> dict:
    alg = state.cohomology
    labels = alg.labels
    products = []
    for (i, j), val in sorted(alg.table.items()):
        products.append({"left": labels[i], "right": labels[j],
                         "value": {labels[t]: str(c) for t, c in val}})
    return {
        "schema": SCHEMA,
        "n": state.n,
        "ring": str(state.ring),
        "flags": {"ring_certified": state.ring_certified, "module_only": state.module_only,
                  "special_generic": state.special_generic, "degrade_reason": state.degrade_reason},
        "betti": state.betti(),
        "homology": _module(state.homology),
        "cohomology": {
            "module": _module(alg.module),
            "generators": [{"label": g.label, "degree": g.degree, "order": str(g.order),
                            "provenance": _provenance(g.provenance)} for g in alg.generators],
            "products": products,
        },
        "q_markers": sorted(state.q_markers),
        "log": [str(e) for e in state.log],
        "verdicts": list(verdicts),
    }


def emit_report(state: ReebState, verdicts=()) -> str:
    """Canonical JSON: sorted keys, so re-serializing a loaded report is stable."""
    return json.dumps(report_dict(state, verdicts), sort_keys=True, indent=2) + "\n"


def load_report(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {data.get('schema')!r}")
    return data


def _restore_provenance(d: dict) -> Provenance:
    attrs = {k: _restore_provenance(v) if isinstance(v, dict) else v for k, v in d["attrs"].items()}
    return Provenance.make(d["kind"], **attrs)


def state_from_report(data: dict) -> ReebState:
    """Rebuild enough of a state for invariant comparison; the log is not replayable."""
    ring = CoefficientRing.parse(data["ring"])
    n = data["n"]
    parse_c = (lambda s: Fraction(s)) if ring.kind == "Q" else int
    homology = GradedModule.from_factors(ring, n, {int(d): [int(q) for q in fs]
                                                   for d, fs in data["homology"].items()})
    coh = data["cohomology"]
    gens = []
    for g in coh["generators"]:
        prov = _restore_provenance(g["provenance"])
        gens.append(Generator(g["degree"], int(g["order"]), g["label"], UNIT if prov == UNIT else prov))
    index = {g.label: i for i, g in enumerate(gens)}
    products = {(index[p["left"]], index[p["right"]]): {index[t]: parse_c(c) for t, c in p["value"].items()}
                for p in coh["products"]}
    alg = make_algebra(ring, n, gens, products)
    flags = data["flags"]
    return ReebState(n, ring, homology, alg, frozenset(data["q_markers"]), flags["ring_certified"], (),
                     flags["special_generic"], flags["degrade_reason"]).check()
