"""Native JSON network documents.

::

    {"format_version": "1",
     "name": "...",
     "variables": [{"name": "A", "states": ["0", "1"], "parents": []}, ...],
     "cpts": [{"child": "A", "values": [...]}, ...],
     "evidence": {"B": "1"}}              # optional

``values`` lists the CPT column by column (parent configurations in
mixed-radix order, last parent fastest), each column over the child's states.
"""
from __future__ import annotations

import json

import numpy as np

from ..errors import NetworkFormatError
from ..network import Network, make_network

FORMAT_VERSION = "1"


def serialize_native(net: Network) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "name": net.name,
        "variables": [
            {
                "name": v.name,
                "states": list(v.states),
                "parents": [net.variables[p].name for p in v.parents],
            }
            for v in net.variables
        ],
        "cpts": [
            {"child": net.variables[c.child].name, "values": [float(x) for x in c.columns.ravel()]}
            for c in net.cpts
        ],
    }
    if net.evidence:
        doc["evidence"] = {
            net.variables[k].name: net.variables[k].states[s] for k, s in net.evidence.items()
        }
    return json.dumps(doc, indent=1) + "\n"


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise NetworkFormatError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise NetworkFormatError(f"{where}: field {key!r} has the wrong type")
    return val


def parse_native(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise NetworkFormatError("document must be a JSON object", 1, 1)
    version = str(doc.get("format_version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise NetworkFormatError(f"unsupported format_version {version!r}")
    name = doc.get("name", "")
    variables = []
    for k, v in enumerate(_require(doc, "variables", list, "document")):
        where = f"variables[{k}]"
        vname = _require(v, "name", str, where)
        states = _require(v, "states", list, where)
        parents = v.get("parents", [])
        if not isinstance(parents, list):
            raise NetworkFormatError(f"{where}: field 'parents' has the wrong type")
        variables.append((vname, [str(s) for s in states], [str(p) for p in parents]))
    card = {vname: len(states) for vname, states, _ in variables}
    parents_of = {vname: parents for vname, _, parents in variables}
    tables = {}
    for k, c in enumerate(_require(doc, "cpts", list, "document")):
        where = f"cpts[{k}]"
        child = _require(c, "child", str, where)
        values = _require(c, "values", list, where)
        if child not in card:
            raise NetworkFormatError(f"{where}: unknown variable {child!r}")
        if child in tables:
            raise NetworkFormatError(f"{where}: second CPT for {child!r}")
        try:
            arr = np.array(values, dtype=np.float64)
        except (TypeError, ValueError):
            raise NetworkFormatError(f"{where}: values must be numbers") from None
        ncols = 1
        for p in parents_of[child]:
            if p not in card:
                raise NetworkFormatError(f"variable {child!r} has unknown parent {p!r}")
            ncols *= card[p]
        if arr.shape != (ncols * card[child],):
            raise NetworkFormatError(
                f"{where}: expected {ncols * card[child]} values, got {arr.size}"
            )
        tables[child] = arr.reshape(ncols, card[child])
    evidence = doc.get("evidence") or None
    return make_network(name, variables, tables, evidence=evidence)
