"""Loading and saving of model files.

The on-disk format is JSON with a fixed top level::

    {"format_version": "1", "model_id": ..., "chief_complaints": [...],
     "defaults": {"theta_d": ..., "tolerance": ...},
     "variables": [...], "links": [...], "gates": [...],
     "diseases": [...], "risk_scalers": [...]}

A file may instead carry ``"modules": [...]`` with one single-disease module
per entry; those are loaded individually and fused by the caller.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ModelFormatError, UnknownReferenceError, VersionMismatchError
from .model import (
    ChiefComplaintModel,
    DiseaseAttributes,
    EngineDefaults,
    FunctionalLink,
    LogicGateSpec,
    ModuleMetadata,
    RiskScaler,
    SingleDiseaseModule,
    Variable,
    VariableId,
)

SUPPORTED_FORMAT_VERSION = "1"


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ModelFormatError(f"missing required field {key!r}", path)
    return data[key]


def _as_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ModelFormatError("expected a list", path)
    return value


def _variable_ref(data: Any, path: str) -> VariableId:
    if isinstance(data, str):
        try:
            return VariableId.parse(data)
        except ValueError as exc:
            raise ModelFormatError(str(exc), path) from exc
    if not isinstance(data, dict):
        raise ModelFormatError("expected {kind, index} or an id string", path)
    kind = _require(data, "kind", path)
    index = _require(data, "index", path)
    try:
        return VariableId(str(kind), int(index))
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(str(exc), path) from exc


def _parse_variable(data: dict, path: str) -> Variable:
    vid = VariableId(
        str(_require(data, "kind", path)), int(_require(data, "index", path))
    )
    states = _as_list(_require(data, "states", path), f"{path}.states")
    if len(states) < 2:
        raise ModelFormatError("a variable needs at least 2 states", f"{path}.states")
    return Variable(
        id=vid,
        name=str(_require(data, "name", path)),
        state_names=tuple(str(s) for s in states),
        attention=float(data["attention"]) if data.get("attention") is not None else None,
        cost=float(data["cost"]) if data.get("cost") is not None else None,
    )


def _parse_link(data: dict, path: str, variables: dict) -> FunctionalLink:
    parent = _variable_ref(_require(data, "parent", path), f"{path}.parent")
    child = _variable_ref(_require(data, "child", path), f"{path}.child")
    for ref, which in ((parent, "parent"), (child, "child")):
        if ref not in variables:
            raise UnknownReferenceError(f"unknown variable {ref}", f"{path}.{which}")
    r = float(_require(data, "r", path))
    if not 0 < r <= 1:
        raise ModelFormatError(f"r must be in (0, 1], got {r}", f"{path}.r")
    entries: dict[tuple[int, int], float] = {}
    for i, cell in enumerate(_as_list(_require(data, "a", path), f"{path}.a")):
        cell_path = f"{path}.a[{i}]"
        k = int(_require(cell, "k", cell_path))
        j = int(_require(cell, "j", cell_path))
        p = float(_require(cell, "p", cell_path))
        if k < 1:
            raise ModelFormatError("child state k must be >= 1 (state 0 is residual)", cell_path)
        if j < 1:
            raise ModelFormatError("parent state j must be >= 1 (state 0 has no output)", cell_path)
        if k >= variables[child].n_states:
            raise ModelFormatError(f"child state {k} out of range for {child}", cell_path)
        if j >= variables[parent].n_states:
            raise ModelFormatError(f"parent state {j} out of range for {parent}", cell_path)
        if not 0.0 <= p <= 1.0:
            raise ModelFormatError(f"probability {p} outside [0, 1]", cell_path)
        if (k, j) in entries:
            raise ModelFormatError(f"duplicate entry for (k={k}, j={j})", cell_path)
        entries[(k, j)] = p
    return FunctionalLink(parent=parent, child=child, r=r, entries=entries)


def _parse_gate(data: dict, path: str, variables: dict) -> LogicGateSpec:
    gate_id = _variable_ref(_require(data, "id", path), f"{path}.id")
    if gate_id not in variables:
        raise UnknownReferenceError(f"unknown variable {gate_id}", f"{path}.id")
    inputs = tuple(
        _variable_ref(ref, f"{path}.inputs[{i}]")
        for i, ref in enumerate(_as_list(_require(data, "inputs", path), f"{path}.inputs"))
    )
    for i, inp in enumerate(inputs):
        if inp not in variables:
            raise UnknownReferenceError(f"unknown variable {inp}", f"{path}.inputs[{i}]")
    rows = []
    for i, row in enumerate(_as_list(_require(data, "rows", path), f"{path}.rows")):
        row_path = f"{path}.rows[{i}]"
        rows.append((str(_require(row, "expr", row_path)), int(_require(row, "state", row_path))))
    return LogicGateSpec(
        gate=gate_id,
        inputs=inputs,
        rows=tuple(rows),
        default_state=int(data.get("default_state", 0)),
    )


def _parse_disease(data: dict, path: str, variables: dict) -> DiseaseAttributes:
    vid = _variable_ref(_require(data, "id", path), f"{path}.id")
    if vid not in variables:
        raise UnknownReferenceError(f"unknown variable {vid}", f"{path}.id")
    priors: dict[int, float] = {}
    for i, entry in enumerate(_as_list(_require(data, "priors", path), f"{path}.priors")):
        entry_path = f"{path}.priors[{i}]"
        state = int(_require(entry, "state", entry_path))
        if state < 1:
            raise ModelFormatError("prior entries cover abnormal states only", entry_path)
        priors[state] = float(_require(entry, "p", entry_path))
    dangers: dict[int, float] = {}
    for i, entry in enumerate(_as_list(data.get("dangers", []), f"{path}.dangers")):
        entry_path = f"{path}.dangers[{i}]"
        dangers[int(_require(entry, "state", entry_path))] = float(_require(entry, "w", entry_path))
    return DiseaseAttributes(
        variable=vid,
        priors=priors,
        dangers=dangers,
        icd_codes=tuple(str(c) for c in data.get("icd", [])),
        display_name=str(data.get("name", "")),
    )


def _parse_scaler(data: dict, path: str, variables: dict) -> RiskScaler:
    target = _variable_ref(_require(data, "target", path), f"{path}.target")
    source = _variable_ref(_require(data, "source", path), f"{path}.source")
    for ref, which in ((target, "target"), (source, "source")):
        if ref not in variables:
            raise UnknownReferenceError(f"unknown variable {ref}", f"{path}.{which}")
    raw = _require(data, "scale", path)
    if isinstance(raw, dict):
        scale = {int(state): float(factor) for state, factor in raw.items()}
    else:
        scale = {
            int(_require(cell, "state", f"{path}.scale[{i}]")): float(
                _require(cell, "factor", f"{path}.scale[{i}]")
            )
            for i, cell in enumerate(_as_list(raw, f"{path}.scale"))
        }
    for state, factor in scale.items():
        if factor <= 0:
            raise ModelFormatError(f"scale factor must be > 0, got {factor}", f"{path}.scale")
    return RiskScaler(target=target, source=source, scale=scale)


def _parse_sections(data: dict, path_prefix: str = ""):
    variables: dict[VariableId, Variable] = {}
    for i, raw in enumerate(_as_list(data.get("variables", []), f"{path_prefix}variables")):
        var = _parse_variable(raw, f"{path_prefix}variables[{i}]")
        if var.id in variables:
            raise ModelFormatError(f"duplicate variable {var.id}", f"{path_prefix}variables[{i}]")
        variables[var.id] = var
    links = [
        _parse_link(raw, f"{path_prefix}links[{i}]", variables)
        for i, raw in enumerate(_as_list(data.get("links", []), f"{path_prefix}links"))
    ]
    gates: dict[VariableId, LogicGateSpec] = {}
    for i, raw in enumerate(_as_list(data.get("gates", []), f"{path_prefix}gates")):
        spec = _parse_gate(raw, f"{path_prefix}gates[{i}]", variables)
        if spec.gate in gates:
            raise ModelFormatError(f"duplicate gate {spec.gate}", f"{path_prefix}gates[{i}]")
        gates[spec.gate] = spec
    diseases: dict[VariableId, DiseaseAttributes] = {}
    for i, raw in enumerate(_as_list(data.get("diseases", []), f"{path_prefix}diseases")):
        attrs = _parse_disease(raw, f"{path_prefix}diseases[{i}]", variables)
        if attrs.variable in diseases:
            raise ModelFormatError(
                f"duplicate disease {attrs.variable}", f"{path_prefix}diseases[{i}]"
            )
        diseases[attrs.variable] = attrs
    scalers = [
        _parse_scaler(raw, f"{path_prefix}risk_scalers[{i}]", variables)
        for i, raw in enumerate(_as_list(data.get("risk_scalers", []), f"{path_prefix}risk_scalers"))
    ]
    return variables, links, gates, diseases, scalers


def _check_version(data: dict):
    version = data.get("format_version")
    if version != SUPPORTED_FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported format_version {version!r}, expected {SUPPORTED_FORMAT_VERSION!r}",
            "format_version",
        )


def load_model(source: str | bytes | dict) -> ChiefComplaintModel | list[SingleDiseaseModule]:
    """Parse a model file into a bound in-memory model.

    Accepts JSON text/bytes or an already-decoded dict.  Returns a fused
    chief-complaint model, or a list of single-disease modules when the file
    carries a ``modules`` section instead of flat variable/link tables.
    """
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"invalid JSON: {exc}") from exc
    else:
        data = source
    if not isinstance(data, dict):
        raise ModelFormatError("top level must be an object")
    _check_version(data)

    if "modules" in data:
        modules = []
        for i, raw in enumerate(_as_list(data["modules"], "modules")):
            modules.append(_load_module(raw, f"modules[{i}]."))
        return modules

    variables, links, gates, diseases, scalers = _parse_sections(data)
    defaults_raw = data.get("defaults", {})
    defaults = EngineDefaults(
        theta_d=float(defaults_raw.get("theta_d", 0.01)),
        tolerance=float(defaults_raw.get("tolerance", 1e-9)),
    )
    return ChiefComplaintModel(
        model_id=str(_require(data, "model_id", "")),
        chief_complaints=[str(c) for c in data.get("chief_complaints", [])],
        variables=variables,
        links=links,
        gates=gates,
        diseases=diseases,
        risk_scalers=scalers,
        defaults=defaults,
    )


def _load_module(data: dict, prefix: str) -> SingleDiseaseModule:
    variables, links, gates, diseases, scalers = _parse_sections(data, prefix)
    disease_raw = _require(data, "disease", prefix.rstrip("."))
    disease = _parse_disease(disease_raw, f"{prefix}disease", variables)
    meta = data.get("metadata", {})
    return SingleDiseaseModule(
        disease=disease,
        variables=variables,
        links=links,
        gates=gates,
        risk_scalers=scalers,
        metadata=ModuleMetadata(
            author=str(meta.get("author", "")), version=str(meta.get("version", ""))
        ),
    )


def load_model_file(path) -> ChiefComplaintModel | list[SingleDiseaseModule]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_model(fh.read())


def _ref_dict(vid: VariableId) -> dict:
    return {"kind": vid.kind, "index": vid.index}


def model_to_dict(model: ChiefComplaintModel) -> dict:
    """Canonical dict form of a model, suitable for JSON serialization."""
    return {
        "format_version": SUPPORTED_FORMAT_VERSION,
        "model_id": model.model_id,
        "chief_complaints": list(model.chief_complaints),
        "defaults": {
            "theta_d": model.defaults.theta_d,
            "tolerance": model.defaults.tolerance,
        },
        "variables": [
            {
                "kind": var.id.kind,
                "index": var.id.index,
                "name": var.name,
                "states": list(var.state_names),
                **({"attention": var.attention} if var.attention is not None else {}),
                **({"cost": var.cost} if var.cost is not None else {}),
            }
            for var in sorted(model.variables.values(), key=lambda v: v.id)
        ],
        "links": [
            {
                "parent": _ref_dict(link.parent),
                "child": _ref_dict(link.child),
                "r": link.r,
                "a": [
                    {"k": k, "j": j, "p": p}
                    for (k, j), p in sorted(link.entries.items())
                ],
            }
            for link in sorted(model.links, key=lambda l: (l.parent, l.child))
        ],
        "gates": [
            {
                "id": str(spec.gate),
                "inputs": [str(i) for i in spec.inputs],
                "rows": [{"expr": expr, "state": state} for expr, state in spec.rows],
                "default_state": spec.default_state,
            }
            for spec in sorted(model.gates.values(), key=lambda g: g.gate)
        ],
        "diseases": [
            {
                "id": str(attrs.variable),
                "priors": [{"state": s, "p": p} for s, p in sorted(attrs.priors.items())],
                "dangers": [{"state": s, "w": w} for s, w in sorted(attrs.dangers.items())],
                "icd": list(attrs.icd_codes),
                "name": attrs.display_name,
            }
            for attrs in sorted(model.diseases.values(), key=lambda d: d.variable)
        ],
        "risk_scalers": [
            {
                "target": _ref_dict(s.target),
                "source": _ref_dict(s.source),
                "scale": [
                    {"state": state, "factor": factor}
                    for state, factor in sorted(s.scale.items())
                ],
            }
            for s in sorted(model.risk_scalers, key=lambda s: (s.target, s.source))
        ],
    }


def save_model(model: ChiefComplaintModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True)
