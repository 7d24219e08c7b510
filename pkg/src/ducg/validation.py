"""Semantic validation of loaded models.

Findings are data, not exceptions: a report with no errors means the model
is usable for inference.  The checks enforce the sparse-matrix conventions
(no state-0 rows/columns, per-column mass at most 1), the DAG requirement,
and the kind discipline of links, gates, diseases and risk scalers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GateExpressionError
from .model import (
    CHECKABLE_KINDS,
    ChiefComplaintModel,
    DISEASE_KINDS,
    GATE_KINDS,
    expression_variables,
    parse_gate_expression,
)


@dataclass(frozen=True)
class Finding:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.path}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code: str, path: str, message: str):
        self.errors.append(Finding(code, path, message))

    def warn(self, code: str, path: str, message: str):
        self.warnings.append(Finding(code, path, message))


def validate(model: ChiefComplaintModel) -> ValidationReport:
    report = ValidationReport()
    tol = model.defaults.tolerance

    for var in model.variables.values():
        path = f"variables[{var.id}]"
        if var.n_states < 2:
            report.error("state-domain", path, "at least 2 states required")
        if var.id.kind == "D" and var.n_states != 2:
            report.error("state-domain", path, "default-cause variables have exactly 2 states")
        if var.attention is not None:
            if var.id.kind not in CHECKABLE_KINDS:
                report.error("attribute-kind", path, "attention applies to X/SX variables only")
            elif var.attention < 0:
                report.error("attribute-range", path, "attention must be >= 0")
        if var.cost is not None:
            if var.id.kind not in CHECKABLE_KINDS:
                report.error("attribute-kind", path, "cost applies to X/SX variables only")
            elif var.cost <= 0:
                report.error("attribute-range", path, "cost must be > 0")

    for i, link in enumerate(model.links):
        path = f"links[{link.parent}->{link.child}]"
        if link.child.kind not in CHECKABLE_KINDS:
            report.error("link-kind", path, f"link child must be X/SX, got {link.child.kind}")
        if link.parent.kind == "D" and link.parent not in model.variables:
            report.error("link-kind", path, "default-cause parent not declared")
        for j in sorted(link.parent_states_used()):
            mass = link.column_sum(j)
            if mass > 1.0 + tol:
                report.error(
                    "column-mass",
                    path,
                    f"column mass exceeds 1 for parent state {j}: {mass:.6g}",
                )
        if not link.entries:
            report.warn("empty-link", path, "link carries no causation entries")

    for gate_id, spec in model.gates.items():
        path = f"gates[{gate_id}]"
        if gate_id.kind not in GATE_KINDS:
            report.error("gate-kind", path, f"gate id must be G/SG, got {gate_id.kind}")
        gate_var = model.variables.get(gate_id)
        declared = set(spec.inputs)
        for expr, state in spec.rows:
            if gate_var is not None and not 0 <= state < gate_var.n_states:
                report.error("gate-state", path, f"row state {state} out of range")
            try:
                node = parse_gate_expression(expr)
            except GateExpressionError as exc:
                report.error("gate-expr", path, str(exc))
                continue
            for var in expression_variables(node):
                if var not in declared:
                    report.error("gate-expr", path, f"expression references undeclared input {var}")
        if gate_var is not None and not 0 <= spec.default_state < gate_var.n_states:
            report.error("gate-state", path, f"default state {spec.default_state} out of range")

    gate_ids_without_spec = [
        v.id for v in model.variables.values() if v.id.kind in GATE_KINDS and v.id not in model.gates
    ]
    for gid in gate_ids_without_spec:
        report.error("gate-spec", f"variables[{gid}]", "gate variable has no logic specification")

    for vid, attrs in model.diseases.items():
        path = f"diseases[{vid}]"
        if vid.kind not in DISEASE_KINDS:
            report.error("disease-kind", path, f"disease id must be B/BX, got {vid.kind}")
        var = model.variables.get(vid)
        total = 0.0
        for state, p in attrs.priors.items():
            if var is not None and not 1 <= state < var.n_states:
                report.error("prior-state", path, f"prior state {state} out of range")
            if not 0.0 <= p <= 1.0:
                report.error("prior-range", path, f"prior {p} outside [0, 1]")
            total += p
        if total > 1.0 + tol:
            report.error("prior-mass", path, f"abnormal priors sum to {total:.6g} > 1")
        for state, w in attrs.dangers.items():
            if w < 0:
                report.error("danger-range", path, f"danger {w} must be >= 0")

    for vid in model.variables:
        if vid.kind in DISEASE_KINDS and vid not in model.diseases:
            report.error(
                "disease-missing", f"variables[{vid}]", "disease variable has no prior attributes"
            )

    for scaler in model.risk_scalers:
        path = f"risk_scalers[{scaler.target}]"
        if scaler.target.kind != "BX":
            report.error("scaler-kind", path, "scaler target must be a BX disease")
        if scaler.source.kind not in ("X", "SX", "SG"):
            report.error("scaler-kind", path, "scaler source must be a risk factor (X/SX/SG)")

    try:
        model.topological_order()
    except ValueError:
        report.error("cycle", "links", "cycle detected: the causal graph must be a DAG")

    reachable = _connected_variables(model)
    for vid in model.variables:
        if vid not in reachable:
            report.warn("isolated-variable", f"variables[{vid}]", "variable has no links or gates")

    return report


def _connected_variables(model: ChiefComplaintModel) -> set:
    connected = set()
    for link in model.links:
        connected.add(link.parent)
        connected.add(link.child)
    for gate_id, spec in model.gates.items():
        connected.add(gate_id)
        connected.update(spec.inputs)
    for scaler in model.risk_scalers:
        connected.add(scaler.target)
        connected.add(scaler.source)
    return connected
