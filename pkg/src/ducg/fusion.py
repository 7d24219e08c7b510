"""Fusion of single-disease modules into one chief-complaint model.

Variables with the same (kind, index) across modules are merged into a
single node that keeps the union of incoming links.  Attribute conflicts on
shared variables are hard errors: modules are authored independently and a
silent merge would hide authoring bugs.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import FusionConflictError
from .model import (
    ChiefComplaintModel,
    DiseaseAttributes,
    EngineDefaults,
    FunctionalLink,
    LogicGateSpec,
    RiskScaler,
    SingleDiseaseModule,
    Variable,
    VariableId,
)


def fuse(
    modules: Sequence[SingleDiseaseModule],
    model_id: str = "fused",
    chief_complaints: Iterable[str] = (),
    defaults: EngineDefaults = EngineDefaults(),
) -> ChiefComplaintModel:
    """Merge individually valid single-disease modules into one model."""
    variables: dict[VariableId, Variable] = {}
    links: dict[tuple[VariableId, VariableId], FunctionalLink] = {}
    gates: dict[VariableId, LogicGateSpec] = {}
    diseases: dict[VariableId, DiseaseAttributes] = {}
    scalers: dict[tuple[VariableId, VariableId], RiskScaler] = {}

    for module in modules:
        disease_id = module.disease.variable
        if disease_id in diseases:
            raise FusionConflictError(f"duplicate disease id {disease_id}")
        diseases[disease_id] = module.disease

        for vid, var in module.variables.items():
            existing = variables.get(vid)
            if existing is None:
                variables[vid] = var
                continue
            if existing.state_names != var.state_names:
                raise FusionConflictError(
                    f"state-domain conflict on shared variable {vid}: "
                    f"{existing.state_names} vs {var.state_names}"
                )
            if existing.epsilon != var.epsilon or existing.beta != var.beta:
                raise FusionConflictError(
                    f"attention/cost conflict on shared variable {vid}"
                )
            if existing.name != var.name:
                raise FusionConflictError(
                    f"name conflict on shared variable {vid}: "
                    f"{existing.name!r} vs {var.name!r}"
                )

        for link in module.links:
            key = (link.parent, link.child)
            existing_link = links.get(key)
            if existing_link is None:
                links[key] = link
            elif existing_link.r != link.r or dict(existing_link.entries) != dict(link.entries):
                raise FusionConflictError(
                    f"conflicting duplicate link {link.parent}->{link.child}"
                )

        for gate_id, spec in module.gates.items():
            existing_gate = gates.get(gate_id)
            if existing_gate is None:
                gates[gate_id] = spec
            elif existing_gate != spec:
                raise FusionConflictError(f"conflicting gate specification {gate_id}")

        for scaler in module.risk_scalers:
            key = (scaler.target, scaler.source)
            existing_scaler = scalers.get(key)
            if existing_scaler is None:
                scalers[key] = scaler
            elif dict(existing_scaler.scale) != dict(scaler.scale):
                raise FusionConflictError(
                    f"conflicting risk scaler {scaler.source}->{scaler.target}"
                )

    return ChiefComplaintModel(
        model_id=model_id,
        chief_complaints=chief_complaints,
        variables=variables,
        links=list(links.values()),
        gates=gates,
        diseases=diseases,
        risk_scalers=list(scalers.values()),
        defaults=defaults,
    )
