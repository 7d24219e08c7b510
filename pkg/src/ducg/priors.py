"""Risk-factor adjustment of disease priors."""

from __future__ import annotations

from .evidence import EvidenceSet
from .model import ChiefComplaintModel, VariableId


def apply_risk_evidence(
    model: ChiefComplaintModel, risk_observations: EvidenceSet
) -> dict[VariableId, dict[int, float]]:
    """Prior table per disease after zooming BX priors by observed risk factors.

    Each active scaler multiplies the target's abnormal-state priors by the
    factor registered for the observed source state; results clamp to [0, 1]
    and state 0 takes the residual.  If clamping still leaves the abnormal
    mass above 1, the abnormal states are rescaled proportionally so that the
    full distribution keeps summing to 1.  Scalers whose source is
    unobserved are inert.
    """
    table: dict[VariableId, dict[int, float]] = {}
    for vid, attrs in model.diseases.items():
        priors = {state: attrs.prior(state) for state in _abnormal_states(model, vid)}
        factor = 1.0
        for scaler in model.risk_scalers:
            if scaler.target != vid:
                continue
            source_state = _source_state(model, scaler.source, risk_observations)
            if source_state is None:
                continue
            factor *= scaler.scale.get(source_state, 1.0)
        if factor != 1.0:
            priors = {s: min(1.0, max(0.0, p * factor)) for s, p in priors.items()}
        abnormal_mass = sum(priors.values())
        if abnormal_mass > 1.0:
            priors = {s: p / abnormal_mass for s, p in priors.items()}
            abnormal_mass = 1.0
        full = {0: max(0.0, 1.0 - abnormal_mass)}
        full.update(priors)
        table[vid] = full
    return table


def _abnormal_states(model: ChiefComplaintModel, vid: VariableId) -> tuple[int, ...]:
    var = model.variables.get(vid)
    if var is not None:
        return var.abnormal_states
    return tuple(sorted(model.diseases[vid].priors))


def _source_state(
    model: ChiefComplaintModel, source: VariableId, evidence: EvidenceSet
) -> int | None:
    """Observed state of a scaler source; SG sources evaluate their gate."""
    if source.kind == "SG":
        spec = model.gates.get(source)
        if spec is None:
            return None
        if any(inp not in evidence.observed for inp in spec.inputs):
            return None
        return spec.evaluate({inp: evidence.observed[inp] for inp in spec.inputs})
    return evidence.observed.get(source)


def ranked_priors(
    model: ChiefComplaintModel, risk_observations: EvidenceSet
) -> list[tuple[VariableId, int, float]]:
    """Disease events ranked by risk-adjusted prior, descending."""
    table = apply_risk_evidence(model, risk_observations)
    events = [
        (vid, state, p)
        for vid, dist in table.items()
        for state, p in dist.items()
        if state >= 1
    ]
    events.sort(key=lambda e: (-e[2], e[0].kind, e[0].index, e[1]))
    return events
