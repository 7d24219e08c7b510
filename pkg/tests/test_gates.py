"""Logic gates in loading, simplification and exact inference."""

import pytest

from ducg import (
    ChiefComplaintModel,
    DiseaseAttributes,
    EngineDefaults,
    EvidenceSet,
    FunctionalLink,
    Variable,
    VariableId,
    load_model,
    save_model,
    suspicion,
    validate,
)
from ducg.inference import FLAG_INCONSISTENT
from ducg.model import LogicGateSpec

from conftest import B, X
from refimpl import ref_probability

G1 = VariableId("G", 1)


def gate_model(two_inputs=False):
    """Disease drives X1; a gate over X1 (and optionally X2) drives X3."""
    variables = {
        B(1): Variable(B(1), "disease", ("absent", "present")),
        X(1): Variable(X(1), "trigger", ("normal", "present")),
        X(2): Variable(X(2), "cofactor", ("normal", "present")),
        X(3): Variable(X(3), "consequence", ("normal", "present")),
        G1: Variable(G1, "combination", ("off", "on")),
    }
    expr = "X1=1 & X2=1" if two_inputs else "X1=1"
    inputs = (X(1), X(2)) if two_inputs else (X(1),)
    gates = {G1: LogicGateSpec(gate=G1, inputs=inputs, rows=((expr, 1),))}
    links = [
        FunctionalLink(parent=B(1), child=X(1), r=1.0, entries={(1, 1): 0.6}),
        FunctionalLink(parent=B(1), child=X(2), r=1.0, entries={(1, 1): 0.5}),
        FunctionalLink(parent=G1, child=X(3), r=1.0, entries={(1, 1): 0.8}),
    ]
    return ChiefComplaintModel(
        model_id="gate",
        chief_complaints=[],
        variables=variables,
        links=links,
        gates=gates,
        diseases={B(1): DiseaseAttributes(variable=B(1), priors={1: 0.1})},
        defaults=EngineDefaults(theta_d=0.01),
    )


def test_gate_transmits_causality():
    model = gate_model()
    ev = EvidenceSet.for_model(model, {X(1): 1, X(3): 1})
    report = suspicion(model, ev)
    assert [str(e.hypothesis[0]) for e in report.ranking()] == ["B1"]
    # X1 observed abnormal fires the gate deterministically
    assert report.ranking()[0].likelihood == pytest.approx(0.6 * 0.8, abs=1e-12)


def test_gate_likelihood_matches_enumeration():
    model = gate_model(two_inputs=True)
    observed = {X(1): 1, X(3): 1}
    ev = EvidenceSet.for_model(model, observed)
    report = suspicion(model, ev)
    got = report.ranking()[0].likelihood
    expected = ref_probability(model, observed, {B(1): 1})
    assert got == pytest.approx(expected, abs=1e-12)
    # X2 unobserved: the gate fires only when X2 turns out abnormal
    assert got == pytest.approx(0.6 * 0.5 * 0.8, abs=1e-12)


def test_normal_observed_input_pins_gate():
    # with the cofactor found normal, the AND gate can never fire and the
    # downstream finding becomes inexplicable by the disease
    model = gate_model(two_inputs=True)
    ev = EvidenceSet.for_model(model, {X(1): 1, X(2): 0, X(3): 1})
    report = suspicion(model, ev)
    assert FLAG_INCONSISTENT in report.flags


def test_gate_round_trips_through_file():
    model = gate_model(two_inputs=True)
    text = save_model(model)
    again = load_model(text)
    assert again == model
    assert validate(again).ok


def test_sg_gate_scales_priors():
    sg = VariableId("SG", 1)
    bx = VariableId("BX", 1)
    variables = {
        bx: Variable(bx, "modulated disease", ("absent", "present")),
        X(1): Variable(X(1), "age band", ("normal", "high")),
        X(2): Variable(X(2), "smoker", ("no", "yes")),
        X(3): Variable(X(3), "finding", ("normal", "present")),
        sg: Variable(sg, "risk combo", ("off", "on")),
    }
    gates = {sg: LogicGateSpec(gate=sg, inputs=(X(1), X(2)), rows=(("X1=1 & X2=1", 1),))}
    links = [FunctionalLink(parent=bx, child=X(3), r=1.0, entries={(1, 1): 0.5})]
    from ducg import RiskScaler, apply_risk_evidence

    model = ChiefComplaintModel(
        model_id="sg",
        chief_complaints=[],
        variables=variables,
        links=links,
        gates=gates,
        diseases={bx: DiseaseAttributes(variable=bx, priors={1: 0.1})},
        risk_scalers=[RiskScaler(target=bx, source=sg, scale={1: 3.0})],
    )
    both = EvidenceSet.for_model(model, {X(1): 1, X(2): 1})
    assert apply_risk_evidence(model, both)[bx][1] == pytest.approx(0.3)
    one = EvidenceSet.for_model(model, {X(1): 1, X(2): 0})
    assert apply_risk_evidence(model, one)[bx][1] == pytest.approx(0.1)
    partial = EvidenceSet.for_model(model, {X(1): 1})
    assert apply_risk_evidence(model, partial)[bx][1] == pytest.approx(0.1)
