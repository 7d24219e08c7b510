"""Random model and evidence generation for property suites."""

from __future__ import annotations

import random

from ducg.model import (
    ChiefComplaintModel,
    DiseaseAttributes,
    EngineDefaults,
    FunctionalLink,
    Variable,
    VariableId,
)


def random_model(
    rng: random.Random,
    n_diseases: int = 2,
    n_effects: int = 5,
    max_states: int = 3,
    edge_prob: float = 0.5,
    theta_d: float = 0.01,
) -> ChiefComplaintModel:
    """Random DAG model: disease roots on top, effect variables below.

    Effect variables link from diseases and earlier effects, so shared
    ancestors (forks) and chains both occur.  Every column of every matrix
    keeps its mass at or below 1.
    """
    variables: dict[VariableId, Variable] = {}
    diseases: dict[VariableId, DiseaseAttributes] = {}
    for d in range(1, n_diseases + 1):
        vid = VariableId("B", d)
        variables[vid] = Variable(vid, f"disease {d}", ("absent", "present"))
        diseases[vid] = DiseaseAttributes(
            variable=vid,
            priors={1: round(rng.uniform(0.005, 0.2), 4)},
            dangers={1: round(rng.uniform(0.5, 3.0), 2)},
        )
    effect_ids = []
    for x in range(1, n_effects + 1):
        vid = VariableId("X", x)
        n_states = rng.randint(2, max_states)
        variables[vid] = Variable(
            vid, f"effect {x}", tuple(f"s{s}" for s in range(n_states))
        )
        effect_ids.append(vid)

    links: list[FunctionalLink] = []
    for pos, child in enumerate(effect_ids):
        parents = list(diseases) + effect_ids[:pos]
        chosen = [p for p in parents if rng.random() < edge_prob]
        if not chosen and parents:
            chosen = [rng.choice(parents)]
        for parent in chosen:
            entries = _random_entries(rng, variables[parent].n_states, variables[child].n_states)
            if entries:
                links.append(
                    FunctionalLink(
                        parent=parent,
                        child=child,
                        r=round(rng.uniform(0.3, 1.0), 3),
                        entries=entries,
                    )
                )
    return ChiefComplaintModel(
        model_id=f"random-{rng.randint(0, 10**9)}",
        chief_complaints=["random"],
        variables=variables,
        links=links,
        gates={},
        diseases=diseases,
        risk_scalers=[],
        defaults=EngineDefaults(theta_d=theta_d),
    )


def _random_entries(rng: random.Random, parent_states: int, child_states: int):
    entries = {}
    for j in range(1, parent_states):
        budget = rng.uniform(0.4, 1.0)
        ks = [k for k in range(1, child_states) if rng.random() < 0.8]
        if not ks:
            ks = [rng.randint(1, child_states - 1)]
        weights = [rng.random() for _ in ks]
        total = sum(weights)
        for k, w in zip(ks, weights):
            p = budget * w / total
            if p > 1e-6:
                entries[(k, j)] = round(p, 6)
    return entries


def forward_sample(
    model: ChiefComplaintModel, rng: random.Random, disease_event
) -> dict[VariableId, int]:
    """Simulate the generative process under a single abnormal disease.

    Per child: pick one causing mechanism by its relative intensity, then
    draw the child state from the picked column (residual mass to state 0).
    """
    disease, state = disease_event
    states: dict[VariableId, int] = {}
    for vid in model.topological_order():
        if vid == disease:
            states[vid] = state
            continue
        if vid.kind in ("B", "BX"):
            states[vid] = 0
            continue
        if vid.kind == "D":
            states[vid] = 1
            continue
        spec = model.gates.get(vid)
        if spec is not None:
            states[vid] = spec.evaluate({i: states.get(i, 0) for i in spec.inputs})
            continue
        links = model.links_by_child.get(vid, [])
        if not links:
            states[vid] = 0
            continue
        r_total = sum(l.r for l in links)
        pick = rng.random() * r_total
        chosen = links[-1]
        acc = 0.0
        for link in links:
            acc += link.r
            if pick <= acc:
                chosen = link
                break
        j = states.get(chosen.parent, 0)
        u = rng.random()
        acc = 0.0
        result = 0
        for k in range(1, model.variables[vid].n_states):
            acc += chosen.entries.get((k, j), 0.0) if j >= 1 else 0.0
            if u <= acc:
                result = k
                break
        states[vid] = result
    return states


def sampled_evidence(
    model: ChiefComplaintModel,
    rng: random.Random,
    observe_fraction: float = 0.7,
    require_abnormal: bool = True,
    max_tries: int = 50,
) -> dict[VariableId, int]:
    """Observations drawn from a simulated case, so they carry positive mass."""
    events = [
        (vid, s)
        for vid, attrs in sorted(model.diseases.items())
        for s in sorted(attrs.priors)
    ]
    for _ in range(max_tries):
        event = rng.choice(events)
        states = forward_sample(model, rng, event)
        checkable = [v for v in model.variables if v.kind in ("X", "SX")]
        observed = {
            v: states[v] for v in checkable if rng.random() < observe_fraction
        }
        if not require_abnormal or any(s != 0 for s in observed.values()):
            if observed:
                return observed
    # fall back: force the abnormal finding closest to a disease
    states = forward_sample(model, rng, events[0])
    return {v: s for v, s in states.items() if v.kind in ("X", "SX")}
