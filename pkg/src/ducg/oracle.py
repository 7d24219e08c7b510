"""Brute-force posterior over the unsimplified model.

This is the slow, assumption-free route: enumerate every joint state of the
free variables under each candidate disease event, weight by the (risk
adjusted) disease priors under the one-disease-per-case constraint, and
normalize.  It is deliberately coded as recursive enumeration, independent
of the variable-elimination path used by the production likelihood, so the
two can check each other.
"""

from __future__ import annotations

from typing import Mapping

from .engine import GraphView, ancestors_of, child_state_distribution, full_view
from .errors import EnumerationSizeError
from .evidence import EvidenceSet
from .model import ChiefComplaintModel, DISEASE_KINDS, VariableId
from .priors import apply_risk_evidence
from .simplify import HypothesisEvent

MAX_CHOICE_POINTS = 20


def enumerate_evidence_probability(
    view: GraphView,
    observed: Mapping[VariableId, int],
    clamped_roots: Mapping[VariableId, int],
) -> float:
    """Pr of the observed states by exhaustive enumeration of free variables."""
    relevant = ancestors_of(view, list(observed))
    fixed: dict[VariableId, int] = {}
    free: list[VariableId] = []
    for node in relevant:
        if node in clamped_roots:
            fixed[node] = clamped_roots[node]
        elif node in view.virtual_priors:
            free.append(node)
        elif node.kind == "D":
            fixed[node] = 1
        elif node.kind in DISEASE_KINDS:
            fixed[node] = 0
        elif view.is_root(node):
            fixed[node] = 0
        elif node not in observed:
            free.append(node)
    stochastic = [n for n in free if n not in view.gates]
    if len(stochastic) > MAX_CHOICE_POINTS:
        raise EnumerationSizeError(
            f"{len(stochastic)} free choice points exceed the limit of {MAX_CHOICE_POINTS}"
        )
    order = _topo(view, relevant)

    def recurse(idx: int, assignment: dict[VariableId, int], prob: float) -> float:
        if prob == 0.0:
            return 0.0
        if idx == len(order):
            return prob
        node = order[idx]
        if node in fixed:
            assignment[node] = fixed[node]
            result = recurse(idx + 1, assignment, prob)
            del assignment[node]
            return result
        dist = child_state_distribution(view, node, assignment)
        if node in observed:
            state = observed[node]
            assignment[node] = state
            result = recurse(idx + 1, assignment, prob * dist[state])
            del assignment[node]
            return result
        total = 0.0
        for state, p in enumerate(dist):
            if p == 0.0:
                continue
            assignment[node] = state
            total += recurse(idx + 1, assignment, prob * p)
            del assignment[node]
        return total

    return recurse(0, {}, 1.0)


def exact_posterior(
    model: ChiefComplaintModel, evidence: EvidenceSet
) -> dict[HypothesisEvent, float]:
    """Posterior of each disease event given the evidence, by enumeration.

    Disease events are weighted by their risk-adjusted priors under the
    one-disease-per-case constraint: exactly one disease is abnormal per
    enumeration branch, every other disease sits in state 0.
    """
    view = full_view(model)
    priors = apply_risk_evidence(model, evidence)
    observed = dict(evidence.observed)

    events: list[tuple[HypothesisEvent, float]] = []
    for vid in sorted(model.diseases):
        for state, p in sorted(priors[vid].items()):
            if state >= 1:
                events.append(((vid, state), p))

    joint: dict[HypothesisEvent, float] = {}
    for (vid, state), prior in events:
        if prior == 0.0:
            joint[(vid, state)] = 0.0
            continue
        clamps = {other: 0 for other in model.diseases}
        clamps[vid] = state
        joint[(vid, state)] = prior * enumerate_evidence_probability(view, observed, clamps)
    total = sum(joint.values())
    if total == 0.0:
        return {event: 0.0 for event in joint}
    return {event: value / total for event, value in joint.items()}


def _topo(view: GraphView, nodes: set[VariableId]) -> list[VariableId]:
    indegree = {n: 0 for n in nodes}
    for node in nodes:
        for parent in view.parent_ids(node):
            if parent in indegree:
                indegree[node] += 1
    frontier = sorted(n for n, d in indegree.items() if d == 0)
    children = view.child_map()
    order: list[VariableId] = []
    while frontier:
        node = frontier.pop(0)
        order.append(node)
        touched = False
        for child in children.get(node, ()):
            if child in indegree:
                indegree[child] -= 1
                if indegree[child] == 0:
                    frontier.append(child)
                    touched = True
        if touched:
            frontier.sort()
    return order
