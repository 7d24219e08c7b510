"""Evidence-driven model reduction and per-hypothesis separation.

Reduction applies four deletion-only rules to a fixed point:

* R1 - an X/SX observed in state 0 is removed together with its links
  (normal states carry no causal input or output, so the removal never
  changes the probability of the retained findings).
* R2 - a disease root with no directed path to any observed abnormal
  finding is removed from the hypothesis set.
* R3 - nodes that neither carry abnormal evidence nor are reachable from a
  surviving cause (disease or declared default cause) are removed; they are
  deterministically normal and causally inert.  Unobserved nodes reachable
  from a surviving hypothesis stay: they are the candidates for the next
  medical check.
* R4 - within retained links, matrix entries inconsistent with an observed
  parent or child state are dropped; links left without entries die, which
  is what disconnects causes that only acted through a normal finding.

Separation assumes a single hypothesis, re-applies the rules, and attaches
a virtual default cause (prior ``theta_d``) to every abnormal finding the
hypothesis cannot reach.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import GraphView, ParentLink, ancestors_of, descendants_of, full_view
from .errors import PreconditionError
from .evidence import EvidenceSet
from .model import (
    CHECKABLE_KINDS,
    ChiefComplaintModel,
    DISEASE_KINDS,
    Variable,
    VariableId,
)

HypothesisEvent = tuple[VariableId, int]


@dataclass
class SimplifiedGraph:
    """Reduced graph plus the surviving hypothesis events."""

    view: GraphView
    hypotheses: list[HypothesisEvent]
    evidence: EvidenceSet
    no_finding: bool = False
    removed_normal: set[VariableId] = field(default_factory=set)

    @property
    def hypothesis_variables(self) -> list[VariableId]:
        seen: list[VariableId] = []
        for vid, _ in self.hypotheses:
            if vid not in seen:
                seen.append(vid)
        return seen


@dataclass
class SubDucg:
    """Per-hypothesis subgraph under the one-disease-per-case assumption."""

    hypothesis: HypothesisEvent
    view: GraphView
    virtual_d_nodes: list[tuple[VariableId, VariableId]]
    isolated_count: int
    observed: dict[VariableId, int]
    theta_d: float


def _retained_entries(
    entries, parent: VariableId, child: VariableId, observed: dict[VariableId, int]
) -> dict[tuple[int, int], float]:
    parent_state = observed.get(parent)
    child_state = observed.get(child)
    out = {}
    for (k, j), p in entries.items():
        if parent_state is not None and j != parent_state:
            continue
        if child_state is not None and k != child_state:
            continue
        out[(k, j)] = p
    return out


def _reduce_view(
    universe: GraphView,
    keep_diseases: set[VariableId],
    observed: dict[VariableId, int],
) -> GraphView:
    """Apply R1/R4 against ``observed`` and drop excluded disease roots."""
    removed = {
        vid
        for vid, state in observed.items()
        if state == 0 and vid.kind in CHECKABLE_KINDS
    }
    nodes = {
        vid
        for vid in universe.variables
        if vid not in removed and (vid.kind not in DISEASE_KINDS or vid in keep_diseases)
    }
    parents: dict[VariableId, tuple[ParentLink, ...]] = {}
    for child, links in universe.parents.items():
        if child not in nodes:
            continue
        retained = []
        for link in links:
            if link.parent not in nodes:
                continue
            entries = _retained_entries(link.entries, link.parent, child, observed)
            if not entries:
                continue
            retained.append(ParentLink(link.parent, link.weight, entries))
        if retained:
            parents[child] = tuple(retained)
    gates = {gid: spec for gid, spec in universe.gates.items() if gid in nodes}
    variables = {vid: universe.variables[vid] for vid in nodes}
    return GraphView(variables=variables, parents=parents, gates=gates)


def _prune_unreachable(
    view: GraphView, abnormal: set[VariableId], sources: set[VariableId]
) -> GraphView:
    """Keep abnormal evidence, surviving sources, and their descendants.

    Observed abnormal findings count as causal sources themselves: unlike
    state 0, an abnormal state has causal output, so structure fed by a
    finding stays relevant even when no disease reaches the finding.
    """
    feeders = set(sources) | (abnormal & set(view.variables))
    reachable = descendants_of(view, feeders)
    keep = (abnormal & set(view.variables)) | reachable
    return _restrict(view, keep)


def _restrict(view: GraphView, keep: set[VariableId]) -> GraphView:
    variables = {vid: var for vid, var in view.variables.items() if vid in keep}
    parents = {}
    for child, links in view.parents.items():
        if child not in keep:
            continue
        retained = tuple(l for l in links if l.parent in keep)
        if retained:
            parents[child] = retained
    gates = {gid: spec for gid, spec in view.gates.items() if gid in keep}
    virtual = {vid: p for vid, p in view.virtual_priors.items() if vid in keep}
    return GraphView(variables=variables, parents=parents, gates=gates, virtual_priors=virtual)


def simplify(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    universe: GraphView | None = None,
) -> SimplifiedGraph:
    """Reduce the model against evidence and enumerate surviving hypotheses.

    With no abnormal observation there is nothing to explain: the result
    carries an empty hypothesis set and the ``no_finding`` signal instead of
    raising.  ``universe`` restricts the reduction to an already-reduced
    view, which is how hypothetical re-diagnoses avoid rescanning the whole
    model.
    """
    abnormal = set(evidence.abnormal())
    removed_normal = {
        vid for vid, s in evidence.observed.items()
        if s == 0 and vid.kind in CHECKABLE_KINDS
    }
    if not abnormal:
        empty = GraphView(variables={}, parents={}, gates={})
        return SimplifiedGraph(
            view=empty,
            hypotheses=[],
            evidence=evidence,
            no_finding=True,
            removed_normal=removed_normal,
        )

    if universe is None:
        universe = full_view(model)
    diseases = {vid for vid in model.diseases if vid in universe.variables}
    observed = dict(evidence.observed)
    view = _reduce_view(universe, diseases, observed)
    while True:
        can_explain = ancestors_of(view, abnormal)
        surviving = {d for d in diseases if d in can_explain}
        real_defaults = {vid for vid in view.variables if vid.kind == "D"}
        pruned = _prune_unreachable(view, abnormal, surviving | real_defaults)
        if surviving == diseases and set(pruned.variables) == set(view.variables):
            view = pruned
            break
        diseases = surviving
        view = _reduce_view(universe, diseases, observed)
        view = _prune_unreachable(view, abnormal, diseases | real_defaults)

    hypotheses: list[HypothesisEvent] = []
    for vid in sorted(diseases):
        var = model.variables.get(vid)
        states = var.abnormal_states if var is not None else sorted(model.diseases[vid].priors)
        for state in states:
            hypotheses.append((vid, state))
    return SimplifiedGraph(
        view=view,
        hypotheses=hypotheses,
        evidence=evidence,
        no_finding=False,
        removed_normal=removed_normal,
    )


def separate(
    simplified: SimplifiedGraph,
    evidence: EvidenceSet,
    hypothesis: HypothesisEvent,
    theta_d: float = 0.01,
    keep_unknown: bool = False,
) -> SubDucg:
    """Single-hypothesis subgraph with virtual default causes attached.

    The explanation artifact keeps only the hypothesis, the observed
    findings, and the causal chains between them; with ``keep_unknown`` the
    hypothesis's whole reachable set is retained so that state-unknown
    variables can be queried for check recommendation.
    """
    if hypothesis not in simplified.hypotheses:
        raise PreconditionError(
            f"hypothesis {hypothesis[0]}:{hypothesis[1]} is not in the surviving set"
        )
    hyp_var, _ = hypothesis
    observed = {
        vid: s for vid, s in evidence.observed.items() if s != 0
    }
    abnormal = set(observed)

    view = simplified.view
    other_diseases = {vid for vid in view.variables if vid.kind in DISEASE_KINDS and vid != hyp_var}
    candidates = set(view.variables) - other_diseases
    base = _restrict(view, candidates)

    real_defaults = {vid for vid in base.variables if vid.kind == "D"}
    present_abnormal = abnormal & set(base.variables)
    reachable = descendants_of(base, {hyp_var} | real_defaults | present_abnormal)
    if keep_unknown:
        keep = reachable | present_abnormal | {hyp_var}
    else:
        evidence_closure = _ancestor_closure(base, present_abnormal)
        keep = (reachable & evidence_closure) | present_abnormal | {hyp_var}
        keep |= {d for d in real_defaults if _parents_some(base, d, keep)}
    sub_view = _restrict(base, keep)

    virtual_nodes: list[tuple[VariableId, VariableId]] = []
    for vid in sorted(abnormal):
        if vid not in sub_view.variables:
            continue
        if sub_view.parents.get(vid):
            continue
        d_id = _fresh_default_id(sub_view, vid)
        state = observed[vid]
        sub_view.variables[d_id] = Variable(
            id=d_id, name=f"default cause of {vid}", state_names=("absent", "present")
        )
        sub_view.parents[vid] = (
            ParentLink(parent=d_id, weight=1.0, entries={(state, 1): 1.0}),
        )
        sub_view.virtual_priors[d_id] = theta_d
        virtual_nodes.append((d_id, vid))

    present_observed = {
        vid: s for vid, s in observed.items() if vid in sub_view.variables
    }
    return SubDucg(
        hypothesis=hypothesis,
        view=sub_view,
        virtual_d_nodes=virtual_nodes,
        isolated_count=len(virtual_nodes),
        observed=present_observed,
        theta_d=theta_d,
    )


def _ancestor_closure(view: GraphView, targets: set[VariableId]) -> set[VariableId]:
    seen: set[VariableId] = set()
    stack = list(targets)
    while stack:
        node = stack.pop()
        if node in seen or node not in view.variables:
            continue
        seen.add(node)
        stack.extend(view.parent_ids(node))
    return seen


def _parents_some(view: GraphView, source: VariableId, keep: set[VariableId]) -> bool:
    children = view.child_map().get(source, set())
    return bool(children & keep)


def _fresh_default_id(view: GraphView, child: VariableId) -> VariableId:
    d_id = VariableId("D", child.index)
    while d_id in view.variables:
        d_id = VariableId("D", d_id.index + 10000)
    return d_id


def serialize_subducg(sub: SubDucg, model: ChiefComplaintModel) -> dict:
    """Color-annotated node/edge lists for explanation rendering."""
    virtual_ids = {d for d, _ in sub.virtual_d_nodes}
    nodes = []
    for vid in sorted(sub.view.variables):
        var = sub.view.variables[vid]
        entry: dict = {"id": str(vid), "name": var.name}
        if vid in virtual_ids:
            entry["color"] = "virtual-d"
        elif vid == sub.hypothesis[0]:
            entry["color"] = "abnormal"
            entry["hypothesis"] = True
            entry["observed_state"] = sub.hypothesis[1]
        elif vid in sub.observed:
            state = sub.observed[vid]
            entry["observed_state"] = state
            entry["color"] = "abnormal" if state != 0 else "normal"
        else:
            entry["color"] = "unobserved"
        entry["kind"] = vid.kind
        nodes.append(entry)
    edges = []
    for child in sorted(sub.view.variables):
        for parent in sorted(sub.view.parent_ids(child)):
            edges.append({"parent": str(parent), "child": str(child)})
    return {
        "hypothesis": {"disease_id": str(sub.hypothesis[0]), "state": sub.hypothesis[1]},
        "isolated_count": sub.isolated_count,
        "nodes": nodes,
        "edges": edges,
    }
