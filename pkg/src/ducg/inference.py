"""Suspicion-degree inference over simplified graphs.

For each surviving hypothesis the engine computes the exact probability of
the observed findings on that hypothesis's separated subgraph, normalizes
across hypotheses, and scales by the check completeness phi so that the
suspicion degrees sum to phi.  Unexplained abnormal findings multiply a
hypothesis's likelihood by the virtual-cause prior theta_d once each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .engine import (
    forward_distribution_on_view,
    full_view,
    likelihood_on_view,
)
from .errors import EvidenceError, PreconditionError
from .evidence import EvidenceSet
from .model import CHECKABLE_KINDS, ChiefComplaintModel, VariableId
from .simplify import (
    HypothesisEvent,
    SimplifiedGraph,
    SubDucg,
    separate,
    simplify,
)

FLAG_NO_FINDING = "no-finding"
FLAG_INCONSISTENT = "evidence-inconsistent"
FLAG_NO_ATTENDED = "no-attended-variables"


@dataclass(frozen=True)
class SuspicionEntry:
    hypothesis: HypothesisEvent
    likelihood: float
    suspicion: float


@dataclass
class SuspicionReport:
    """Ranked hypotheses with completeness and per-hypothesis likelihoods."""

    step: int
    phi: float
    entries: list[SuspicionEntry]
    flags: list[str] = field(default_factory=list)
    simplified: SimplifiedGraph | None = None
    subducgs: dict[HypothesisEvent, SubDucg] = field(default_factory=dict)

    def ranking(self) -> list[SuspicionEntry]:
        return sorted(
            self.entries,
            key=lambda e: (-e.suspicion, e.hypothesis[0].kind, e.hypothesis[0].index, e.hypothesis[1]),
        )

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "phi": self.phi,
            "results": [
                {
                    "disease_id": str(e.hypothesis[0]),
                    "state": e.hypothesis[1],
                    "likelihood": e.likelihood,
                    "suspicion": e.suspicion,
                }
                for e in self.ranking()
            ],
            "flags": list(self.flags),
        }


def forward_state_distribution(
    graph: ChiefComplaintModel | "object",
    roots: Mapping[VariableId, int],
    target: VariableId,
) -> dict[int, float]:
    """Distribution of ``target`` under assigned root states.

    Propagates the per-state mixture formula in topological order; a target
    with no path from any assigned root or default cause concentrates on
    state 0.
    """
    view = full_view(graph) if isinstance(graph, ChiefComplaintModel) else graph
    dist = forward_distribution_on_view(view, dict(roots), target)
    return {state: p for state, p in enumerate(dist)}


def likelihood(subducg: SubDucg, evidence: EvidenceSet) -> float:
    """Exact Pr of the evidence restricted to the subgraph, given the hypothesis.

    Every virtual default cause attached during separation contributes one
    multiplicative ``theta_d`` factor.  Normal observations outside the
    subgraph are inert and ignored; an abnormal observation outside it
    means the separation step was skipped or given different evidence, and
    that inconsistency raises.
    """
    observed: dict[VariableId, int] = {}
    for vid, state in evidence.observed.items():
        if vid in subducg.view.variables:
            observed[vid] = state
        elif state != 0:
            raise EvidenceError(
                f"abnormal evidence {vid} is neither in the subgraph nor "
                "recorded as isolated"
            )
    hyp_var, hyp_state = subducg.hypothesis
    return likelihood_on_view(subducg.view, observed, {hyp_var: hyp_state})


def check_completeness(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    simplified: SimplifiedGraph | None = None,
) -> tuple[float, list[str]]:
    """Attention-weighted fraction of relevant checks already performed.

    The known side counts every observed X/SX (performing a check always
    raises completeness); the unknown side counts the state-unknown X/SX
    still present in the simplified graph, i.e. still causally tied to a
    surviving hypothesis.
    """
    if simplified is None:
        simplified = simplify(model, evidence)
    known = [
        model.variables[vid].epsilon
        for vid in evidence.observed
        if vid in model.variables and vid.kind in CHECKABLE_KINDS
    ]
    unknown = [
        model.variables[vid].epsilon
        for vid in evidence.unknown
        if vid in simplified.view.variables and vid.kind in CHECKABLE_KINDS
    ]
    denominator = sum(known) + sum(unknown)
    if denominator == 0:
        return 1.0, [FLAG_NO_ATTENDED]
    return sum(known) / denominator, []


def suspicion(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    simplified: SimplifiedGraph | None = None,
) -> SuspicionReport:
    """Rank hypotheses by completeness-scaled normalized likelihood."""
    if simplified is None:
        simplified = simplify(model, evidence)
    phi, flags = check_completeness(model, evidence, simplified)
    if simplified.no_finding or not simplified.hypotheses:
        return SuspicionReport(
            step=evidence.step,
            phi=phi,
            entries=[],
            flags=[FLAG_NO_FINDING] + flags,
            simplified=simplified,
        )
    theta_d = model.defaults.theta_d
    subducgs: dict[HypothesisEvent, SubDucg] = {}
    likelihoods: dict[HypothesisEvent, float] = {}
    for hyp in simplified.hypotheses:
        sub = separate(simplified, evidence, hyp, theta_d=theta_d)
        subducgs[hyp] = sub
        likelihoods[hyp] = likelihood(sub, evidence)
    total = sum(likelihoods.values())
    entries = []
    if total == 0.0:
        flags = flags + [FLAG_INCONSISTENT]
        for hyp in simplified.hypotheses:
            entries.append(SuspicionEntry(hyp, 0.0, 0.0))
    else:
        for hyp in simplified.hypotheses:
            lk = likelihoods[hyp]
            entries.append(SuspicionEntry(hyp, lk, phi * lk / total))
    return SuspicionReport(
        step=evidence.step,
        phi=phi,
        entries=entries,
        flags=flags,
        simplified=simplified,
        subducgs=subducgs,
    )


def hypothesis_weights(report: SuspicionReport) -> dict[HypothesisEvent, float]:
    """Normalized suspicion shares; uniform fallback when all are zero."""
    total = sum(e.suspicion for e in report.entries)
    if total > 0:
        return {e.hypothesis: e.suspicion / total for e in report.entries}
    if not report.entries:
        raise PreconditionError("report carries no hypotheses")
    uniform = 1.0 / len(report.entries)
    return {e.hypothesis: uniform for e in report.entries}
