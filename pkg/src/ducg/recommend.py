"""Ranking of state-unknown variables by recommendation degree.

The value of checking a variable is the expected absolute shift it causes
in the suspicion degrees, danger-weighted per hypothesis, diluted by the
number of diseases that could cause the variable, and cost-weighted into a
normalized recommendation degree.

Hypothetical re-diagnoses freeze both the hypothesis set and the check
completeness at the current step: a hypothesis that the added observation
eliminates structurally takes suspicion 0, and candidates whose outcome
cannot move any suspicion share get value exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import descendants_of, joint_over_target
from .errors import PreconditionError
from .evidence import EvidenceSet
from .inference import SuspicionReport, hypothesis_weights, likelihood
from .model import CHECKABLE_KINDS, ChiefComplaintModel, VariableId
from .simplify import HypothesisEvent, SimplifiedGraph, SubDucg, separate, simplify

FLAG_UNINFORMATIVE = "uninformative"
FLAG_FULLY_OBSERVED = "fully-observed"
FLAG_NO_FINDING = "no-finding"


@dataclass(frozen=True)
class RecommendationEntry:
    variable: VariableId
    degree: float
    rho: float
    lam: int
    cost: float
    breakdown: tuple[tuple[HypothesisEvent, float], ...]


@dataclass
class RecommendationList:
    step: int
    entries: list[RecommendationEntry]
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "candidates": [
                {
                    "variable_id": str(e.variable),
                    "I": e.degree,
                    "rho": e.rho,
                    "lambda": e.lam,
                    "cost": e.cost,
                    "breakdown": [
                        {
                            "disease_id": str(h[0]),
                            "state": h[1],
                            "contribution": c,
                        }
                        for h, c in e.breakdown
                    ],
                }
                for e in self.entries
            ],
            "flags": list(self.flags),
        }


def lambda_count(simplified: SimplifiedGraph, target: VariableId) -> int:
    """Number of surviving diseases with a directed path to the target."""
    count = 0
    for disease in simplified.hypothesis_variables:
        if target in descendants_of(simplified.view, [disease]):
            count += 1
    return count


def candidate_variables(simplified: SimplifiedGraph, evidence: EvidenceSet) -> list[VariableId]:
    """State-unknown X/SX still tied to at least one surviving disease."""
    out = []
    for vid in sorted(evidence.unknown):
        if vid.kind not in CHECKABLE_KINDS:
            continue
        if vid not in simplified.view.variables:
            continue
        if lambda_count(simplified, vid) >= 1:
            out.append(vid)
    return out


def _rich_subducgs(
    model: ChiefComplaintModel,
    simplified: SimplifiedGraph,
    evidence: EvidenceSet,
) -> dict[HypothesisEvent, SubDucg]:
    return {
        hyp: separate(
            simplified, evidence, hyp, theta_d=model.defaults.theta_d, keep_unknown=True
        )
        for hyp in simplified.hypotheses
    }


def _conditional_target_distribution(
    sub: SubDucg, target: VariableId
) -> list[float] | None:
    """Exact Pr{target = g | evidence, hypothesis-subgraph}, or None if absent."""
    view = sub.view
    if target not in view.variables:
        return None
    clamps = {sub.hypothesis[0]: sub.hypothesis[1]}
    observed = dict(sub.observed)
    values = joint_over_target(view, observed, clamps, target)
    total = sum(values)
    if total == 0.0:
        values = joint_over_target(view, {}, clamps, target)
        total = sum(values)
        if total == 0.0:
            return None
    return [v / total for v in values]


def predictive_distribution(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    report: SuspicionReport,
    target: VariableId,
) -> dict[int, float]:
    """Hypothesis-marginalized outcome distribution of a potential check.

    Mixes the exact per-hypothesis conditionals with the normalized
    suspicion shares; a hypothesis that cannot reach the target predicts a
    normal outcome with certainty.
    """
    if target in evidence.observed:
        raise PreconditionError(f"{target} is already observed")
    simplified = report.simplified
    if simplified is None:
        simplified = simplify(model, evidence)
    n_states = model.variables[target].n_states
    weights = hypothesis_weights(report)
    rich = _rich_subducgs(model, simplified, evidence)
    mixture = [0.0] * n_states
    seen_anywhere = False
    for hyp, weight in weights.items():
        dist = _conditional_target_distribution(rich[hyp], target)
        if dist is None:
            dist = [1.0 if s == 0 else 0.0 for s in range(n_states)]
        else:
            seen_anywhere = True
        for state in range(n_states):
            mixture[state] += weight * dist[state]
    if not seen_anywhere:
        raise PreconditionError(f"{target} is not a candidate under any hypothesis")
    return {state: p for state, p in enumerate(mixture)}


def _hypothetical_suspicions(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    frozen_hypotheses: list[HypothesisEvent],
    phi: float,
    universe=None,
) -> dict[HypothesisEvent, float]:
    """Suspicions after adding evidence, with hypothesis set and phi frozen.

    Structurally eliminated hypotheses take suspicion 0 instead of
    renormalizing over a changed set.  The re-reduction runs inside the
    step's already-simplified universe: anything outside it is irrelevant
    to the frozen hypotheses.
    """
    sim = simplify(model, evidence, universe=universe)
    likelihoods: dict[HypothesisEvent, float] = {}
    for hyp in frozen_hypotheses:
        if hyp in sim.hypotheses:
            sub = separate(sim, evidence, hyp, theta_d=model.defaults.theta_d)
            likelihoods[hyp] = likelihood(sub, evidence)
        else:
            likelihoods[hyp] = 0.0
    total = sum(likelihoods.values())
    if total == 0.0:
        return {hyp: 0.0 for hyp in frozen_hypotheses}
    return {hyp: phi * lk / total for hyp, lk in likelihoods.items()}


def recommend(
    model: ChiefComplaintModel,
    evidence: EvidenceSet,
    report: SuspicionReport,
) -> RecommendationList:
    """Rank candidate checks by normalized, cost-weighted expected value."""
    flags: list[str] = []
    simplified = report.simplified
    if simplified is None:
        simplified = simplify(model, evidence)
    if not report.entries:
        return RecommendationList(step=evidence.step, entries=[], flags=[FLAG_NO_FINDING])
    candidates = candidate_variables(simplified, evidence)
    if not candidates:
        return RecommendationList(step=evidence.step, entries=[], flags=[FLAG_FULLY_OBSERVED])

    base = {e.hypothesis: e.suspicion for e in report.entries}
    frozen = [e.hypothesis for e in report.entries]
    phi = report.phi

    raw: list[RecommendationEntry] = []
    for target in candidates:
        lam = lambda_count(simplified, target)
        pred = predictive_distribution(model, evidence, report, target)
        deltas: dict[HypothesisEvent, float] = {hyp: 0.0 for hyp in frozen}
        for state, weight in sorted(pred.items()):
            if weight == 0.0:
                continue
            hypothetical = _hypothetical_suspicions(
                model,
                evidence.extended(target, state),
                frozen,
                phi,
                universe=simplified.view,
            )
            for hyp in frozen:
                deltas[hyp] += weight * abs(hypothetical[hyp] - base[hyp])
        breakdown = tuple(
            (hyp, model.diseases[hyp[0]].danger(hyp[1]) * deltas[hyp]) for hyp in frozen
        )
        rho = sum(c for _, c in breakdown) / lam
        raw.append(
            RecommendationEntry(
                variable=target,
                degree=0.0,
                rho=rho,
                lam=lam,
                cost=model.variables[target].beta,
                breakdown=breakdown,
            )
        )

    weighted = [e.cost * e.rho for e in raw]
    total = sum(weighted)
    entries = []
    if total == 0.0:
        flags.append(FLAG_UNINFORMATIVE)
        uniform = 1.0 / len(raw)
        for e in raw:
            entries.append(
                RecommendationEntry(e.variable, uniform, e.rho, e.lam, e.cost, e.breakdown)
            )
    else:
        for e, w in zip(raw, weighted):
            entries.append(
                RecommendationEntry(e.variable, w / total, e.rho, e.lam, e.cost, e.breakdown)
            )
    entries.sort(key=lambda e: (-e.degree, e.variable))
    return RecommendationList(step=evidence.step, entries=entries, flags=flags)
