"""Observed evidence at one diagnosis step."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import EvidenceError
from .model import CHECKABLE_KINDS, ChiefComplaintModel, VariableId


@dataclass(frozen=True)
class EvidenceSet:
    """Observed variable states plus the explicit not-yet-checked set.

    ``observed`` maps variables to state indices (state 0 = found normal);
    ``unknown`` holds the X/SX variables that remain candidates for a next
    medical check.  The two sets never overlap.
    """

    step: int
    observed: Mapping[VariableId, int]
    unknown: frozenset[VariableId] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.step < 1:
            raise EvidenceError(f"step must be >= 1, got {self.step}")
        overlap = set(self.observed) & set(self.unknown)
        if overlap:
            raise EvidenceError(f"variables both observed and unknown: {sorted(map(str, overlap))}")

    @classmethod
    def for_model(
        cls,
        model: ChiefComplaintModel,
        observed: Mapping[VariableId, int],
        step: int = 1,
    ) -> "EvidenceSet":
        """Build an evidence set, deriving ``unknown`` as every unchecked X/SX."""
        for vid, state in observed.items():
            var = model.variables.get(vid)
            if var is None:
                raise EvidenceError(f"unknown variable {vid}")
            if vid.kind not in CHECKABLE_KINDS:
                raise EvidenceError(f"{vid} is not an observable X/SX variable")
            if not 0 <= state < var.n_states:
                raise EvidenceError(f"state {state} out of range for {vid}")
        unknown = frozenset(
            vid
            for vid in model.variables
            if vid.kind in CHECKABLE_KINDS and vid not in observed
        )
        return cls(step=step, observed=dict(observed), unknown=unknown)

    def abnormal(self) -> dict[VariableId, int]:
        return {v: s for v, s in self.observed.items() if s != 0}

    def normal(self) -> dict[VariableId, int]:
        return {v: s for v, s in self.observed.items() if s == 0}

    def extended(self, vid: VariableId, state: int) -> "EvidenceSet":
        """Evidence with one additional observation (used for hypotheticals)."""
        observed = dict(self.observed)
        observed[vid] = state
        return EvidenceSet(
            step=self.step,
            observed=observed,
            unknown=self.unknown - {vid},
        )
