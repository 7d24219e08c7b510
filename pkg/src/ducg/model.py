"""Domain types for chief-complaint causality models.

A model is a DAG over typed variables.  Disease roots (B/BX) carry prior
distributions, effect variables (X/SX) receive weighted causal links, and
logic gates (G/SG) combine input states deterministically.  Each link stores
a sparse matrix of per-state causation probabilities; state 0 is always the
negative/normal state and carries whatever probability mass the abnormal
states leave over.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GateExpressionError

VARIABLE_KINDS = ("B", "BX", "X", "SX", "G", "SG", "D")

#: kinds that may appear as a hypothesis root
DISEASE_KINDS = ("B", "BX")
#: kinds that can be observed and recommended as medical checks
CHECKABLE_KINDS = ("X", "SX")
GATE_KINDS = ("G", "SG")

_ID_RE = re.compile(r"^(BX|SX|SG|B|X|G|D)(\d+)$")


@dataclass(frozen=True, order=True)
class VariableId:
    """Identifier ``(kind, index)``, rendered as e.g. ``X3`` or ``BX2``."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.index <= 0:
            raise ValueError(f"variable index must be positive, got {self.index}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "VariableId":
        m = _ID_RE.match(text.strip())
        if not m:
            raise ValueError(f"malformed variable id {text!r}")
        return cls(m.group(1), int(m.group(2)))


@dataclass(frozen=True)
class Variable:
    """A node of the causal graph.

    ``state_names[0]`` is the negative/normal state; every state index >= 1
    is abnormal.  ``attention`` weights the variable in check completeness
    and ``cost`` in check recommendation; both apply to X/SX only and
    default to 1 when unspecified.
    """

    id: VariableId
    name: str
    state_names: tuple[str, ...]
    attention: float | None = None
    cost: float | None = None

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def abnormal_states(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_states))

    @property
    def epsilon(self) -> float:
        return 1.0 if self.attention is None else self.attention

    @property
    def beta(self) -> float:
        return 1.0 if self.cost is None else self.cost


@dataclass(frozen=True)
class FunctionalLink:
    """Weighted causal mechanism from one parent variable to one child.

    ``entries`` maps ``(child_state, parent_state)`` to the probability that
    the mechanism, when selected, drives the child into that state given the
    parent state.  Child state 0 and parent state 0 never appear: normal
    states have no causal input or output, and the residual
    ``1 - sum_k entries[(k, j)]`` always lands on child state 0.
    """

    parent: VariableId
    child: VariableId
    r: float
    entries: Mapping[tuple[int, int], float]

    def column_sum(self, parent_state: int) -> float:
        return sum(p for (k, j), p in self.entries.items() if j == parent_state)

    def parent_states_used(self) -> set[int]:
        return {j for (_, j) in self.entries}


# --- logic-gate row expressions -------------------------------------------
#
# Grammar:  or_expr  := and_expr ('|' and_expr)*
#           and_expr := unary ('&' unary)*
#           unary    := '!' unary | '(' or_expr ')' | atom
#           atom     := ID ('=' | '!=') INT          e.g.  X3=1, BX2!=0
_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|(&)|(\|)|(!=)|(!)|(=)|([A-Z]+\d+)|(\d+))")


class _ExprNode:
    def evaluate(self, states: Mapping[VariableId, int]) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class _Atom(_ExprNode):
    var: VariableId
    state: int
    negated: bool

    def evaluate(self, states):
        value = states.get(self.var, 0)
        return (value != self.state) if self.negated else (value == self.state)


@dataclass(frozen=True)
class _BoolOp(_ExprNode):
    op: str
    operands: tuple[_ExprNode, ...]

    def evaluate(self, states):
        if self.op == "&":
            return all(o.evaluate(states) for o in self.operands)
        return any(o.evaluate(states) for o in self.operands)


@dataclass(frozen=True)
class _Not(_ExprNode):
    operand: _ExprNode

    def evaluate(self, states):
        return not self.operand.evaluate(states)


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise GateExpressionError(
                    f"cannot tokenize {text!r} at position {pos}"
                )
            break
        tokens.append(m.group(m.lastindex))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise GateExpressionError(f"unexpected end of expression in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> _ExprNode:
        node = self.or_expr()
        if self.peek() is not None:
            raise GateExpressionError(
                f"trailing tokens {self.tokens[self.pos:]} in {self.text!r}"
            )
        return node

    def or_expr(self) -> _ExprNode:
        parts = [self.and_expr()]
        while self.peek() == "|":
            self.take()
            parts.append(self.and_expr())
        return parts[0] if len(parts) == 1 else _BoolOp("|", tuple(parts))

    def and_expr(self) -> _ExprNode:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else _BoolOp("&", tuple(parts))

    def unary(self) -> _ExprNode:
        tok = self.peek()
        if tok == "!":
            self.take()
            return _Not(self.unary())
        if tok == "(":
            self.take()
            node = self.or_expr()
            if self.take() != ")":
                raise GateExpressionError(f"missing ')' in {self.text!r}")
            return node
        return self.atom()

    def atom(self) -> _ExprNode:
        tok = self.take()
        try:
            var = VariableId.parse(tok)
        except ValueError as exc:
            raise GateExpressionError(f"expected variable id, got {tok!r}") from exc
        op = self.take()
        if op not in ("=", "!="):
            raise GateExpressionError(f"expected '=' or '!=' after {tok} in {self.text!r}")
        state_tok = self.take()
        if not state_tok.isdigit():
            raise GateExpressionError(f"expected state number after {tok}{op}")
        return _Atom(var, int(state_tok), negated=(op == "!="))


def parse_gate_expression(text: str) -> _ExprNode:
    """Compile a gate-row expression; raises GateExpressionError on bad input."""
    return _Parser(text).parse()


def expression_variables(node: _ExprNode) -> set[VariableId]:
    if isinstance(node, _Atom):
        return {node.var}
    if isinstance(node, _Not):
        return expression_variables(node.operand)
    if isinstance(node, _BoolOp):
        out: set[VariableId] = set()
        for part in node.operands:
            out |= expression_variables(part)
        return out
    return set()


@dataclass(frozen=True)
class LogicGateSpec:
    """Deterministic state function of a G/SG gate.

    Rows are evaluated in order against the joint input state; the first
    matching row decides the gate state, otherwise ``default_state`` applies.
    SG gates behave identically to G gates; they only differ in authoring
    intent (combinations of risk factors).
    """

    gate: VariableId
    inputs: tuple[VariableId, ...]
    rows: tuple[tuple[str, int], ...]
    default_state: int = 0

    def compiled_rows(self) -> tuple[tuple[_ExprNode, int], ...]:
        return tuple((parse_gate_expression(expr), state) for expr, state in self.rows)

    def evaluate(self, states: Mapping[VariableId, int]) -> int:
        """Gate state for a joint input state; missing inputs count as state 0."""
        for expr, state in self.compiled_rows():
            if expr.evaluate(states):
                return state
        return self.default_state


@dataclass(frozen=True)
class DiseaseAttributes:
    """Priors, danger degrees and coding metadata of one disease root."""

    variable: VariableId
    priors: Mapping[int, float]
    dangers: Mapping[int, float] = field(default_factory=dict)
    icd_codes: tuple[str, ...] = ()
    display_name: str = ""

    def prior(self, state: int) -> float:
        if state == 0:
            return max(0.0, 1.0 - sum(self.priors.values()))
        return self.priors.get(state, 0.0)

    def danger(self, state: int) -> float:
        return self.dangers.get(state, 1.0)


@dataclass(frozen=True)
class RiskScaler:
    """Multiplies a BX disease prior according to an observed risk factor."""

    target: VariableId
    source: VariableId
    scale: Mapping[int, float]


@dataclass(frozen=True)
class EngineDefaults:
    """Per-model engine settings, stored in the file for reproducibility.

    ``theta_d`` is the prior of a virtual default cause attached to abnormal
    evidence the assumed disease cannot explain; it multiplies into the
    hypothesis likelihood once per unexplained finding.
    """

    theta_d: float = 0.01
    tolerance: float = 1e-9


@dataclass(frozen=True)
class ModuleMetadata:
    author: str = ""
    version: str = ""


@dataclass
class SingleDiseaseModule:
    """The authored subgraph for one disease under a chief complaint."""

    disease: DiseaseAttributes
    variables: dict[VariableId, Variable]
    links: list[FunctionalLink]
    gates: dict[VariableId, LogicGateSpec]
    risk_scalers: list[RiskScaler] = field(default_factory=list)
    metadata: ModuleMetadata = field(default_factory=ModuleMetadata)


class ChiefComplaintModel:
    """Fused, immutable model covering every disease of a chief complaint.

    Derived structures (children map, per-child causal-intensity totals,
    topological order) are computed once on construction; instances must not
    be mutated afterwards and may be shared freely across threads.
    """

    def __init__(
        self,
        model_id: str,
        chief_complaints: Iterable[str],
        variables: Mapping[VariableId, Variable],
        links: Iterable[FunctionalLink],
        gates: Mapping[VariableId, LogicGateSpec],
        diseases: Mapping[VariableId, DiseaseAttributes],
        risk_scalers: Iterable[RiskScaler] = (),
        defaults: EngineDefaults = EngineDefaults(),
    ):
        self.model_id = model_id
        self.chief_complaints = tuple(chief_complaints)
        self.variables = dict(variables)
        self.links = list(links)
        self.gates = dict(gates)
        self.diseases = dict(diseases)
        self.risk_scalers = list(risk_scalers)
        self.defaults = defaults

        self.links_by_child: dict[VariableId, list[FunctionalLink]] = {}
        self.children: dict[VariableId, set[VariableId]] = {}
        for link in self.links:
            self.links_by_child.setdefault(link.child, []).append(link)
            self.children.setdefault(link.parent, set()).add(link.child)
        for gate_id, spec in self.gates.items():
            for inp in spec.inputs:
                self.children.setdefault(inp, set()).add(gate_id)

        #: total causal intensity per child over *all* declared parents; the
        #: per-link selector weight r_i / r_total stays fixed when a subgraph
        #: drops parents, so absent causes push their mass onto state 0.
        self.r_total: dict[VariableId, float] = {
            child: sum(l.r for l in ls) for child, ls in self.links_by_child.items()
        }

    def __eq__(self, other):
        if not isinstance(other, ChiefComplaintModel):
            return NotImplemented
        return (
            self.model_id == other.model_id
            and self.chief_complaints == other.chief_complaints
            and self.variables == other.variables
            and sorted(self.links, key=lambda l: (l.parent, l.child))
            == sorted(other.links, key=lambda l: (l.parent, l.child))
            and self.gates == other.gates
            and self.diseases == other.diseases
            and sorted(self.risk_scalers, key=lambda s: (s.target, s.source))
            == sorted(other.risk_scalers, key=lambda s: (s.target, s.source))
            and self.defaults == other.defaults
        )

    def parent_ids(self, node: VariableId) -> list[VariableId]:
        """Direct causal predecessors: link parents plus gate inputs."""
        parents = [l.parent for l in self.links_by_child.get(node, [])]
        if node in self.gates:
            parents.extend(self.gates[node].inputs)
        return parents

    def child_ids(self, node: VariableId) -> set[VariableId]:
        return self.children.get(node, set())

    def topological_order(self) -> list[VariableId]:
        """All variables in parent-before-child order; raises on a cycle."""
        indegree = {v: 0 for v in self.variables}
        for node in self.variables:
            for parent in self.parent_ids(node):
                if parent in indegree:
                    indegree[node] += 1
        frontier = sorted(v for v, d in indegree.items() if d == 0)
        order: list[VariableId] = []
        while frontier:
            node = frontier.pop(0)
            order.append(node)
            for child in sorted(self.child_ids(node)):
                if child not in indegree:
                    continue
                indegree[child] -= 1
                if indegree[child] == 0:
                    frontier.append(child)
            frontier.sort()
        if len(order) != len(self.variables):
            raise ValueError("model graph contains a directed cycle")
        return order

    def selector_weight(self, link: FunctionalLink) -> float:
        total = self.r_total.get(link.child, link.r)
        return link.r / total if total > 0 else 0.0
