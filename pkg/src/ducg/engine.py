"""Exact probability computation over graph views.

A :class:`GraphView` is an immutable computational slice of a model: the
node set, the retained causal links with their selector weights frozen at
the full model's totals, the gate specifications, and the priors of any
virtual default-cause nodes.  Dropping a parent from a view therefore sends
that parent's selector mass to child state 0, which matches the event
algebra in which an absent or normal cause contributes nothing to abnormal
child states.

Joint probabilities are computed by variable elimination over the ancestors
of the queried nodes.  Evidence nodes and roots are clamped; connected
components factorize (evidence with disjoint ancestries multiplies
exactly); components containing only virtual default causes are multiplied
last so that each unexplained finding contributes its penalty prior as one
exact factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Iterable, Mapping

from .errors import EvidenceError
from .model import (
    ChiefComplaintModel,
    DISEASE_KINDS,
    LogicGateSpec,
    Variable,
    VariableId,
)


@dataclass(frozen=True)
class ParentLink:
    """One retained causal mechanism into a child, with frozen weight."""

    parent: VariableId
    weight: float
    entries: Mapping[tuple[int, int], float]


@dataclass
class GraphView:
    variables: dict[VariableId, Variable]
    parents: dict[VariableId, tuple[ParentLink, ...]]
    gates: dict[VariableId, LogicGateSpec]
    virtual_priors: dict[VariableId, float] = field(default_factory=dict)

    def parent_ids(self, node: VariableId) -> list[VariableId]:
        out = [l.parent for l in self.parents.get(node, ())]
        spec = self.gates.get(node)
        if spec is not None:
            out.extend(i for i in spec.inputs if i in self.variables)
        return out

    def child_map(self) -> dict[VariableId, set[VariableId]]:
        children: dict[VariableId, set[VariableId]] = {v: set() for v in self.variables}
        for node in self.variables:
            for parent in self.parent_ids(node):
                if parent in children:
                    children[parent].add(node)
        return children

    def n_states(self, node: VariableId) -> int:
        return self.variables[node].n_states

    def is_root(self, node: VariableId) -> bool:
        return not self.parent_ids(node) and node not in self.gates


def full_view(model: ChiefComplaintModel) -> GraphView:
    """View over the whole model with all links and entries retained."""
    parents: dict[VariableId, tuple[ParentLink, ...]] = {}
    for child, links in model.links_by_child.items():
        parents[child] = tuple(
            ParentLink(l.parent, model.selector_weight(l), dict(l.entries))
            for l in sorted(links, key=lambda l: l.parent)
        )
    return GraphView(
        variables=dict(model.variables),
        parents=parents,
        gates=dict(model.gates),
    )


def ancestors_of(view: GraphView, targets: Iterable[VariableId]) -> set[VariableId]:
    """Targets plus every node with a directed path into them."""
    seen: set[VariableId] = set()
    stack = [t for t in targets if t in view.variables]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(p for p in view.parent_ids(node) if p in view.variables)
    return seen


def descendants_of(view: GraphView, sources: Iterable[VariableId]) -> set[VariableId]:
    """Sources plus every node they can reach along directed edges."""
    children = view.child_map()
    seen: set[VariableId] = set()
    stack = [s for s in sources if s in view.variables]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(children.get(node, ()))
    return seen


def child_state_distribution(
    view: GraphView, node: VariableId, parent_states: Mapping[VariableId, int]
) -> list[float]:
    """Exact conditional distribution of one node given its parents' states."""
    n = view.n_states(node)
    spec = view.gates.get(node)
    if spec is not None:
        inputs = {i: parent_states.get(i, 0) for i in spec.inputs}
        state = spec.evaluate(inputs)
        return [1.0 if s == state else 0.0 for s in range(n)]
    links = view.parents.get(node, ())
    if not links:
        theta = view.virtual_priors.get(node)
        if theta is not None:
            return [1.0 - theta, theta]
        if node.kind == "D":
            return [0.0, 1.0]
        return [1.0 if s == 0 else 0.0 for s in range(n)]
    dist = [0.0] * n
    abnormal_mass = 0.0
    for state in range(1, n):
        p = 0.0
        for link in links:
            j = parent_states.get(link.parent, 0)
            if j > 0:
                p += link.weight * link.entries.get((state, j), 0.0)
        dist[state] = p
        abnormal_mass += p
    dist[0] = max(0.0, 1.0 - abnormal_mass)
    return dist


# --- variable elimination ---------------------------------------------------


@dataclass
class _Factor:
    vars: tuple[VariableId, ...]
    table: dict[tuple[int, ...], float]


def _node_factor(
    view: GraphView,
    node: VariableId,
    pinned: Mapping[VariableId, int],
    free_states: Mapping[VariableId, int],
) -> "_Factor | float":
    """Dense CPD of ``node`` with pinned neighbours folded in.

    Returns a scalar when neither the node nor any of its parents is free.
    """
    parent_ids = [p for p in view.parent_ids(node) if p in view.variables]
    free_scope = [p for p in parent_ids if p not in pinned]
    node_free = node not in pinned
    scope = ([node] if node_free else []) + free_scope
    if not scope:
        parent_states = {p: pinned[p] for p in parent_ids}
        return child_state_distribution(view, node, parent_states)[pinned[node]]
    table: dict[tuple[int, ...], float] = {}
    ranges = [range(free_states[v]) for v in scope]
    for combo in iter_product(*ranges):
        assignment = dict(zip(scope, combo))
        parent_states = {
            p: (pinned[p] if p in pinned else assignment[p]) for p in parent_ids
        }
        dist = child_state_distribution(view, node, parent_states)
        node_state = assignment[node] if node_free else pinned[node]
        table[combo] = dist[node_state]
    return _Factor(tuple(scope), table)


def _multiply(a: _Factor, b: _Factor) -> _Factor:
    if not b.vars:
        scalar = b.table[()]
        return _Factor(a.vars, {k: v * scalar for k, v in a.table.items()})
    if not a.vars:
        return _multiply(b, a)
    merged = list(a.vars) + [v for v in b.vars if v not in a.vars]
    idx_a = [merged.index(v) for v in a.vars]
    idx_b = [merged.index(v) for v in b.vars]
    states: dict[VariableId, set[int]] = {v: set() for v in merged}
    for key in a.table:
        for v, s in zip(a.vars, key):
            states[v].add(s)
    for key in b.table:
        for v, s in zip(b.vars, key):
            states[v].add(s)
    table: dict[tuple[int, ...], float] = {}
    for combo in iter_product(*[sorted(states[v]) for v in merged]):
        va = a.table.get(tuple(combo[i] for i in idx_a))
        vb = b.table.get(tuple(combo[i] for i in idx_b))
        if va is None or vb is None:
            continue
        table[combo] = va * vb
    return _Factor(tuple(merged), table)


def _sum_out(factor: _Factor, var: VariableId) -> _Factor:
    idx = factor.vars.index(var)
    remaining = factor.vars[:idx] + factor.vars[idx + 1 :]
    table: dict[tuple[int, ...], float] = {}
    for key, value in factor.table.items():
        new_key = key[:idx] + key[idx + 1 :]
        table[new_key] = table.get(new_key, 0.0) + value
    return _Factor(remaining, table)


def _eliminate_all(factors: list[_Factor], keep: tuple[VariableId, ...]) -> _Factor:
    """Sum out every variable not in ``keep``, greedily by smallest join."""
    factors = list(factors)
    while True:
        candidates = sorted({v for f in factors for v in f.vars if v not in keep})
        if not candidates:
            break

        def join_size(var: VariableId) -> int:
            scope: set[VariableId] = set()
            for f in factors:
                if var in f.vars:
                    scope.update(f.vars)
            return len(scope)

        var = min(candidates, key=lambda v: (join_size(v), v))
        touching = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        merged = touching[0]
        for f in touching[1:]:
            merged = _multiply(merged, f)
        rest.append(_sum_out(merged, var))
        factors = rest
    if not factors:
        return _Factor((), {(): 1.0})
    merged = factors[0]
    for f in factors[1:]:
        merged = _multiply(merged, f)
    return merged


def _prepare(
    view: GraphView,
    observed: Mapping[VariableId, int],
    clamped_roots: Mapping[VariableId, int],
    extra_targets: tuple[VariableId, ...] = (),
):
    for vid in observed:
        if vid not in view.variables:
            raise EvidenceError(f"evidence variable {vid} absent from the graph")
    relevant = ancestors_of(view, list(observed) + list(extra_targets))
    pinned: dict[VariableId, int] = {}
    for node in relevant:
        if node in observed:
            pinned[node] = observed[node]
        elif node in clamped_roots:
            pinned[node] = clamped_roots[node]
        elif node in view.virtual_priors:
            continue
        elif node.kind == "D":
            pinned[node] = 1
        elif node.kind in DISEASE_KINDS:
            pinned[node] = 0
        elif view.is_root(node):
            # an uncaused, unobserved effect variable is deterministically
            # normal; pinning it keeps children's factors exact
            pinned[node] = 0
    free_states = {n: view.n_states(n) for n in relevant if n not in pinned}
    scalar = 1.0
    factors: list[_Factor] = []
    for node in sorted(relevant):
        if node in pinned and view.is_root(node) and node not in view.virtual_priors:
            continue
        if node in view.virtual_priors:
            theta = view.virtual_priors[node]
            if node in pinned:
                scalar *= theta if pinned[node] == 1 else 1.0 - theta
            else:
                factors.append(_Factor((node,), {(0,): 1.0 - theta, (1,): theta}))
            continue
        result = _node_factor(view, node, pinned, free_states)
        if isinstance(result, float):
            scalar *= result
        else:
            factors.append(result)
    return pinned, scalar, factors


def _components(factors: list[_Factor]) -> list[list[_Factor]]:
    parent: dict[VariableId, VariableId] = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for f in factors:
        for v in f.vars:
            parent.setdefault(v, v)
        for v in f.vars[1:]:
            ra, rb = find(f.vars[0]), find(v)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[VariableId, list[_Factor]] = {}
    for f in factors:
        groups.setdefault(find(f.vars[0]), []).append(f)
    return [groups[k] for k in sorted(groups)]


def likelihood_on_view(
    view: GraphView,
    observed: Mapping[VariableId, int],
    clamped_roots: Mapping[VariableId, int],
) -> float:
    """Exact joint probability of the observed states given clamped roots."""
    if not observed:
        return 1.0
    _, scalar, factors = _prepare(view, observed, clamped_roots)
    value = scalar
    virtual_values: list[float] = []
    for component in _components(factors):
        result = _eliminate_all(component, ())
        component_value = result.table.get((), 0.0)
        vars_in = {v for f in component for v in f.vars}
        if vars_in and vars_in <= set(view.virtual_priors):
            virtual_values.append(component_value)
        else:
            value *= component_value
    for v in virtual_values:
        value *= v
    return value


def joint_over_target(
    view: GraphView,
    observed: Mapping[VariableId, int],
    clamped_roots: Mapping[VariableId, int],
    target: VariableId,
) -> list[float]:
    """Unnormalized Pr{target = g, observed} for every state g of target."""
    if target in observed:
        raise EvidenceError(f"target {target} is already observed")
    if target not in view.variables:
        raise EvidenceError(f"target {target} absent from the graph")
    pinned, scalar, factors = _prepare(view, observed, clamped_roots, (target,))
    n = view.n_states(target)
    target_values: list[float] | None = None
    rest = scalar
    for component in _components(factors):
        vars_in = {v for f in component for v in f.vars}
        if target in vars_in:
            result = _eliminate_all(component, (target,))
            target_values = [result.table.get((s,), 0.0) for s in range(n)]
        else:
            result = _eliminate_all(component, ())
            rest *= result.table.get((), 0.0)
    if target in pinned:
        return [rest if s == pinned[target] else 0.0 for s in range(n)]
    if target_values is None:
        raise EvidenceError(f"target {target} has no stochastic support in the graph")
    return [rest * v for v in target_values]


def forward_distribution_on_view(
    view: GraphView,
    clamped_roots: Mapping[VariableId, int],
    target: VariableId,
) -> list[float]:
    """State distribution of ``target`` by forward propagation of marginals.

    Applies the mixture formula node by node in topological order, treating
    parents as independent (exact on trees and whenever the relevant
    ancestors do not share stochastic ancestors).
    """
    relevant = ancestors_of(view, [target])
    order = _topo_order(view, relevant)
    dists: dict[VariableId, list[float]] = {}
    for node in order:
        n = view.n_states(node)
        if node in clamped_roots:
            dists[node] = [1.0 if s == clamped_roots[node] else 0.0 for s in range(n)]
            continue
        theta = view.virtual_priors.get(node)
        if theta is not None:
            dists[node] = [1.0 - theta, theta]
            continue
        if node.kind == "D":
            dists[node] = [0.0, 1.0]
            continue
        spec = view.gates.get(node)
        if spec is not None:
            dists[node] = _gate_forward(spec, dists, n)
            continue
        links = view.parents.get(node, ())
        if not links:
            dists[node] = [1.0 if s == 0 else 0.0 for s in range(n)]
            continue
        dist = [0.0] * n
        for state in range(1, n):
            total = 0.0
            for link in links:
                parent_dist = dists[link.parent]
                for (k, j), p in link.entries.items():
                    if k == state and j < len(parent_dist):
                        total += link.weight * p * parent_dist[j]
            dist[state] = total
        dist[0] = max(0.0, 1.0 - sum(dist[1:]))
        dists[node] = dist
    return dists[target]


def _gate_forward(spec: LogicGateSpec, dists, n_states: int) -> list[float]:
    present = [i for i in spec.inputs if i in dists]
    dist = [0.0] * n_states
    ranges = [range(len(dists[i])) for i in present]
    for combo in iter_product(*ranges):
        weight = 1.0
        states = {}
        for inp, s in zip(present, combo):
            weight *= dists[inp][s]
            states[inp] = s
        if weight == 0.0:
            continue
        dist[spec.evaluate(states)] += weight
    return dist


def _topo_order(view: GraphView, nodes: set[VariableId]) -> list[VariableId]:
    indegree = {n: 0 for n in nodes}
    for node in nodes:
        for parent in view.parent_ids(node):
            if parent in indegree:
                indegree[node] += 1
    frontier = sorted(n for n, d in indegree.items() if d == 0)
    children = view.child_map()
    order = []
    while frontier:
        node = frontier.pop(0)
        order.append(node)
        added = False
        for child in children.get(node, ()):
            if child in indegree:
                indegree[child] -= 1
                if indegree[child] == 0:
                    frontier.append(child)
                    added = True
        if added:
            frontier.sort()
    return order
