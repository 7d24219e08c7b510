"""Independent reference implementations used to cross-check the engine.

Everything here is computed straight from model structures by exhaustive
enumeration, sharing no code with the production likelihood path.  Keep it
slow and obvious.
"""

from __future__ import annotations

from itertools import product as iter_product

from ducg.model import ChiefComplaintModel, DISEASE_KINDS, VariableId


def _conditional(model: ChiefComplaintModel, node: VariableId, states: dict) -> list[float]:
    """P(node = k | parent states) from the raw link tables."""
    var = model.variables[node]
    n = var.n_states
    spec = model.gates.get(node)
    if spec is not None:
        value = spec.evaluate({i: states.get(i, 0) for i in spec.inputs})
        return [1.0 if s == value else 0.0 for s in range(n)]
    links = model.links_by_child.get(node, [])
    if not links:
        if node.kind == "D":
            return [0.0, 1.0]
        return [1.0 if s == 0 else 0.0 for s in range(n)]
    r_total = sum(l.r for l in links)
    dist = [0.0] * n
    for k in range(1, n):
        acc = 0.0
        for link in links:
            j = states.get(link.parent, 0)
            if j >= 1:
                acc += (link.r / r_total) * link.entries.get((k, j), 0.0)
        dist[k] = acc
    dist[0] = max(0.0, 1.0 - sum(dist[1:]))
    return dist


def _order(model: ChiefComplaintModel) -> list[VariableId]:
    return model.topological_order()


def ref_probability(
    model: ChiefComplaintModel,
    observed: dict[VariableId, int],
    clamps: dict[VariableId, int],
    pinned_no_factor: dict[VariableId, int] | None = None,
) -> float:
    """Pr{observed | clamps} by recursion over every variable of the model.

    ``pinned_no_factor`` fixes states (visible to children) without
    multiplying the node's own probability in, which is how normal findings
    stripped by the reduction rules are treated.
    """
    pinned_no_factor = pinned_no_factor or {}
    order = _order(model)

    def recurse(idx: int, states: dict) -> float:
        if idx == len(order):
            return 1.0
        node = order[idx]
        if node in clamps:
            states[node] = clamps[node]
            out = recurse(idx + 1, states)
        elif node in pinned_no_factor:
            states[node] = pinned_no_factor[node]
            out = recurse(idx + 1, states)
        elif node.kind in DISEASE_KINDS or node.kind == "D":
            states[node] = 1 if node.kind == "D" else 0
            out = recurse(idx + 1, states)
        elif node in observed:
            dist = _conditional(model, node, states)
            states[node] = observed[node]
            out = dist[observed[node]] * recurse(idx + 1, states)
        else:
            dist = _conditional(model, node, states)
            out = 0.0
            for state, p in enumerate(dist):
                if p == 0.0:
                    continue
                states[node] = state
                out += p * recurse(idx + 1, states)
        del states[node]
        return out

    return recurse(0, {})


def ref_joint_table(
    model: ChiefComplaintModel, clamps: dict[VariableId, int]
) -> dict[tuple, float]:
    """Full joint table over every non-clamped variable (naive build)."""
    order = _order(model)
    free = [v for v in order if v not in clamps and v.kind not in DISEASE_KINDS and v.kind != "D"]
    table: dict[tuple, float] = {}
    ranges = [range(model.variables[v].n_states) for v in free]
    for combo in iter_product(*ranges):
        states = dict(clamps)
        for v in order:
            if v.kind == "D" and v not in clamps:
                states[v] = 1
            elif v.kind in DISEASE_KINDS and v not in clamps:
                states[v] = 0
        states.update(dict(zip(free, combo)))
        prob = 1.0
        for v in free:
            prob *= _conditional(model, v, states)[states[v]]
            if prob == 0.0:
                break
        table[combo] = prob
    return table, free


def ref_posterior(
    model: ChiefComplaintModel, observed: dict[VariableId, int]
) -> dict[tuple[VariableId, int], float]:
    """Posterior over disease events via the naive joint-table route."""
    joint: dict[tuple[VariableId, int], float] = {}
    for vid in sorted(model.diseases):
        attrs = model.diseases[vid]
        for state in sorted(attrs.priors):
            prior = attrs.priors[state]
            clamps = {other: 0 for other in model.diseases}
            clamps[vid] = state
            table, free = ref_joint_table(model, clamps)
            mass = 0.0
            for combo, prob in table.items():
                assignment = dict(zip(free, combo))
                if all(assignment.get(v, clamps.get(v)) == s for v, s in observed.items()):
                    mass += prob
            joint[(vid, state)] = prior * mass
    total = sum(joint.values())
    if total == 0.0:
        return {k: 0.0 for k in joint}
    return {k: v / total for k, v in joint.items()}


def ref_conditional_target(
    model: ChiefComplaintModel,
    observed: dict[VariableId, int],
    clamps: dict[VariableId, int],
    target: VariableId,
) -> list[float]:
    """Pr{target = g | observed, clamps} by two enumeration runs per state."""
    denom = ref_probability(model, observed, clamps)
    n = model.variables[target].n_states
    out = []
    for g in range(n):
        joint = dict(observed)
        joint[target] = g
        out.append(ref_probability(model, joint, clamps) / denom if denom > 0 else 0.0)
    return out


# --- independent mirror of the diagnosis formulas ---------------------------


def _live_links(model: ChiefComplaintModel, observed: dict) -> list:
    """Links that survive reduction: no normal-observed endpoint, at least
    one matrix entry consistent with the observed endpoint states."""
    out = []
    for link in model.links:
        if observed.get(link.parent) == 0 or observed.get(link.child) == 0:
            continue
        alive = any(
            (link.parent not in observed or j == observed[link.parent])
            and (link.child not in observed or k == observed[link.child])
            for (k, j) in link.entries
        )
        if alive:
            out.append(link)
    return out


def _raw_reachable(
    model: ChiefComplaintModel, sources, observed: dict
) -> set:
    """Descendants of the sources over reduction-surviving links."""
    if isinstance(sources, VariableId):
        sources = [sources]
    children: dict[VariableId, list] = {}
    for link in _live_links(model, observed):
        children.setdefault(link.parent, []).append(link)
    seen = set()
    stack = list(sources)
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        for link in children.get(node, []):
            stack.append(link.child)
    return seen


def _kept_reach(model: ChiefComplaintModel, observed: dict, disease: VariableId) -> set:
    """Everything causally fed under one assumed disease: the hypothesis,
    declared default causes, abnormal findings, and their descendants."""
    sources = {disease}
    sources |= {v for v in model.variables if v.kind == "D"}
    sources |= {v for v, s in observed.items() if s != 0}
    return _raw_reachable(model, sources, observed)


def _isolated_findings(
    model: ChiefComplaintModel, observed: dict, disease: VariableId
) -> list:
    """Abnormal findings with no surviving causal input in the kept set."""
    reach = _kept_reach(model, observed, disease)
    live = _live_links(model, observed)
    out = []
    for vid in sorted(v for v, s in observed.items() if s != 0):
        has_input = any(
            link.child == vid and link.parent in reach and link.parent != vid
            for link in live
        )
        if not has_input:
            out.append(vid)
    return out


def ref_surviving_hypotheses(model: ChiefComplaintModel, observed: dict) -> list:
    abnormal = {v for v, s in observed.items() if s != 0}
    out = []
    for vid in sorted(model.diseases):
        if _raw_reachable(model, vid, observed) & abnormal:
            for state in sorted(model.variables[vid].abnormal_states):
                out.append((vid, state))
    return out


def ref_hypothesis_likelihood(
    model: ChiefComplaintModel, observed: dict, hypothesis, theta_d: float
) -> float:
    """Evidence probability under one assumed disease, enumeration route.

    Abnormal findings with no surviving causal input each contribute one
    theta_d factor and are then pinned at their observed state (a virtual
    default cause explains them exactly); normal findings are inert pins.
    """
    disease, state = hypothesis
    abnormal = {v: s for v, s in observed.items() if s != 0}
    normal = {v: 0 for v, s in observed.items() if s == 0}
    isolated = _isolated_findings(model, observed, disease)
    explained = {v: s for v, s in abnormal.items() if v not in isolated}
    pinned = dict(normal)
    pinned.update({v: abnormal[v] for v in isolated})
    clamps = {other: 0 for other in model.diseases}
    clamps[disease] = state
    value = ref_probability(model, explained, clamps, pinned_no_factor=pinned)
    for _ in isolated:
        value *= theta_d
    return value


def ref_phi(model: ChiefComplaintModel, observed: dict) -> float:
    hypotheses = ref_surviving_hypotheses(model, observed)
    sources = {h[0] for h in hypotheses}
    sources |= {v for v in model.variables if v.kind == "D"}
    sources |= {v for v, s in observed.items() if s != 0}
    relevant_unknown = {
        v
        for v in _raw_reachable(model, sources, observed)
        if v.kind in ("X", "SX") and v not in observed
    }
    known = sum(
        model.variables[v].epsilon for v in observed if v.kind in ("X", "SX")
    )
    unknown = sum(model.variables[v].epsilon for v in relevant_unknown)
    if known + unknown == 0:
        return 1.0
    return known / (known + unknown)


def ref_suspicions(model: ChiefComplaintModel, observed: dict, theta_d: float) -> dict:
    hypotheses = ref_surviving_hypotheses(model, observed)
    likelihoods = {
        h: ref_hypothesis_likelihood(model, observed, h, theta_d) for h in hypotheses
    }
    total = sum(likelihoods.values())
    phi = ref_phi(model, observed)
    if total == 0:
        return {h: 0.0 for h in hypotheses}
    return {h: phi * lk / total for h, lk in likelihoods.items()}


def ref_rho(
    model: ChiefComplaintModel, observed: dict, target: VariableId, theta_d: float
) -> float:
    """Check value: danger-weighted expected suspicion shift, diluted by the
    count of diseases that can reach the target."""
    base = ref_suspicions(model, observed, theta_d)
    hypotheses = list(base)
    phi = ref_phi(model, observed)
    lam = sum(
        1
        for d in sorted({h[0] for h in hypotheses})
        if target in _raw_reachable(model, d, observed)
    )
    weights_total = sum(base.values())
    n = model.variables[target].n_states
    pred = [0.0] * n
    for hyp in hypotheses:
        share = base[hyp] / weights_total if weights_total else 1.0 / len(hypotheses)
        disease, state = hyp
        clamps = {other: 0 for other in model.diseases}
        clamps[disease] = state
        if target in _kept_reach(model, observed, disease):
            abnormal = {v: s for v, s in observed.items() if s != 0}
            isolated = _isolated_findings(model, observed, disease)
            explained = {v: s for v, s in abnormal.items() if v not in isolated}
            pinned = {v: 0 for v, s in observed.items() if s == 0}
            pinned.update({v: abnormal[v] for v in isolated})
            denom = ref_probability(model, explained, clamps, pinned_no_factor=pinned)
            cond = []
            for g in range(n):
                joint = dict(explained)
                joint[target] = g
                num = ref_probability(model, joint, clamps, pinned_no_factor=pinned)
                cond.append(num / denom if denom > 0 else (1.0 if g == 0 else 0.0))
        else:
            cond = [1.0 if g == 0 else 0.0 for g in range(n)]
        for g in range(n):
            pred[g] += share * cond[g]
    value = 0.0
    for hyp in hypotheses:
        danger = model.diseases[hyp[0]].danger(hyp[1])
        acc = 0.0
        for g in range(n):
            if pred[g] == 0.0:
                continue
            new_obs = dict(observed)
            new_obs[target] = g
            likelihoods = {
                h: ref_hypothesis_likelihood(model, new_obs, h, theta_d)
                if h in ref_surviving_hypotheses(model, new_obs)
                else 0.0
                for h in hypotheses
            }
            total = sum(likelihoods.values())
            new_h = phi * likelihoods[hyp] / total if total else 0.0
            acc += pred[g] * abs(new_h - base[hyp])
        value += danger * acc
    return value / lam
