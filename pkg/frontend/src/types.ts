/**
 * Wire types mirroring the session service exactly.
 * The client renders these values; it never recomputes them.
 */

export interface VariableRef {
    kind: string;
    index: number;
}

export interface VariableMeta {
    kind: string;
    index: number;
    name: string;
    states: string[];
    cost: number;
    attention: number;
}

export interface ModelInfo {
    model_id: string;
    chief_complaints: string[];
    diseases: number;
    variables: VariableMeta[];
}

export interface ObservationIn {
    variable: VariableRef;
    state: number;
}

export interface InitialViewEntry {
    disease_id: string;
    state: number;
    prior: number;
}

export interface SessionCreated {
    session_id: string;
    model_id: string;
    step: number;
    status: string;
    initial_view?: InitialViewEntry[];
}

export interface ReportResult {
    disease_id: string;
    state: number;
    likelihood: number;
    suspicion: number;
}

export interface SuspicionReport {
    step: number;
    phi: number;
    results: ReportResult[];
    flags: string[];
}

export interface BreakdownEntry {
    disease_id: string;
    state: number;
    contribution: number;
}

export interface Candidate {
    variable_id: string;
    I: number;
    rho: number;
    lambda: number;
    cost: number;
    breakdown: BreakdownEntry[];
}

export interface RecommendationList {
    step: number;
    candidates: Candidate[];
    flags: string[];
}

export interface StepResponse {
    report: SuspicionReport;
    recommendations: RecommendationList;
}

export interface ExplanationNode {
    id: string;
    name: string;
    kind: string;
    color: 'normal' | 'abnormal' | 'unobserved' | 'virtual-d';
    observed_state?: number;
    hypothesis?: boolean;
}

export interface ExplanationEdge {
    parent: string;
    child: string;
}

export interface Explanation {
    hypothesis: { disease_id: string; state: number };
    isolated_count: number;
    nodes: ExplanationNode[];
    edges: ExplanationEdge[];
}

export function variableId(ref: VariableRef): string {
    return `${ref.kind}${ref.index}`;
}

export function parseVariableId(id: string): VariableRef {
    const match = /^(BX|SX|SG|B|X|G|D)(\d+)$/.exec(id);
    if (!match) {
        throw new Error(`malformed variable id: ${id}`);
    }
    return { kind: match[1], index: Number(match[2]) };
}
