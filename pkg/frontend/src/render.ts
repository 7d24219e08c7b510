/**
 * Pure HTML/SVG renderers. Every number shown comes straight from the
 * service response; the only arithmetic here is sorting and formatting
 * (percentages, relative bar widths, layout coordinates).
 */

import { escapeHtml, meterWidth, pct, relativeWidth } from './format';
import type {
    Candidate,
    Explanation,
    ExplanationNode,
    InitialViewEntry,
    ModelInfo,
    RecommendationList,
    SuspicionReport,
    VariableMeta,
} from './types';

const KIND_LABELS: Record<string, string> = {
    X: 'Findings and checks',
    SX: 'Disease-specific findings',
};

export function renderPhiMeter(phi: number): string {
    const width = meterWidth(phi);
    return `<div class="phi-meter" role="meter" aria-label="check completeness" data-phi="${phi}">
  <div class="phi-track"><div class="phi-fill" style="width:${width}"></div></div>
  <span class="phi-label">completeness ${width}</span>
</div>`;
}

export function renderDiagnosis(report: SuspicionReport): string {
    const meter = renderPhiMeter(report.phi);
    if (report.flags.includes('no-finding')) {
        return `<section class="diagnosis" data-step="${report.step}">
${meter}
<p class="state-banner no-finding">No abnormal finding yet — nothing to explain.</p>
</section>`;
    }
    if (report.flags.includes('evidence-inconsistent')) {
        return `<section class="diagnosis" data-step="${report.step}">
${meter}
<p class="state-banner inconsistent">The observations contradict every modeled disease. Review the inputs.</p>
</section>`;
    }
    const ranked = [...report.results].sort((a, b) => b.suspicion - a.suspicion);
    const max = ranked.length ? ranked[0].suspicion : 0;
    const rows = ranked
        .map(
            (r) => `  <li class="hypothesis-row" data-disease="${escapeHtml(r.disease_id)}" data-state="${r.state}">
    <button class="hypothesis" data-action="explain" data-disease="${escapeHtml(r.disease_id)}" data-state="${r.state}">${escapeHtml(r.disease_id)}</button>
    <div class="bar-track"><div class="bar" style="width:${relativeWidth(r.suspicion, max)}"></div></div>
    <span class="suspicion-value">${pct(r.suspicion)}</span>
  </li>`,
        )
        .join('\n');
    return `<section class="diagnosis" data-step="${report.step}">
${meter}
<ol class="hypothesis-list">
${rows}
</ol>
</section>`;
}

function renderBreakdown(candidate: Candidate): string {
    const rows = candidate.breakdown
        .map(
            (b) => `      <li>${escapeHtml(b.disease_id)} (state ${b.state}): ${b.contribution.toExponential(3)}</li>`,
        )
        .join('\n');
    return `    <details class="breakdown">
      <summary>per-disease contribution</summary>
      <ul>
${rows}
      </ul>
    </details>`;
}

export function renderRecommendations(recs: RecommendationList): string {
    if (recs.flags.includes('fully-observed')) {
        return `<section class="recommendations" data-step="${recs.step}">
<p class="state-banner loop-complete">Every relevant check is done — the loop is complete.</p>
</section>`;
    }
    if (recs.flags.includes('no-finding')) {
        return `<section class="recommendations" data-step="${recs.step}">
<p class="state-banner no-finding">Recommendations appear once an abnormal finding is entered.</p>
</section>`;
    }
    const banner = recs.flags.includes('uninformative')
        ? '<p class="state-banner uninformative">No check is expected to move the ranking; candidates are shown unordered.</p>\n'
        : '';
    const sorted = [...recs.candidates].sort((a, b) => b.I - a.I);
    const items = sorted
        .map(
            (c) => `  <li class="candidate-row">
    <button class="candidate" data-action="focus-candidate" data-variable="${escapeHtml(c.variable_id)}">
      <span class="candidate-id">${escapeHtml(c.variable_id)}</span>
      <span class="badge cost" title="cost score">&beta; ${c.cost}</span>
      <span class="badge dilution" title="diseases that could cause this">&lambda; ${c.lambda}</span>
      <span class="degree">${pct(c.I)}</span>
    </button>
${renderBreakdown(c)}
  </li>`,
        )
        .join('\n');
    return `<section class="recommendations" data-step="${recs.step}">
${banner}<ol class="candidate-list">
${items}
</ol>
</section>`;
}

function groupVariables(model: ModelInfo): Map<string, VariableMeta[]> {
    const groups = new Map<string, VariableMeta[]>();
    for (const variable of model.variables) {
        if (variable.kind !== 'X' && variable.kind !== 'SX') {
            continue;
        }
        const bucket = groups.get(variable.kind) ?? [];
        bucket.push(variable);
        groups.set(variable.kind, bucket);
    }
    for (const bucket of groups.values()) {
        bucket.sort((a, b) => a.index - b.index);
    }
    return groups;
}

export function renderEvidenceForm(
    model: ModelInfo,
    observed: Record<string, number>,
    errorFields: string[] = [],
): string {
    const sections: string[] = [];
    for (const [kind, variables] of groupVariables(model)) {
        const rows = variables
            .map((variable) => {
                const id = `${variable.kind}${variable.index}`;
                const current = observed[id];
                const options = [
                    `      <option value=""${current === undefined ? ' selected' : ''}>unknown</option>`,
                    ...variable.states.map(
                        (state, idx) =>
                            `      <option value="${idx}"${current === idx ? ' selected' : ''}>${escapeHtml(state)}</option>`,
                    ),
                ].join('\n');
                const errorClass = errorFields.includes(id) ? ' field-error' : '';
                return `  <label class="evidence-field${errorClass}" data-variable="${id}">
    <span class="field-name">${id} &middot; ${escapeHtml(variable.name)}</span>
    <select id="obs-${id}" name="${id}">
${options}
    </select>
  </label>`;
            })
            .join('\n');
        sections.push(`<fieldset class="evidence-group" data-kind="${kind}">
  <legend>${escapeHtml(KIND_LABELS[kind] ?? kind)}</legend>
${rows}
</fieldset>`);
    }
    return `<form class="evidence-form" data-action="submit-observations">
${sections.join('\n')}
<button type="submit" class="submit-observations">Submit observations</button>
</form>`;
}

export function renderInitialView(entries: InitialViewEntry[]): string {
    const rows = entries
        .map(
            (e) => `  <li><span>${escapeHtml(e.disease_id)}</span><span>${pct(e.prior, 2)}</span></li>`,
        )
        .join('\n');
    return `<section class="initial-view">
<h3>Diseases by prior (no findings yet)</h3>
<ol>
${rows}
</ol>
</section>`;
}

// --- explanation graph -------------------------------------------------

const NODE_W = 108;
const NODE_H = 34;
const COL_GAP = 170;
const ROW_GAP = 62;
const MARGIN = 24;

function layerDepths(explanation: Explanation): Map<string, number> {
    const depths = new Map<string, number>();
    for (const node of explanation.nodes) {
        depths.set(node.id, 0);
    }
    // relax along edges until stable; the graph is a small DAG
    for (let pass = 0; pass < explanation.nodes.length + 1; pass += 1) {
        let changed = false;
        for (const edge of explanation.edges) {
            const parentDepth = depths.get(edge.parent);
            const childDepth = depths.get(edge.child);
            if (parentDepth === undefined || childDepth === undefined) {
                continue;
            }
            if (childDepth < parentDepth + 1) {
                depths.set(edge.child, parentDepth + 1);
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }
    return depths;
}

function nodePositions(explanation: Explanation): Map<string, { x: number; y: number }> {
    const depths = layerDepths(explanation);
    const columns = new Map<number, string[]>();
    for (const node of [...explanation.nodes].sort((a, b) => a.id.localeCompare(b.id))) {
        const depth = depths.get(node.id) ?? 0;
        const column = columns.get(depth) ?? [];
        column.push(node.id);
        columns.set(depth, column);
    }
    const positions = new Map<string, { x: number; y: number }>();
    for (const [depth, ids] of columns) {
        ids.forEach((id, row) => {
            positions.set(id, {
                x: MARGIN + depth * COL_GAP,
                y: MARGIN + row * ROW_GAP,
            });
        });
    }
    return positions;
}

function nodeMarkup(node: ExplanationNode, x: number, y: number): string {
    const classes = ['graph-node', `color-${node.color}`];
    if (node.hypothesis) {
        classes.push('hypothesis-node');
    }
    const dash = node.color === 'virtual-d' ? ' stroke-dasharray="6 3"' : '';
    const label = node.observed_state !== undefined && !node.hypothesis
        ? `${node.id} = ${node.observed_state}`
        : node.id;
    return `  <g class="${classes.join(' ')}" data-node="${escapeHtml(node.id)}">
    <rect x="${x}" y="${y}" width="${NODE_W}" height="${NODE_H}" rx="8"${dash}><title>${escapeHtml(node.name)}</title></rect>
    <text x="${x + NODE_W / 2}" y="${y + NODE_H / 2 + 4}" text-anchor="middle">${escapeHtml(label)}</text>
  </g>`;
}

export function renderExplanation(explanation: Explanation): string {
    const positions = nodePositions(explanation);
    let maxX = 0;
    let maxY = 0;
    for (const { x, y } of positions.values()) {
        maxX = Math.max(maxX, x + NODE_W);
        maxY = Math.max(maxY, y + NODE_H);
    }
    const edges = explanation.edges
        .map((edge) => {
            const from = positions.get(edge.parent);
            const to = positions.get(edge.child);
            if (!from || !to) {
                return '';
            }
            return `  <line class="graph-edge" x1="${from.x + NODE_W}" y1="${from.y + NODE_H / 2}" x2="${to.x}" y2="${to.y + NODE_H / 2}" marker-end="url(#arrow)"/>`;
        })
        .filter(Boolean)
        .join('\n');
    const nodes = [...explanation.nodes]
        .sort((a, b) => a.id.localeCompare(b.id))
        .map((node) => {
            const { x, y } = positions.get(node.id)!;
            return nodeMarkup(node, x, y);
        })
        .join('\n');
    const isolated = explanation.isolated_count === 0
        ? '<p class="isolated-note none">Every abnormal finding is explained by this disease.</p>'
        : `<p class="isolated-note some">${explanation.isolated_count} unexplained finding(s) attached to a virtual default cause.</p>`;
    return `<section class="explanation" data-disease="${escapeHtml(explanation.hypothesis.disease_id)}">
<h3>Why ${escapeHtml(explanation.hypothesis.disease_id)}?</h3>
${isolated}
<svg viewBox="0 0 ${maxX + MARGIN} ${maxY + MARGIN}" width="${maxX + MARGIN}" height="${maxY + MARGIN}" class="explanation-graph">
  <defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>
${edges}
${nodes}
</svg>
</section>`;
}

export function renderErrorBanner(detail: string): string {
    return `<div class="error-banner" role="alert">${escapeHtml(detail)}</div>`;
}

/** Variable ids mentioned in a service rejection, for field highlighting. */
export function offendingFields(detail: string): string[] {
    const matches = detail.match(/\b(?:BX|SX|SG|B|X|G|D)\d+\b/g);
    return matches ? [...new Set(matches)] : [];
}
