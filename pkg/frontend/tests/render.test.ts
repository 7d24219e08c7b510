import { describe, expect, it } from 'vitest';

import { pct, relativeWidth } from '../src/format';
import {
    offendingFields,
    renderDiagnosis,
    renderEvidenceForm,
    renderExplanation,
    renderRecommendations,
} from '../src/render';
import type { Explanation, ModelInfo, StepResponse } from '../src/types';
import golden from './fixtures/session_flow.json';

const model = golden.model as ModelInfo;
const step1 = golden.steps[0].response as StepResponse;
const step2 = golden.steps[1].response as StepResponse;
const explanation = golden.explanations.step1_B5 as Explanation;

describe('diagnosis rendering', () => {
    it('shows the completeness meter at the service value', () => {
        expect(step1.report.phi).toBeCloseTo(0.6, 12);
        const html = renderDiagnosis(step1.report);
        expect(html).toContain('width:60%');
        expect(html).toContain('completeness 60%');
        expect(html).toContain(`data-phi="${step1.report.phi}"`);
    });

    it('renders hypotheses as bars proportional to their suspicion', () => {
        const html = renderDiagnosis(step1.report);
        const ranked = [...step1.report.results].sort((a, b) => b.suspicion - a.suspicion);
        expect(ranked[0].disease_id).toBe('B6');
        // top bar is full width, the runner-up scales by the exact ratio
        expect(html).toContain('width:100.0%');
        expect(html).toContain(`width:${relativeWidth(ranked[1].suspicion, ranked[0].suspicion)}`);
        const firstIndex = html.indexOf('data-disease="B6"');
        const secondIndex = html.indexOf('data-disease="B5"');
        expect(firstIndex).toBeGreaterThan(-1);
        expect(secondIndex).toBeGreaterThan(firstIndex);
    });

    it('renders the exact service numbers, not recomputed ones', () => {
        const html = renderDiagnosis(step2.report);
        for (const result of step2.report.results) {
            expect(html).toContain(pct(result.suspicion));
        }
    });

    it('treats no-finding as a distinct state', () => {
        const html = renderDiagnosis({ step: 1, phi: 1.0, results: [], flags: ['no-finding'] });
        expect(html).toContain('no-finding');
        expect(html).not.toContain('hypothesis-row');
    });

    it('treats inconsistent evidence as a distinct state', () => {
        const html = renderDiagnosis({
            step: 2,
            phi: 0.5,
            results: [],
            flags: ['evidence-inconsistent'],
        });
        expect(html).toContain('inconsistent');
    });

    it('is deterministic and snapshot-stable', () => {
        const once = renderDiagnosis(step1.report);
        const twice = renderDiagnosis(step1.report);
        expect(twice).toBe(once);
        expect(once).toMatchSnapshot();
    });
});

describe('recommendation rendering', () => {
    it('sorts by degree with cost badges and breakdown', () => {
        const html = renderRecommendations(step1.recommendations);
        const sorted = [...step1.recommendations.candidates].sort((a, b) => b.I - a.I);
        const positions = sorted.map((c) => html.indexOf(`data-variable="${c.variable_id}"`));
        expect([...positions]).toEqual([...positions].sort((a, b) => a - b));
        for (const candidate of sorted) {
            expect(html).toContain(`&beta; ${candidate.cost}`);
            expect(html).toContain(pct(candidate.I));
        }
        expect(html).toContain('per-disease contribution');
    });

    it('renders the loop-complete state when everything is observed', () => {
        const html = renderRecommendations({ step: 3, candidates: [], flags: ['fully-observed'] });
        expect(html).toContain('loop is complete');
    });

    it('banners the uninformative case while keeping candidates visible', () => {
        const recs = {
            ...step1.recommendations,
            flags: ['uninformative'],
        };
        const html = renderRecommendations(recs);
        expect(html).toContain('uninformative');
        expect(html).toContain('data-variable=');
    });

    it('is snapshot-stable', () => {
        expect(renderRecommendations(step1.recommendations)).toMatchSnapshot();
    });
});

describe('evidence form rendering', () => {
    it('offers every named state plus unknown', () => {
        const html = renderEvidenceForm(model, {});
        const x4 = model.variables.find((v) => v.kind === 'X' && v.index === 4)!;
        for (const state of x4.states) {
            expect(html).toContain(`>${state}</option>`);
        }
        expect(html).toContain('<option value="" selected>unknown</option>');
        expect(html).toContain('id="obs-X4"');
    });

    it('marks current observations as selected', () => {
        const html = renderEvidenceForm(model, { X4: 1 });
        const field = html.slice(html.indexOf('id="obs-X4"'), html.indexOf('id="obs-X5"'));
        expect(field).toContain('<option value="1" selected>');
    });

    it('groups variables by kind', () => {
        const html = renderEvidenceForm(model, {});
        expect(html).toContain('data-kind="X"');
        expect(html).not.toContain('data-kind="B"');
    });

    it('highlights fields named in a rejection', () => {
        const detail = golden.rejection.detail as string;
        const fields = offendingFields(detail);
        expect(fields).toEqual(['X6']);
        const html = renderEvidenceForm(model, {}, fields);
        expect(html).toContain('field-error');
    });
});

describe('explanation rendering', () => {
    it('draws the virtual default cause dashed', () => {
        const html = renderExplanation(explanation);
        const start = html.indexOf('color-virtual-d');
        expect(start).toBeGreaterThan(-1);
        const d8 = html.slice(start, html.indexOf('data-node="X4"'));
        expect(d8).toContain('data-node="D8"');
        expect(d8).toContain('stroke-dasharray="6 3"');
    });

    it('distinguishes the hypothesis node and shows the isolated count', () => {
        const html = renderExplanation(explanation);
        expect(html).toContain('hypothesis-node');
        expect(html).toContain('1 unexplained finding');
    });

    it('colors observed nodes by their state', () => {
        const html = renderExplanation(explanation);
        expect(html).toContain('color-abnormal');
        const withNormal: Explanation = {
            ...explanation,
            nodes: explanation.nodes.map((n) =>
                n.id === 'X4' ? { ...n, color: 'normal' as const, observed_state: 0 } : n,
            ),
        };
        expect(renderExplanation(withNormal)).toContain('color-normal');
    });

    it('keeps every edge it is given', () => {
        const html = renderExplanation(explanation);
        const edgeCount = (html.match(/class="graph-edge"/g) ?? []).length;
        expect(edgeCount).toBe(explanation.edges.length);
    });

    it('is deterministic and snapshot-stable', () => {
        const once = renderExplanation(explanation);
        expect(renderExplanation(explanation)).toBe(once);
        expect(once).toMatchSnapshot();
    });
});
