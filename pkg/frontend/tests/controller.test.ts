import { beforeEach, describe, expect, it } from 'vitest';

import { ApiError, type ApiClient } from '../src/api';
import { SessionController } from '../src/controller';
import type {
    Explanation,
    ModelInfo,
    ObservationIn,
    SessionCreated,
    StepResponse,
} from '../src/types';
import golden from './fixtures/session_flow.json';

const model = golden.model as ModelInfo;
const step1 = golden.steps[0].response as StepResponse;
const step2 = golden.steps[1].response as StepResponse;
const explanationB5 = golden.explanations.step1_B5 as Explanation;

function sessionInfo(): SessionCreated {
    return {
        session_id: golden.session.session_id,
        model_id: golden.session.model_id,
        step: 1,
        status: 'open',
        initial_view: golden.initial_view,
    };
}

class FakeApi implements ApiClient {
    submissions: ObservationIn[][] = [];
    flagged: string[] = [];
    private responses: (StepResponse | ApiError)[] = [];

    queue(...responses: (StepResponse | ApiError)[]) {
        this.responses.push(...responses);
    }

    async listModels() {
        return [model];
    }

    async createSession() {
        return sessionInfo();
    }

    async submitObservations(_sessionId: string, observations: ObservationIn[]) {
        this.submissions.push(observations);
        const next = this.responses.shift();
        if (!next) {
            throw new Error('no queued response');
        }
        if (next instanceof ApiError) {
            throw next;
        }
        return next;
    }

    async getExplanation() {
        return explanationB5;
    }

    async flagDisagreement(_sessionId: string, note: string) {
        this.flagged.push(note);
        return { status: 'flagged-disagreement' };
    }
}

function mount(): { root: HTMLElement; api: FakeApi; controller: SessionController } {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById('app')!;
    const api = new FakeApi();
    const controller = new SessionController(root, api, model, sessionInfo());
    return { root, api, controller };
}

function select(root: HTMLElement, variableId: string): HTMLSelectElement {
    const field = root.querySelector<HTMLSelectElement>(`#obs-${variableId}`);
    expect(field, `missing select for ${variableId}`).toBeTruthy();
    return field!;
}

async function flush() {
    await new Promise((resolve) => setTimeout(resolve, 0));
}

describe('three-step session flow', () => {
    let root: HTMLElement;
    let api: FakeApi;
    let controller: SessionController;

    beforeEach(() => {
        ({ root, api, controller } = mount());
    });

    it('starts from the prior-ranked initial view', () => {
        expect(root.querySelector('.initial-view')).toBeTruthy();
        expect(root.textContent).toContain('B7');
        expect(root.querySelector('.session-step')!.textContent).toBe('step 1');
    });

    it('create, observe, recommend-click, observe again', async () => {
        api.queue(step1, step2);

        // step 1: enter the findings and submit the batch through the form
        select(root, 'X3').value = '0';
        select(root, 'X4').value = '1';
        select(root, 'X8').value = '1';
        root.querySelector('form.evidence-form')!.dispatchEvent(
            new Event('submit', { bubbles: true, cancelable: true }),
        );
        await flush();

        expect(api.submissions[0]).toHaveLength(3);
        expect(root.querySelector('.session-step')!.textContent).toBe('step 2');
        const bars = [...root.querySelectorAll<HTMLElement>('.hypothesis-row')];
        expect(bars.map((b) => b.dataset.disease)).toEqual(['B6', 'B5']);
        const meter = root.querySelector<HTMLElement>('.phi-fill')!;
        expect(meter.style.width).toBe('60%');

        // recommendation click focuses the matching entry field
        const top = root.querySelector<HTMLElement>('.candidate')!;
        const variableId = top.dataset.variable!;
        top.click();
        const focused = root.querySelector<HTMLSelectElement>(`#obs-${variableId}`)!;
        expect(document.activeElement).toBe(focused);
        expect(focused.closest('.evidence-field')!.classList.contains('field-focus')).toBe(true);

        // step 2: the suggested check comes back abnormal
        select(root, 'X5').value = '1';
        root.querySelector('form.evidence-form')!.dispatchEvent(
            new Event('submit', { bubbles: true, cancelable: true }),
        );
        await flush();

        expect(root.querySelector('.session-step')!.textContent).toBe('step 3');
        const values = [...root.querySelectorAll('.suspicion-value')].map(
            (el) => el.textContent,
        );
        expect(values).toEqual(
            [...step2.report.results]
                .sort((a, b) => b.suspicion - a.suspicion)
                .map((r) => `${(r.suspicion * 100).toFixed(1)}%`),
        );
    });

    it('renders identical DOM for identical responses', async () => {
        api.queue(step1);
        await controller.submitObservations([
            { variable: { kind: 'X', index: 3 }, state: 0 },
            { variable: { kind: 'X', index: 4 }, state: 1 },
            { variable: { kind: 'X', index: 8 }, state: 1 },
        ]);
        const first = root.innerHTML;
        controller.render();
        expect(root.innerHTML).toBe(first);
    });
});

describe('stale responses and errors', () => {
    it('discards a response for a superseded step', async () => {
        const { controller } = mount();
        const batch: ObservationIn[] = [{ variable: { kind: 'X', index: 4 }, state: 1 }];
        expect(controller.applyStepResponse(step2, batch)).toBe(true);
        expect(controller.applyStepResponse(step1, batch)).toBe(false);
        expect(controller.view.latest).toBe(step2);
        expect(controller.view.step).toBe(step2.report.step);
    });

    it('shows the service rejection verbatim and highlights the field', async () => {
        const { root, api, controller } = mount();
        api.queue(new ApiError(golden.rejection.status, golden.rejection.detail));
        await controller.submitObservations([
            { variable: { kind: 'X', index: 6 }, state: 1 },
        ]);
        const banner = root.querySelector('.error-banner')!;
        expect(banner.textContent).toBe(golden.rejection.detail);
        const field = select(root, 'X6').closest('.evidence-field')!;
        expect(field.classList.contains('field-error')).toBe(true);
        // the failed batch must not be folded into the evidence
        expect(controller.view.observed).toEqual({});
    });

    it('fetches and renders an explanation on hypothesis click', async () => {
        const { root, api, controller } = mount();
        api.queue(step1);
        await controller.submitObservations([
            { variable: { kind: 'X', index: 4 }, state: 1 },
            { variable: { kind: 'X', index: 8 }, state: 1 },
        ]);
        root.querySelector<HTMLElement>('[data-action="explain"]')!.click();
        await flush();
        const dashed = root.querySelector('.graph-node.color-virtual-d rect')!;
        expect(dashed.getAttribute('stroke-dasharray')).toBe('6 3');
    });

    it('flags disagreement with one click', async () => {
        const { root, api } = mount();
        root.querySelector<HTMLElement>('[data-action="flag"]')!.click();
        await flush();
        expect(api.flagged).toEqual(['']);
        expect(root.querySelector('.session-status')!.textContent).toBe(
            'flagged-disagreement',
        );
    });
});
