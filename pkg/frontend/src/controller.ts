/**
 * Session controller: owns the client-side view state, talks to the
 * service, and re-renders. One in-flight mutation at a time; responses
 * for a superseded step are discarded by step number.
 */

import { ApiError, type ApiClient } from './api';
import {
    offendingFields,
    renderDiagnosis,
    renderErrorBanner,
    renderEvidenceForm,
    renderExplanation,
    renderInitialView,
    renderRecommendations,
} from './render';
import {
    parseVariableId,
    type Explanation,
    type ModelInfo,
    type ObservationIn,
    type SessionCreated,
    type StepResponse,
} from './types';

export interface SessionView {
    model: ModelInfo;
    sessionId: string;
    step: number;
    status: string;
    observed: Record<string, number>;
    latest?: StepResponse;
    explanation?: Explanation;
    error?: string;
    initialView?: SessionCreated['initial_view'];
}

export class SessionController {
    readonly view: SessionView;
    private inFlight = false;

    constructor(
        private readonly root: HTMLElement,
        private readonly api: ApiClient,
        model: ModelInfo,
        session: SessionCreated,
    ) {
        this.view = {
            model,
            sessionId: session.session_id,
            step: session.step,
            status: session.status,
            observed: {},
            initialView: session.initial_view,
        };
        this.root.addEventListener('click', (event) => this.onClick(event));
        this.root.addEventListener('submit', (event) => this.onSubmit(event));
        this.render();
    }

    render(): void {
        const { latest } = this.view;
        const parts: string[] = [];
        parts.push(
            `<header class="session-header">
<span class="session-id">session ${this.view.sessionId}</span>
<span class="session-step">step ${this.view.step}</span>
<span class="session-status" data-status="${this.view.status}">${this.view.status}</span>
<button class="flag-disagreement" data-action="flag">Disagree with this diagnosis</button>
</header>`,
        );
        if (this.view.error) {
            parts.push(renderErrorBanner(this.view.error));
        }
        const errorFields = this.view.error ? offendingFields(this.view.error) : [];
        parts.push(
            `<div class="columns"><div class="column entry">`,
            renderEvidenceForm(this.view.model, this.view.observed, errorFields),
            `</div><div class="column results">`,
        );
        if (latest) {
            parts.push(renderDiagnosis(latest.report));
            parts.push(renderRecommendations(latest.recommendations));
        } else if (this.view.initialView) {
            parts.push(renderInitialView(this.view.initialView));
        }
        if (this.view.explanation) {
            parts.push(renderExplanation(this.view.explanation));
        }
        parts.push(`</div></div>`);
        this.root.innerHTML = parts.join('\n');
    }

    /** Observation batch read from the form: every non-unknown selection. */
    collectBatch(): ObservationIn[] {
        const batch: ObservationIn[] = [];
        const selects = this.root.querySelectorAll<HTMLSelectElement>('.evidence-form select');
        for (const select of selects) {
            if (select.value === '') {
                continue;
            }
            batch.push({
                variable: parseVariableId(select.name),
                state: Number(select.value),
            });
        }
        return batch;
    }

    async submitObservations(batch: ObservationIn[]): Promise<void> {
        if (this.inFlight || batch.length === 0) {
            return;
        }
        this.inFlight = true;
        try {
            const response = await this.api.submitObservations(this.view.sessionId, batch);
            this.applyStepResponse(response, batch);
        } catch (error) {
            if (error instanceof ApiError) {
                this.view.error = error.detail;
                this.render();
            } else {
                throw error;
            }
        } finally {
            this.inFlight = false;
        }
    }

    /** Stale responses (older or same step than already shown) are dropped. */
    applyStepResponse(response: StepResponse, batch: ObservationIn[]): boolean {
        if (this.view.latest && response.report.step <= this.view.latest.report.step) {
            return false;
        }
        for (const observation of batch) {
            this.view.observed[`${observation.variable.kind}${observation.variable.index}`] =
                observation.state;
        }
        this.view.latest = response;
        this.view.step = response.report.step;
        this.view.error = undefined;
        this.view.explanation = undefined;
        this.render();
        return true;
    }

    /** Close the loop: a clicked recommendation focuses its entry field. */
    focusCandidate(variableId: string): void {
        const field = this.root.querySelector<HTMLSelectElement>(`#obs-${variableId}`);
        if (!field) {
            return;
        }
        for (const highlighted of this.root.querySelectorAll('.field-focus')) {
            highlighted.classList.remove('field-focus');
        }
        field.closest('.evidence-field')?.classList.add('field-focus');
        field.focus();
    }

    async showExplanation(diseaseId: string, state?: number): Promise<void> {
        try {
            this.view.explanation = await this.api.getExplanation(
                this.view.sessionId,
                diseaseId,
                state,
            );
            this.view.error = undefined;
        } catch (error) {
            if (error instanceof ApiError) {
                this.view.error = `${error.detail} — refresh the diagnosis and retry`;
            } else {
                throw error;
            }
        }
        this.render();
    }

    async flagDisagreement(note = ''): Promise<void> {
        const response = await this.api.flagDisagreement(this.view.sessionId, note);
        this.view.status = response.status;
        this.render();
    }

    private onClick(event: Event): void {
        const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]');
        if (!target) {
            return;
        }
        const action = target.dataset.action;
        if (action === 'focus-candidate' && target.dataset.variable) {
            event.preventDefault();
            this.focusCandidate(target.dataset.variable);
        } else if (action === 'explain' && target.dataset.disease) {
            event.preventDefault();
            void this.showExplanation(
                target.dataset.disease,
                target.dataset.state ? Number(target.dataset.state) : undefined,
            );
        } else if (action === 'flag') {
            event.preventDefault();
            void this.flagDisagreement();
        }
    }

    private onSubmit(event: Event): void {
        const form = (event.target as HTMLElement).closest('form.evidence-form');
        if (!form) {
            return;
        }
        event.preventDefault();
        void this.submitObservations(this.collectBatch());
    }
}
