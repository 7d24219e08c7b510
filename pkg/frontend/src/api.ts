import type {
    Explanation,
    ModelInfo,
    ObservationIn,
    SessionCreated,
    StepResponse,
} from './types';

/** Service rejection carrying the verbatim detail for display. */
export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly detail: string,
    ) {
        super(detail);
        this.name = 'ApiError';
    }
}

export interface ApiClient {
    listModels(): Promise<ModelInfo[]>;
    createSession(modelId: string): Promise<SessionCreated>;
    submitObservations(sessionId: string, observations: ObservationIn[]): Promise<StepResponse>;
    getExplanation(sessionId: string, diseaseId: string, state?: number): Promise<Explanation>;
    flagDisagreement(sessionId: string, note: string): Promise<{ status: string }>;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await fetch(url, {
        headers: { 'content-type': 'application/json' },
        ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
        const detail = typeof body?.detail === 'string'
            ? body.detail
            : JSON.stringify(body?.detail ?? body);
        throw new ApiError(response.status, detail);
    }
    return body as T;
}

export function createHttpClient(baseUrl = ''): ApiClient {
    return {
        async listModels() {
            const body = await request<{ models: ModelInfo[] }>(`${baseUrl}/models`);
            return body.models;
        },
        createSession(modelId: string) {
            return request<SessionCreated>(`${baseUrl}/sessions`, {
                method: 'POST',
                body: JSON.stringify({ model_id: modelId }),
            });
        },
        submitObservations(sessionId: string, observations: ObservationIn[]) {
            return request<StepResponse>(`${baseUrl}/sessions/${sessionId}/observations`, {
                method: 'POST',
                body: JSON.stringify({ observations }),
            });
        },
        getExplanation(sessionId: string, diseaseId: string, state?: number) {
            const query = state === undefined ? '' : `?state=${state}`;
            return request<Explanation>(
                `${baseUrl}/sessions/${sessionId}/explanations/${diseaseId}${query}`,
            );
        },
        flagDisagreement(sessionId: string, note: string) {
            return request<{ status: string }>(`${baseUrl}/sessions/${sessionId}/disagreement`, {
                method: 'POST',
                body: JSON.stringify({ note }),
            });
        },
    };
}
