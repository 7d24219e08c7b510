import { createHttpClient } from './api';
import { SessionController } from './controller';

async function boot(): Promise<void> {
    const root = document.getElementById('app');
    if (!root) {
        throw new Error('missing #app element');
    }
    const api = createHttpClient('');
    const models = await api.listModels();
    if (models.length === 0) {
        root.innerHTML = '<p class="state-banner">No models registered. POST a model file to /models first.</p>';
        return;
    }
    const model = models[0];
    const session = await api.createSession(model.model_id);
    new SessionController(root, api, model, session);
}

void boot();
