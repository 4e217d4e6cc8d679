// Entry point for the static bundle. The API base URL comes from optional
// runtime config (config.js); an empty base means same-origin requests.

import { ApiClient } from './api.js';
import { mountApp } from './app.js';
import { Session } from './session.js';

declare global {
  interface Window {
    TENET_PORTAL_CONFIG?: { apiBaseUrl?: string };
  }
}

const base = window.TENET_PORTAL_CONFIG?.apiBaseUrl ?? '';
const session = new Session();
const client = new ApiClient(base, session);
const root = document.getElementById('app');
if (root) mountApp(root, client, session);
