// Runtime config. Edit apiBaseUrl to point the portal at a remote control
// plane; an empty string means the portal is served from the same origin.
window.TENET_PORTAL_CONFIG = { apiBaseUrl: '' };
