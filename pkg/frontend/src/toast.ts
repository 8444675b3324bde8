/** Transient error/info messages surfaced at the bottom of the screen. */

let host: HTMLElement | null = null;

function ensureHost(): HTMLElement {
  if (host === null || !host.isConnected) {
    host = document.createElement('div');
    host.className = 'toast-host';
    host.setAttribute('data-testid', 'toasts');
    document.body.appendChild(host);
  }
  return host;
}

export function showToast(message: string, kind: 'error' | 'info' = 'error'): void {
  const element = document.createElement('div');
  element.className = `toast toast-${kind}`;
  element.textContent = message;
  ensureHost().appendChild(element);
  setTimeout(() => element.remove(), 6000);
}
