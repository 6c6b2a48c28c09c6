// Page bootstrap: transcript view, input bar, health indicator. The page
// supplies an #app container (and optionally window.QABOT_API_BASE_URL);
// this module builds everything else.

import { askQuestion, checkHealth } from './api.js';
import { ChatController } from './controller.js';
import { Transcript } from './transcript.js';
import { TIER_BADGE_CLASS, makeConfig, tierLabel } from './types.js';
import type { ChatMessage } from './types.js';

const HEALTH_POLL_MS = 5000;

declare global {
  interface Window {
    QABOT_API_BASE_URL?: string;
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderMessage(message: ChatMessage, onRetry: () => void): HTMLElement {
  const row = el('div', `row row--${message.role}`);
  const bubble = el('div', `bubble bubble--${message.role}`);
  bubble.appendChild(el('div', 'bubble__text', message.text));
  if (message.role === 'bot' && message.confidence) {
    const badge = el('span', TIER_BADGE_CLASS[message.confidence], tierLabel(message.confidence));
    if (message.similarity !== undefined) badge.title = `similarity ${message.similarity.toFixed(2)}`;
    bubble.appendChild(badge);
  }
  if (message.role === 'error') {
    const retry = el('button', 'bubble__retry', 'Retry');
    retry.addEventListener('click', onRetry);
    bubble.appendChild(retry);
  }
  row.appendChild(bubble);
  return row;
}

export function initChat(root: HTMLElement): void {
  const config = makeConfig(window.QABOT_API_BASE_URL ?? 'http://127.0.0.1:8080');
  const transcript = new Transcript();

  const header = el('header', 'header');
  const dot = el('span', 'health health--unknown');
  dot.title = 'checking server...';
  header.appendChild(dot);
  header.appendChild(el('h1', 'header__title', 'Consultation'));

  const thread = el('main', 'thread');
  const emptyState = el('div', 'thread__empty', 'Ask a question to begin.');
  thread.appendChild(emptyState);

  const inputBar = el('footer', 'input-bar');
  const input = el('textarea', 'input-bar__input');
  input.rows = 1;
  input.placeholder = 'Type a question...';
  const send = el('button', 'input-bar__send', 'Send');
  send.disabled = true;
  inputBar.appendChild(input);
  inputBar.appendChild(send);

  root.appendChild(header);
  root.appendChild(thread);
  root.appendChild(inputBar);

  const controller = new ChatController(
    transcript,
    (question) => askQuestion(question, config),
    () => {
      input.disabled = controller.busy;
      send.disabled = controller.busy || !input.value.trim();
      if (!controller.busy) input.focus();
    },
  );

  transcript.onChange((messages) => {
    thread.replaceChildren();
    for (const message of messages) {
      thread.appendChild(renderMessage(message, () => void controller.retry()));
    }
    thread.scrollTop = thread.scrollHeight; // newest message stays visible
  });

  function submit(): void {
    const text = input.value;
    if (!text.trim() || controller.busy) return;
    input.value = '';
    void controller.send(text);
  }

  send.addEventListener('click', submit);
  input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter' && !event.shiftKey) {
      event.preventDefault();
      submit();
    }
  });
  input.addEventListener('input', () => {
    send.disabled = controller.busy || !input.value.trim();
  });

  async function pollHealth(): Promise<void> {
    const healthy = await checkHealth(config);
    dot.className = healthy ? 'health health--up' : 'health health--down';
    dot.title = healthy ? 'server reachable, bundle loaded' : 'server unreachable or no bundle';
  }
  void pollHealth();
  setInterval(() => void pollHealth(), HEALTH_POLL_MS);
}

const appRoot = typeof document !== 'undefined' ? document.getElementById('app') : null;
if (appRoot) initChat(appRoot);
