// Append-only transcript store. Session memory only: nothing persists
// across a reload, matching the service's stateless chat contract.

import type { ChatMessage, ConfidenceTier } from './types.js';

export type TranscriptListener = (messages: readonly ChatMessage[]) => void;

export class Transcript {
  private messages: ChatMessage[] = [];
  private listeners: TranscriptListener[] = [];
  private nextId = 1;

  list(): readonly ChatMessage[] {
    return [...this.messages];
  }

  get length(): number {
    return this.messages.length;
  }

  onChange(listener: TranscriptListener): void {
    this.listeners.push(listener);
  }

  addUser(text: string): ChatMessage {
    return this.append({ role: 'user', text });
  }

  addBot(text: string, confidence: ConfidenceTier, similarity: number): ChatMessage {
    return this.append({ role: 'bot', text, confidence, similarity });
  }

  addError(text: string): ChatMessage {
    return this.append({ role: 'error', text });
  }

  private append(partial: Omit<ChatMessage, 'id' | 'timestamp'>): ChatMessage {
    const message: ChatMessage = { ...partial, id: this.nextId++, timestamp: Date.now() };
    this.messages.push(message);
    const snapshot = this.list();
    for (const listener of this.listeners) listener(snapshot);
    return message;
  }
}
