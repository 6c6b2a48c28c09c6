// Send flow state machine: exactly one request in flight at a time, and a
// failed question is kept so an error bubble's retry can re-issue it
// without appending a second user bubble.

import { ApiError } from './api.js';
import type { ChatResponse } from './types.js';
import type { Transcript } from './transcript.js';

export type AskFn = (question: string) => Promise<ChatResponse>;

export class ChatController {
  private inFlight = false;
  private failedQuestion: string | null = null;

  constructor(
    private readonly transcript: Transcript,
    private readonly ask: AskFn,
    private readonly onStateChange: () => void = () => {},
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  get canRetry(): boolean {
    return this.failedQuestion !== null && !this.inFlight;
  }

  async send(text: string): Promise<void> {
    const question = text.trim();
    if (!question || this.inFlight) return;
    this.transcript.addUser(question);
    await this.issue(question);
  }

  async retry(): Promise<void> {
    if (!this.canRetry) return;
    await this.issue(this.failedQuestion as string);
  }

  private async issue(question: string): Promise<void> {
    this.inFlight = true;
    this.onStateChange();
    try {
      const response = await this.ask(question);
      this.transcript.addBot(response.answer, response.confidence, response.similarity);
      this.failedQuestion = null;
    } catch (err) {
      this.transcript.addError(err instanceof ApiError ? err.message : String(err));
      this.failedQuestion = question;
    } finally {
      this.inFlight = false;
      this.onStateChange();
    }
  }
}
