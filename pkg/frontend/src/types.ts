// Wire types for the consultation service plus the transcript model.

export type ConfidenceTier = 'relevant' | 'fairly_relevant' | 'not_relevant';

export interface ChatResponse {
  answer_id: string;
  answer: string;
  matched_question_id: string;
  matched_question_text: string;
  similarity: number;
  q_value: number;
  blended_score: number;
  confidence: ConfidenceTier;
  latency_ms: number;
}

export interface HealthResponse {
  status: string;
  bundle_loaded: boolean;
}

export interface UiConfig {
  apiBaseUrl: string;
  timeoutMs: number;
}

export const DEFAULT_TIMEOUT_MS = 10_000;

export function makeConfig(apiBaseUrl: string, timeoutMs: number = DEFAULT_TIMEOUT_MS): UiConfig {
  const base = apiBaseUrl.trim().replace(/\/+$/, '');
  if (!base) throw new Error('api_base_url must be non-empty');
  return { apiBaseUrl: base, timeoutMs };
}

export type Role = 'user' | 'bot' | 'error';

export interface ChatMessage {
  id: number;
  role: Role;
  text: string;
  confidence?: ConfidenceTier; // bot messages only
  similarity?: number; // bot messages only
  timestamp: number;
}

// relevant = green, fairly_relevant = amber, not_relevant = gray.
// The exact colors live in the page theme, keyed by these class names.
export const TIER_BADGE_CLASS: Record<ConfidenceTier, string> = {
  relevant: 'badge badge--green',
  fairly_relevant: 'badge badge--amber',
  not_relevant: 'badge badge--gray',
};

export function tierLabel(tier: ConfidenceTier): string {
  return tier.replace('_', ' ');
}
