/** Browser-storage backed decision store: answers survive a refresh until
 * the server acknowledges them. */

import type { Decision } from "./api";

export class DecisionStore {
  private readonly key: string;

  constructor(sessionId: string, private readonly storage: Storage = window.localStorage) {
    this.key = `graphrepair:${sessionId}:decisions`;
  }

  private read(): Record<string, Decision> {
    const raw = this.storage.getItem(this.key);
    if (!raw) return {};
    try {
      return JSON.parse(raw) as Record<string, Decision>;
    } catch {
      return {};
    }
  }

  private write(decisions: Record<string, Decision>): void {
    if (Object.keys(decisions).length === 0) {
      this.storage.removeItem(this.key);
    } else {
      this.storage.setItem(this.key, JSON.stringify(decisions));
    }
  }

  all(): Record<string, Decision> {
    return this.read();
  }

  get(questionId: string): Decision | null {
    return this.read()[questionId] ?? null;
  }

  set(questionId: string, decision: Decision): void {
    const decisions = this.read();
    decisions[questionId] = decision;
    this.write(decisions);
  }

  /** Drop decisions the server has accepted. */
  acknowledge(questionIds: string[]): void {
    const decisions = this.read();
    for (const qid of questionIds) delete decisions[qid];
    this.write(decisions);
  }

  clear(): void {
    this.storage.removeItem(this.key);
  }
}
