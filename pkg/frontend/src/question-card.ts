/** One record pair awaiting a decision: two attribute tables aligned by
 * attribute name, a similarity badge and MATCH / NON_MATCH buttons.
 * A decision can be made once per card before submission. */

import type { Decision, Question } from "./api";

export type DecideHandler = (questionId: string, decision: Decision) => void;

export class QuestionCard {
  readonly element: HTMLElement;
  decision: Decision | null = null;
  submitted = false;

  private matchButton!: HTMLButtonElement;
  private nonMatchButton!: HTMLButtonElement;
  private errorBox!: HTMLElement;

  constructor(
    readonly question: Question,
    private readonly onDecide: DecideHandler,
    initialDecision: Decision | null = null,
  ) {
    this.element = document.createElement("article");
    this.element.className = "question-card";
    this.element.dataset.questionId = question.question_id;
    this.render();
    if (initialDecision) this.applyDecision(initialDecision, false);
  }

  /** Attribute names of both records, record_a's order first. */
  static alignedKeys(question: Question): string[] {
    const keys = Object.keys(question.record_a.attributes);
    for (const key of Object.keys(question.record_b.attributes)) {
      if (!keys.includes(key)) keys.push(key);
    }
    return keys;
  }

  private render(): void {
    const { record_a, record_b, similarity } = this.question;
    const rows = QuestionCard.alignedKeys(this.question)
      .map((key) => {
        const a = record_a.attributes[key] ?? "";
        const b = record_b.attributes[key] ?? "";
        return `<tr><th>${escapeHtml(key)}</th><td>${escapeHtml(a)}</td><td>${escapeHtml(b)}</td></tr>`;
      })
      .join("");
    this.element.innerHTML = `
      <header>
        <span class="similarity-badge">similarity ${similarity.toFixed(3)}</span>
        <span class="decision-state">undecided</span>
      </header>
      <table class="pair-table">
        <thead>
          <tr>
            <th></th>
            <th>${escapeHtml(record_a.record_id)} <small>${escapeHtml(record_a.source_id)}</small></th>
            <th>${escapeHtml(record_b.record_id)} <small>${escapeHtml(record_b.source_id)}</small></th>
          </tr>
        </thead>
        <tbody>${rows}</tbody>
      </table>
      <footer>
        <button type="button" class="decide-match">Match</button>
        <button type="button" class="decide-non-match">Non-match</button>
        <span class="card-error" hidden></span>
      </footer>
    `;
    this.matchButton = this.element.querySelector(".decide-match") as HTMLButtonElement;
    this.nonMatchButton = this.element.querySelector(".decide-non-match") as HTMLButtonElement;
    this.errorBox = this.element.querySelector(".card-error") as HTMLElement;
    this.matchButton.addEventListener("click", () => this.applyDecision("MATCH", true));
    this.nonMatchButton.addEventListener("click", () => this.applyDecision("NON_MATCH", true));
  }

  private applyDecision(decision: Decision, fromUser: boolean): void {
    if (this.decision !== null || this.submitted) return;
    this.decision = decision;
    this.matchButton.disabled = true;
    this.nonMatchButton.disabled = true;
    this.element.classList.add("decided", decision === "MATCH" ? "is-match" : "is-non-match");
    const state = this.element.querySelector(".decision-state")!;
    state.textContent = decision === "MATCH" ? "match" : "non-match";
    if (fromUser) this.onDecide(this.question.question_id, decision);
  }

  markSubmitted(): void {
    this.submitted = true;
    this.element.classList.add("submitted");
    this.matchButton.disabled = true;
    this.nonMatchButton.disabled = true;
  }

  flagError(message: string): void {
    this.element.classList.add("has-error");
    this.errorBox.hidden = false;
    this.errorBox.textContent = message;
  }

  clearError(): void {
    this.element.classList.remove("has-error");
    this.errorBox.hidden = true;
    this.errorBox.textContent = "";
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
