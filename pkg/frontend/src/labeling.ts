/** Batch controller: renders the open questions, gathers decisions,
 * submits them in one POST, and fetches the next batch once training
 * finishes. Server rejections (409/400) surface inline without losing the
 * other decisions; network failures leave everything in browser storage
 * for a retry. */

import { ApiError, SessionApi } from "./api";
import type { Answer, Question } from "./api";
import { DecisionStore } from "./storage";
import { QuestionCard } from "./question-card";

export interface LabelingEvents {
  onBatchSubmitted?: (accepted: number) => void;
  onBatchLoaded?: (questions: Question[]) => void;
  onIdle?: () => void; // no more questions (budget exhausted)
}

export class LabelingController {
  readonly element: HTMLElement;
  cards: QuestionCard[] = [];

  private submitButton!: HTMLButtonElement;
  private messageBox!: HTMLElement;
  private waiting = false;
  private stopped = false;

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
    private readonly store: DecisionStore,
    private readonly events: LabelingEvents = {},
    private readonly pollIntervalMs = 2000,
  ) {
    this.element = document.createElement("section");
    this.element.className = "labeling";
    this.element.innerHTML = `
      <div class="batch-message" hidden></div>
      <div class="cards"></div>
      <div class="batch-actions">
        <button type="button" class="submit-batch" disabled>Submit answers</button>
      </div>
    `;
    this.submitButton = this.element.querySelector(".submit-batch") as HTMLButtonElement;
    this.messageBox = this.element.querySelector(".batch-message") as HTMLElement;
    this.submitButton.addEventListener("click", () => void this.submit());
  }

  stop(): void {
    this.stopped = true;
  }

  async loadBatch(): Promise<void> {
    if (this.stopped) return;
    const next = await this.api.getNext(this.sessionId);
    if (next.status === "TRAINING" || next.status === "REPAIRING") {
      this.showMessage("Training on your answers…");
      this.scheduleReload();
      return;
    }
    if (next.questions.length === 0) {
      this.cards = [];
      (this.element.querySelector(".cards") as HTMLElement).innerHTML = "";
      this.submitButton.disabled = true;
      this.showMessage("Labeling budget exhausted. You can trigger repair.");
      this.events.onIdle?.();
      return;
    }
    this.renderQuestions(next.questions);
    this.events.onBatchLoaded?.(next.questions);
  }

  private renderQuestions(questions: Question[]): void {
    const holder = this.element.querySelector(".cards") as HTMLElement;
    holder.innerHTML = "";
    this.cards = questions.map((question) => {
      const card = new QuestionCard(
        question,
        (qid, decision) => {
          this.store.set(qid, decision);
          this.refreshSubmitState();
        },
        this.store.get(question.question_id),
      );
      holder.appendChild(card.element);
      return card;
    });
    this.hideMessage();
    this.refreshSubmitState();
  }

  private refreshSubmitState(): void {
    const decided = this.cards.filter((c) => c.decision !== null && !c.submitted);
    this.submitButton.disabled = decided.length === 0;
    this.submitButton.textContent =
      decided.length === this.cards.length
        ? `Submit ${decided.length} answer(s)`
        : `Submit ${decided.length} of ${this.cards.length} (rest stay pending)`;
  }

  pendingAnswers(): Answer[] {
    return this.cards
      .filter((card) => card.decision !== null && !card.submitted)
      .map((card) => ({ question_id: card.question.question_id, label: card.decision! }));
  }

  async submit(): Promise<void> {
    const answers = this.pendingAnswers();
    if (answers.length === 0) return;
    this.submitButton.disabled = true;
    try {
      const response = await this.api.postLabels(this.sessionId, answers);
      this.acceptCards(answers.map((a) => a.question_id));
      this.events.onBatchSubmitted?.(response.accepted);
      this.showMessage("Answers accepted.");
      this.scheduleReload();
    } catch (error) {
      if (error instanceof ApiError && (error.status === 409 || error.status === 400)) {
        await this.submitIndividually(answers, error);
      } else {
        // network failure: decisions stay in browser storage, allow retry
        this.showMessage("Could not reach the server. Your answers are kept locally — retry.");
        this.refreshSubmitState();
      }
    }
  }

  /** Whole-batch rejection: fall back to per-answer posts so one bad
   * question does not hold the rest hostage. */
  private async submitIndividually(answers: Answer[], batchError: ApiError): Promise<void> {
    let accepted = 0;
    for (const answer of answers) {
      const card = this.cards.find((c) => c.question.question_id === answer.question_id);
      try {
        await this.api.postLabels(this.sessionId, [answer]);
        accepted += 1;
        if (card) {
          card.clearError();
          card.markSubmitted();
        }
        this.store.acknowledge([answer.question_id]);
      } catch (error) {
        const message =
          error instanceof ApiError ? error.message : "network failure, retry";
        card?.flagError(message);
      }
    }
    if (accepted > 0) {
      this.events.onBatchSubmitted?.(accepted);
      this.scheduleReload();
    } else {
      this.showMessage(`Submission rejected: ${batchError.message}`);
      this.refreshSubmitState();
    }
  }

  private acceptCards(questionIds: string[]): void {
    for (const qid of questionIds) {
      this.cards.find((c) => c.question.question_id === qid)?.markSubmitted();
    }
    this.store.acknowledge(questionIds);
  }

  private scheduleReload(): void {
    if (this.waiting || this.stopped) return;
    this.waiting = true;
    const poll = async (): Promise<void> => {
      if (this.stopped) return;
      try {
        const status = await this.api.getStatus(this.sessionId);
        if (status.status === "AWAITING_LABELS" || status.status === "DONE") {
          this.waiting = false;
          await this.loadBatch();
          return;
        }
      } catch {
        // poll again; transient failures must not lose state
      }
      setTimeout(() => void poll(), this.pollIntervalMs);
    };
    setTimeout(() => void poll(), this.pollIntervalMs);
  }

  private showMessage(text: string): void {
    this.messageBox.hidden = false;
    this.messageBox.textContent = text;
  }

  private hideMessage(): void {
    this.messageBox.hidden = true;
    this.messageBox.textContent = "";
  }
}
