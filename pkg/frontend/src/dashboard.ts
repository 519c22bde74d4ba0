/** Session dashboard: status, budget progress, iteration counter.
 * Polls the status endpoint and notifies listeners on every refresh. */

import { ApiError, SessionApi } from "./api";
import type { SessionStatus } from "./api";

export type StatusListener = (status: SessionStatus) => void;

export class Dashboard {
  readonly element: HTMLElement;
  lastStatus: SessionStatus | null = null;
  notFound = false;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
    private readonly onStatus: StatusListener = () => {},
    private readonly pollIntervalMs = 2000,
  ) {
    this.element = document.createElement("section");
    this.element.className = "dashboard";
    this.element.innerHTML = `
      <div class="session-line">
        session <code class="session-id"></code>
        <span class="status-pill"></span>
      </div>
      <div class="budget">
        <progress class="budget-bar" value="0" max="1"></progress>
        <span class="budget-text"></span>
      </div>
      <div class="iteration-line">iteration <span class="iteration">0</span></div>
      <div class="not-found" hidden>Session not found.</div>
      <div class="session-error" hidden></div>
    `;
    (this.element.querySelector(".session-id") as HTMLElement).textContent = sessionId;
  }

  render(status: SessionStatus): void {
    this.lastStatus = status;
    const pill = this.element.querySelector(".status-pill") as HTMLElement;
    pill.textContent = status.status;
    pill.dataset.status = status.status;
    const bar = this.element.querySelector(".budget-bar") as HTMLProgressElement;
    bar.max = status.budget;
    bar.value = status.labeled;
    (this.element.querySelector(".budget-text") as HTMLElement).textContent =
      `${status.labeled} / ${status.budget} labeled`;
    (this.element.querySelector(".iteration") as HTMLElement).textContent =
      String(status.iteration);
    const errorBox = this.element.querySelector(".session-error") as HTMLElement;
    errorBox.hidden = !status.error;
    errorBox.textContent = status.error ?? "";
  }

  renderNotFound(): void {
    this.notFound = true;
    (this.element.querySelector(".not-found") as HTMLElement).hidden = false;
  }

  async refresh(): Promise<SessionStatus | null> {
    try {
      const status = await this.api.getStatus(this.sessionId);
      this.render(status);
      this.onStatus(status);
      return status;
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.renderNotFound();
        this.stop();
      }
      return null;
    }
  }

  start(): void {
    const tick = async (): Promise<void> => {
      if (this.stopped) return;
      await this.refresh();
      if (!this.stopped) {
        this.timer = setTimeout(() => void tick(), this.pollIntervalMs);
      }
    };
    void tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
  }
}
