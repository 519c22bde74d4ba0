/** Top-level wiring: create or join a session, then compose the dashboard,
 * the labeling batch view, the repair trigger and the cluster explorer. */

import { SessionApi } from "./api";
import type { SessionStatus } from "./api";
import { ClusterExplorer } from "./clusters";
import { Dashboard } from "./dashboard";
import { LabelingController } from "./labeling";
import { DecisionStore } from "./storage";

export interface AppOptions {
  pollIntervalMs?: number;
}

export class App {
  readonly element: HTMLElement;
  dashboard: Dashboard | null = null;
  labeling: LabelingController | null = null;
  explorer: ClusterExplorer | null = null;
  sessionId: string | null = null;

  private repairButton!: HTMLButtonElement;
  private readonly pollIntervalMs: number;

  constructor(
    private readonly api: SessionApi,
    options: AppOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 2000;
    this.element = document.createElement("main");
    this.element.className = "app";
    this.element.innerHTML = `
      <h1>Cluster repair labeling</h1>
      <form class="session-form">
        <fieldset class="create-fields">
          <legend>Start a session</legend>
          <label>records.csv <input name="records_path" required></label>
          <label>edges.csv <input name="edges_path" required></label>
          <label>gold.csv (optional) <input name="gold_path"></label>
          <label>budget <input name="budget" type="number" value="40" min="1"></label>
          <label>per-iteration <input name="iter_budget" type="number" value="20" min="1"></label>
          <label>k <input name="k" type="number" value="100" min="1"></label>
          <label>seed <input name="seed" type="number" value="0" min="0"></label>
          <label>strategy
            <select name="strategy">
              <option value="bootstrap-ext">bootstrap-ext</option>
              <option value="bootstrap">bootstrap</option>
            </select>
          </label>
          <button type="submit" class="create-session">Create session</button>
        </fieldset>
        <fieldset class="join-fields">
          <legend>or join one</legend>
          <label>session id <input name="session_id"></label>
          <button type="button" class="join-session">Join</button>
        </fieldset>
        <div class="form-error" hidden></div>
      </form>
      <div class="session-view" hidden>
        <div class="dashboard-slot"></div>
        <div class="actions">
          <button type="button" class="trigger-repair" disabled>Repair clusters</button>
          <span class="repair-summary"></span>
        </div>
        <div class="labeling-slot"></div>
        <div class="clusters-slot"></div>
      </div>
    `;
    const form = this.element.querySelector(".session-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createSession(form);
    });
    (this.element.querySelector(".join-session") as HTMLButtonElement).addEventListener(
      "click",
      () => {
        const input = form.elements.namedItem("session_id") as HTMLInputElement;
        if (input.value) void this.openSession(input.value.trim());
      },
    );
    this.repairButton = this.element.querySelector(".trigger-repair") as HTMLButtonElement;
    this.repairButton.addEventListener("click", () => void this.triggerRepair());
  }

  private async createSession(form: HTMLFormElement): Promise<void> {
    const value = (name: string): string =>
      (form.elements.namedItem(name) as HTMLInputElement).value.trim();
    const errorBox = this.element.querySelector(".form-error") as HTMLElement;
    errorBox.hidden = true;
    try {
      const response = await this.api.createSession({
        records_path: value("records_path"),
        edges_path: value("edges_path"),
        gold_path: value("gold_path") || undefined,
        config: {
          budget: Number(value("budget")),
          iter_budget: Number(value("iter_budget")),
          k: Number(value("k")),
          seed: Number(value("seed")),
          strategy: value("strategy"),
        },
      });
      await this.openSession(response.session_id);
    } catch (error) {
      errorBox.hidden = false;
      errorBox.textContent = error instanceof Error ? error.message : String(error);
    }
  }

  async openSession(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    this.dashboard?.stop();
    this.labeling?.stop();

    const view = this.element.querySelector(".session-view") as HTMLElement;
    view.hidden = false;

    const store = new DecisionStore(sessionId);
    this.labeling = new LabelingController(
      this.api,
      sessionId,
      store,
      {},
      this.pollIntervalMs,
    );
    (this.element.querySelector(".labeling-slot") as HTMLElement).replaceChildren(
      this.labeling.element,
    );

    this.explorer = new ClusterExplorer(this.api, sessionId);
    (this.element.querySelector(".clusters-slot") as HTMLElement).replaceChildren(
      this.explorer.element,
    );

    this.dashboard = new Dashboard(
      this.api,
      sessionId,
      (status) => this.onStatus(status),
      this.pollIntervalMs,
    );
    (this.element.querySelector(".dashboard-slot") as HTMLElement).replaceChildren(
      this.dashboard.element,
    );
    this.dashboard.start();
    await this.labeling.loadBatch();
    await this.explorer.load();
  }

  private onStatus(status: SessionStatus): void {
    // repair is available once a model exists: after the first trained batch
    const modelReady = status.iteration > 0 || status.done_labeling;
    this.repairButton.disabled = !modelReady || status.status === "TRAINING";
    if (status.repaired && this.explorer && this.explorer.data === null) {
      void this.explorer.load();
    }
  }

  private async triggerRepair(): Promise<void> {
    if (!this.sessionId) return;
    const summary = this.element.querySelector(".repair-summary") as HTMLElement;
    this.repairButton.disabled = true;
    try {
      const result = await this.api.postRepair(this.sessionId);
      summary.textContent =
        `${result.cluster_count} clusters over ${result.record_count} records` +
        (result.early ? " (repaired before the budget was exhausted)" : "");
      await this.explorer?.load();
    } catch (error) {
      summary.textContent = error instanceof Error ? error.message : String(error);
    } finally {
      this.repairButton.disabled = false;
    }
  }
}

export function mount(root: HTMLElement, baseUrl: string, options: AppOptions = {}): App {
  const app = new App(new SessionApi(baseUrl), options);
  root.replaceChildren(app.element);
  return app;
}
