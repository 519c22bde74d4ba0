/** Scripted end-to-end round trip against the real labeling service:
 * create a session with budget 40 through the UI form, answer two batches
 * of 20 by clicking cards, trigger repair, then verify over the raw API
 * that the training set holds exactly 40 labels and clusters are
 * retrievable. */

import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { mount } from "../src/app";
import type { App } from "../src/app";
import { startService, until, type LiveService } from "./helpers/service";

let service: LiveService;

beforeAll(async () => {
  service = await startService();
}, 120000);

afterAll(() => {
  service?.stop();
});

function fillInput(form: HTMLFormElement, name: string, value: string): void {
  const input = form.elements.namedItem(name) as HTMLInputElement;
  input.value = value;
}

async function currentCards(app: App) {
  return until(
    () => app.labeling!.cards.filter((c) => !c.submitted),
    (cards) => cards.length > 0,
  );
}

function answerCards(app: App, gold: Record<string, string>): number {
  let answered = 0;
  for (const card of app.labeling!.cards) {
    if (card.submitted || card.decision !== null) continue;
    const a = card.question.record_a.record_id;
    const b = card.question.record_b.record_id;
    const selector =
      gold[a] === gold[b] ? ".decide-match" : ".decide-non-match";
    (card.element.querySelector(selector) as HTMLButtonElement).click();
    answered += 1;
  }
  return answered;
}

describe("labeling UI round trip", () => {
  it("labels two batches of 20, repairs, and the service agrees", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const app = mount(document.getElementById("app")!, service.baseUrl, {
      pollIntervalMs: 100,
    });

    // create a budget-40 session through the form
    const form = app.element.querySelector(".session-form") as HTMLFormElement;
    fillInput(form, "records_path", join(service.datasetDir, "records.csv"));
    fillInput(form, "edges_path", join(service.datasetDir, "edges.csv"));
    fillInput(form, "budget", "40");
    fillInput(form, "iter_budget", "20");
    fillInput(form, "k", "10");
    fillInput(form, "seed", "5");
    (app.element.querySelector(".create-session") as HTMLButtonElement).click();

    await until(
      () => app.sessionId,
      (sid) => sid !== null,
    );
    const sessionId = app.sessionId!;

    // batch 1: twenty cards, answered from the gold standard by clicking
    let cards = await currentCards(app);
    expect(cards).toHaveLength(20);
    expect(answerCards(app, service.gold)).toBe(20);
    const submit = app.labeling!.element.querySelector(
      ".submit-batch",
    ) as HTMLButtonElement;
    expect(submit.disabled).toBe(false);
    submit.click();

    // wait for training to finish and batch 2 to arrive
    await until(
      () => app.labeling!.cards.filter((c) => !c.submitted),
      (fresh) => fresh.length === 20 && fresh[0].decision === null,
    );
    expect(answerCards(app, service.gold)).toBe(20);
    (app.labeling!.element.querySelector(".submit-batch") as HTMLButtonElement).click();

    // the service must reach DONE with the budget exhausted
    const done = await until(
      async () => {
        const r = await fetch(`${service.baseUrl}/sessions/${sessionId}/status`);
        return (await r.json()) as { status: string; labeled: number };
      },
      (s) => s.status === "DONE",
    );
    expect(done.labeled).toBe(40);

    // repair through the UI and wait for the summary
    await until(
      () => (app.element.querySelector(".trigger-repair") as HTMLButtonElement).disabled,
      (disabled) => disabled === false,
    );
    (app.element.querySelector(".trigger-repair") as HTMLButtonElement).click();
    await until(
      () => app.element.querySelector(".repair-summary")!.textContent ?? "",
      (text) => text.includes("clusters"),
    );

    // verify through the raw API: |T| = 40 and clusters retrievable
    const status = (await (
      await fetch(`${service.baseUrl}/sessions/${sessionId}/status`)
    ).json()) as { labeled: number; repaired: boolean };
    expect(status.labeled).toBe(40);
    expect(status.repaired).toBe(true);

    const clusters = (await (
      await fetch(`${service.baseUrl}/sessions/${sessionId}/clusters`)
    ).json()) as { repaired: boolean; clusters: { records: string[] }[] };
    expect(clusters.repaired).toBe(true);
    expect(clusters.clusters.length).toBeGreaterThan(0);
    const total = clusters.clusters.reduce((n, c) => n + c.records.length, 0);
    expect(total).toBeGreaterThan(0);

    // the explorer shows the repaired clusters with sizes
    const rows = app.explorer!.element.querySelectorAll(".cluster-row");
    expect(rows.length).toBe(clusters.clusters.length);

    app.dashboard?.stop();
    app.labeling?.stop();
  }, 120000);
});
