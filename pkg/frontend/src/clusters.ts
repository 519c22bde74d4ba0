/** Cluster explorer: repaired clusters with sizes; drilling into one shows
 * its member records and the non-match edges among them. Empty state until
 * a repair has run. */

import { SessionApi } from "./api";
import type { ClustersResponse } from "./api";

export class ClusterExplorer {
  readonly element: HTMLElement;
  data: ClustersResponse | null = null;

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
  ) {
    this.element = document.createElement("section");
    this.element.className = "cluster-explorer";
    this.element.innerHTML = `
      <h2>Repaired clusters</h2>
      <div class="empty-state">No repair has run yet.</div>
      <ul class="cluster-list" hidden></ul>
      <div class="cluster-detail" hidden></div>
    `;
  }

  async load(): Promise<void> {
    this.render(await this.api.getClusters(this.sessionId));
  }

  render(data: ClustersResponse): void {
    this.data = data;
    const empty = this.element.querySelector(".empty-state") as HTMLElement;
    const list = this.element.querySelector(".cluster-list") as HTMLElement;
    const detail = this.element.querySelector(".cluster-detail") as HTMLElement;
    if (!data.repaired) {
      empty.hidden = false;
      list.hidden = true;
      detail.hidden = true;
      return;
    }
    empty.hidden = true;
    list.hidden = false;
    list.innerHTML = "";
    for (const cluster of data.clusters) {
      const item = document.createElement("li");
      item.className = "cluster-row";
      item.dataset.clusterId = String(cluster.cluster_id);
      item.innerHTML = `<button type="button" class="cluster-open">cluster ${cluster.cluster_id}</button> <span class="cluster-size">${cluster.records.length} record(s)</span>`;
      item
        .querySelector(".cluster-open")!
        .addEventListener("click", () => this.showDetail(cluster.cluster_id));
      list.appendChild(item);
    }
  }

  showDetail(clusterId: number): void {
    if (!this.data) return;
    const cluster = this.data.clusters.find((c) => c.cluster_id === clusterId);
    if (!cluster) return;
    const members = new Set(cluster.records);
    const cutEdges = this.data.non_match_edges.filter(
      ([u, v]) => members.has(u) || members.has(v),
    );
    const detail = this.element.querySelector(".cluster-detail") as HTMLElement;
    detail.hidden = false;
    detail.innerHTML = `
      <h3>cluster ${cluster.cluster_id}</h3>
      <ul class="member-list">
        ${cluster.records.map((r) => `<li>${escapeHtml(r)}</li>`).join("")}
      </ul>
      <h4>non-match edges touching this cluster</h4>
      <ul class="non-match-list">
        ${
          cutEdges.length
            ? cutEdges
                .map(([u, v]) => `<li>${escapeHtml(u)} ✗ ${escapeHtml(v)}</li>`)
                .join("")
            : "<li class='none'>none</li>"
        }
      </ul>
    `;
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
