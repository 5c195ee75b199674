import { fetchRecords, fetchSummary, setApiBase } from "./api.js";
import { attachDemoPanel } from "./demos.js";
import { openEditor } from "./editor.js";
import { renderQueue } from "./queue.js";
import type { QueueFilters, ReviewStatus } from "./types.js";

declare global {
  interface Window {
    HILMT_API?: string;
  }
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

// window.HILMT_API wins; a page opened straight from disk talks to the
// default local service; anything served over http assumes same origin.
function resolveApiBase(): string {
  if (typeof window.HILMT_API === "string" && window.HILMT_API !== "") {
    return window.HILMT_API;
  }
  if (window.location.protocol === "file:") {
    return "http://127.0.0.1:8080";
  }
  return "";
}

export async function initApp(): Promise<void> {
  console.log("review console starting");
  setApiBase(resolveApiBase());

  const banner = byId<HTMLDivElement>("error-banner");
  const bannerText = byId<HTMLSpanElement>("error-text");
  const retryButton = byId<HTMLButtonElement>("retry-btn");
  const metrics = byId<HTMLDivElement>("metrics");
  const statusFilter = byId<HTMLSelectElement>("status-filter");
  const domainFilter = byId<HTMLInputElement>("domain-filter");
  const refreshButton = byId<HTMLButtonElement>("refresh-btn");
  const queue = byId<HTMLDivElement>("queue");
  const editor = byId<HTMLDivElement>("editor");

  let retryAction: () => void = () => undefined;

  const showError = (message: string, retry: () => void) => {
    bannerText.textContent = message;
    retryAction = retry;
    banner.classList.remove("hidden");
  };
  const hideError = () => {
    banner.classList.add("hidden");
  };
  retryButton.addEventListener("click", () => retryAction());

  const currentFilters = (): QueueFilters => ({
    status: statusFilter.value as ReviewStatus | "",
    domain: domainFilter.value.trim(),
  });

  const loadMetrics = async () => {
    try {
      const summary = await fetchSummary();
      metrics.textContent =
        `records=${summary.records} pending=${summary.pending} ` +
        `reviewed=${summary.reviewed} human_demos=${summary.human_demos} ` +
        `simulated_demos=${summary.simulated_demos}`;
    } catch {
      metrics.textContent = "metrics unavailable";
    }
  };

  const loadQueue = async () => {
    try {
      const items = await fetchRecords(currentFilters());
      hideError();
      renderQueue(queue, items, (item) => {
        openEditor(editor, item, {
          onStored: () => {
            void refreshAll();
          },
          onStale: () => {
            void refreshAll();
          },
        });
      });
    } catch (err) {
      showError(err instanceof Error ? err.message : String(err), () => {
        void refreshAll();
      });
    }
  };

  async function refreshAll(): Promise<void> {
    await Promise.all([loadQueue(), loadMetrics()]);
  }

  refreshButton.addEventListener("click", () => {
    void refreshAll();
  });
  statusFilter.addEventListener("change", () => {
    void loadQueue();
  });
  domainFilter.addEventListener("change", () => {
    void loadQueue();
  });

  attachDemoPanel(
    byId<HTMLInputElement>("demo-query"),
    byId<HTMLInputElement>("demo-domain"),
    byId<HTMLInputElement>("demo-k"),
    byId<HTMLButtonElement>("demo-search-btn"),
    byId<HTMLDivElement>("demo-results"),
  );

  await refreshAll();
  console.log("review console ready");
}
