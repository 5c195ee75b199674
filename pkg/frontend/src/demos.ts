import { searchDemos } from "./api.js";
import type { DemoHit } from "./types.js";

function field(list: HTMLDListElement, label: string, value: string): void {
  const term = document.createElement("dt");
  term.textContent = label;
  const detail = document.createElement("dd");
  detail.textContent = value;
  list.appendChild(term);
  list.appendChild(detail);
}

export function renderDemoHits(container: HTMLElement, hits: DemoHit[]): void {
  container.textContent = "";
  if (hits.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No demonstrations matched.";
    container.appendChild(empty);
    return;
  }
  for (const hit of hits) {
    const block = document.createElement("div");
    block.className = "demo-hit";
    block.dataset.id = hit.id;

    const scores = document.createElement("div");
    scores.className = "scores";
    const recall = hit.recall === null ? "n/a" : hit.recall.toFixed(4);
    scores.textContent = `bm25=${hit.bm25.toFixed(4)} recall=${recall} provenance=${hit.provenance}`;
    block.appendChild(scores);

    const fields = document.createElement("dl");
    field(fields, "<input>", hit.source);
    field(fields, "<hypothesis>", hit.hypothesis);
    field(fields, "<reference>", hit.reference);
    const revisionTerm = document.createElement("dt");
    revisionTerm.textContent = "<revision>";
    const revisionDetail = document.createElement("dd");
    if (hit.feedback.length === 0) {
      revisionDetail.textContent = "(none)";
    } else {
      const steps = document.createElement("ol");
      for (const instruction of hit.feedback) {
        const step = document.createElement("li");
        step.textContent = instruction;
        steps.appendChild(step);
      }
      revisionDetail.appendChild(steps);
    }
    fields.appendChild(revisionTerm);
    fields.appendChild(revisionDetail);
    block.appendChild(fields);

    container.appendChild(block);
  }
}

/** Wire the demonstration search panel; the button stays disabled while the query is empty. */
export function attachDemoPanel(
  queryInput: HTMLInputElement,
  domainInput: HTMLInputElement,
  kInput: HTMLInputElement,
  button: HTMLButtonElement,
  results: HTMLElement,
): void {
  const refresh = () => {
    button.disabled = queryInput.value.trim() === "";
  };
  queryInput.addEventListener("input", refresh);
  refresh();

  button.addEventListener("click", async () => {
    const query = queryInput.value.trim();
    if (query === "") {
      return;
    }
    const k = parseInt(kInput.value, 10);
    try {
      const hits = await searchDemos(
        query,
        domainInput.value.trim(),
        Number.isFinite(k) && k > 0 ? k : undefined,
      );
      renderDemoHits(results, hits);
    } catch (err) {
      results.textContent = "";
      const failure = document.createElement("p");
      failure.className = "search-error";
      failure.textContent = err instanceof Error ? err.message : String(err);
      results.appendChild(failure);
    }
  });
}
