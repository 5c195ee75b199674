import type { ReviewItem } from "./types.js";

// The service already orders items newest-first; render in the order given.
export function renderQueue(
  container: HTMLElement,
  items: ReviewItem[],
  onSelect: (item: ReviewItem) => void,
): void {
  container.textContent = "";
  if (items.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No review items.";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "queue-list";
  for (const item of items) {
    const row = document.createElement("li");
    row.className = "queue-row";
    row.dataset.id = item.id;

    const head = document.createElement("div");
    head.className = "queue-head";
    head.textContent = `${item.id} [${item.domain}] ${item.status}`;

    const source = document.createElement("div");
    source.className = "queue-source";
    source.textContent = item.source;

    const button = document.createElement("button");
    button.type = "button";
    button.className = "review-btn";
    button.textContent = "review";
    button.addEventListener("click", () => onSelect(item));

    row.appendChild(head);
    row.appendChild(source);
    row.appendChild(button);
    list.appendChild(row);
  }
  container.appendChild(list);
}
