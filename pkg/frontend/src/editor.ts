import { ApiError, previewInstructions, submitFeedback } from "./api.js";
import type { ReviewItem, StoredDemo } from "./types.js";

export interface EditorCallbacks {
  onStored: (demo: StoredDemo) => void;
  // queue state changed under us (already reviewed / item gone); caller reloads
  onStale: () => void;
}

function pane(label: string, text: string | null): HTMLElement {
  const box = document.createElement("div");
  box.className = "pane";
  const head = document.createElement("h3");
  head.textContent = label;
  const body = document.createElement("p");
  body.textContent = text === null ? "(none)" : text;
  box.appendChild(head);
  box.appendChild(body);
  return box;
}

function renderInstructionList(list: HTMLOListElement, instructions: string[]): void {
  list.textContent = "";
  if (instructions.length === 0) {
    const none = document.createElement("li");
    none.className = "no-changes";
    none.textContent = "(no changes: the correction matches the current translation)";
    list.appendChild(none);
    return;
  }
  for (const instruction of instructions) {
    const entry = document.createElement("li");
    entry.textContent = instruction;
    list.appendChild(entry);
  }
}

/** Replace the editor container's contents with a post-edit form for one item. */
export function openEditor(container: HTMLElement, item: ReviewItem, callbacks: EditorCallbacks): void {
  container.textContent = "";

  const head = document.createElement("div");
  head.className = "item-head";
  head.textContent = `${item.id} [${item.domain}] ${item.status}`;
  container.appendChild(head);

  const panes = document.createElement("div");
  panes.className = "side-by-side";
  panes.appendChild(pane("source", item.source));
  panes.appendChild(pane("draft", item.draft));
  panes.appendChild(pane("refined", item.refined));
  container.appendChild(panes);

  const editLabel = document.createElement("label");
  editLabel.textContent = "corrected translation";
  const textarea = document.createElement("textarea");
  textarea.id = "post-edit";
  textarea.rows = 3;
  textarea.value = item.final;
  container.appendChild(editLabel);
  container.appendChild(textarea);

  const noteLabel = document.createElement("label");
  noteLabel.textContent = "reviewer note (optional)";
  const noteInput = document.createElement("input");
  noteInput.id = "reviewer-note";
  container.appendChild(noteLabel);
  container.appendChild(noteInput);

  const previewHead = document.createElement("h3");
  previewHead.textContent = "instruction preview";
  const previewList = document.createElement("ol");
  previewList.id = "preview-list";
  container.appendChild(previewHead);
  container.appendChild(previewList);

  const submitButton = document.createElement("button");
  submitButton.type = "button";
  submitButton.id = "submit-btn";
  submitButton.textContent = "store correction";
  container.appendChild(submitButton);

  const status = document.createElement("div");
  status.id = "editor-status";
  container.appendChild(status);

  const confirmation = document.createElement("div");
  confirmation.id = "confirmation";
  container.appendChild(confirmation);

  let previewSeq = 0;
  let inFlight = false;

  const refreshControls = () => {
    submitButton.disabled = inFlight || textarea.value.trim() === "";
  };

  const refreshPreview = () => {
    // sequence counter: responses for an older buffer are dropped, so the
    // rendered preview always matches the current contents
    const seq = ++previewSeq;
    previewInstructions(item.final, textarea.value).then(
      (instructions) => {
        if (seq !== previewSeq) {
          return;
        }
        renderInstructionList(previewList, instructions);
      },
      () => {
        if (seq !== previewSeq) {
          return;
        }
        previewList.textContent = "";
        const err = document.createElement("li");
        err.className = "preview-error";
        err.textContent = "(preview unavailable)";
        previewList.appendChild(err);
      },
    );
  };

  const showConfirmation = (demo: StoredDemo) => {
    confirmation.textContent = "";
    const note = document.createElement("p");
    note.textContent = `stored ${demo.id} provenance=${demo.provenance}`;
    const storedList = document.createElement("ol");
    storedList.className = "stored-instructions";
    renderInstructionList(storedList, demo.feedback);
    confirmation.appendChild(note);
    confirmation.appendChild(storedList);
  };

  async function submit(): Promise<void> {
    if (inFlight || textarea.disabled) {
      return; // double-click guard: one request per submission
    }
    const postEdit = textarea.value;
    if (postEdit.trim() === "") {
      return;
    }
    inFlight = true;
    refreshControls();
    status.textContent = "storing...";
    try {
      const note = noteInput.value.trim();
      const demo = await submitFeedback(item.id, postEdit, note === "" ? undefined : note);
      status.textContent = "";
      textarea.disabled = true;
      noteInput.disabled = true;
      showConfirmation(demo);
      callbacks.onStored(demo);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        status.textContent = "already reviewed";
        callbacks.onStale();
      } else if (err instanceof ApiError && err.status === 404) {
        status.textContent = "item no longer exists; refreshing the queue";
        callbacks.onStale();
      } else {
        status.textContent = err instanceof Error ? err.message : String(err);
      }
    } finally {
      inFlight = false;
      // stay disabled after a successful store; the item is reviewed now
      if (!textarea.disabled) {
        refreshControls();
      }
    }
  }

  textarea.addEventListener("input", () => {
    refreshControls();
    refreshPreview();
  });
  submitButton.addEventListener("click", () => {
    void submit();
  });

  refreshControls();
  refreshPreview();
}
