import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const INDEX_HTML = join(dirname(fileURLToPath(import.meta.url)), "..", "index.html");

// Inject the real page skeleton (minus its module script) so tests cannot
// drift from the markup the browser actually loads.
export function loadPageSkeleton(): void {
  const html = readFileSync(INDEX_HTML, "utf-8");
  const start = html.indexOf("<body>") + "<body>".length;
  const end = html.indexOf("</body>");
  document.body.innerHTML = html.slice(start, end).replace(/<script[\s\S]*?<\/script>/g, "");
}
