import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

// The recorded fixtures live with the Python package; both test suites
// read the same bytes so the two sides cannot drift apart silently.
export function loadFixture<T>(name: string): T {
  const here = dirname(fileURLToPath(import.meta.url));
  const path = join(here, "..", "..", "fixtures", "session", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

/**
 * Indented outline of a DOM subtree for snapshots: one line per element,
 * attributes in name order, text leaves quoted.  Stable against
 * formatting noise in outerHTML.
 */
export function pretty(node: Node, depth = 0): string {
  const pad = "  ".repeat(depth);
  if (node.nodeType === 3) {
    const text = (node.textContent ?? "").trim();
    return text === "" ? "" : `${pad}"${text}"\n`;
  }
  if (!(node instanceof Element)) {
    return "";
  }
  const attrs = Array.from(node.attributes)
    .map((a) => ` ${a.name}=${JSON.stringify(a.value)}`)
    .sort()
    .join("");
  let out = `${pad}<${node.tagName.toLowerCase()}${attrs}>\n`;
  for (const child of Array.from(node.childNodes)) {
    out += pretty(child, depth + 1);
  }
  return out;
}
