import { ruleText } from "./rules.js";
import type { CompletionReport } from "./types.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Every item a report points at, for highlighting in the tree. */
export function offendingItems(report: CompletionReport): Set<string> {
  const items = new Set<string>();
  for (const violation of report.violations) {
    for (const item of violation.items) {
      items.add(item);
    }
  }
  for (const conflict of report.conflicts) {
    items.add(conflict.item);
  }
  return items;
}

/**
 * Panel for the completion check: a green all-clear, or the list of
 * everything that still stands in the way.
 */
export function renderReport(report: CompletionReport): HTMLElement {
  const panel = el("aside", report.ok ? "report ok" : "report not-ok");

  if (report.ok) {
    panel.appendChild(el("h2", "heading", "✓ pathway complete"));
    panel.appendChild(
      el("p", "note", "every field is settled and every requirement holds"),
    );
  } else {
    panel.appendChild(el("h2", "heading", "not a valid pathway yet"));
    const list = el("ul", "violations");
    for (const violation of report.violations) {
      const entry = el("li", "violation");
      const tag = el("span", "tag", violation.rule);
      tag.title = ruleText(violation.rule).blurb;
      entry.appendChild(tag);
      entry.appendChild(el("span", "label", ruleText(violation.rule).label));
      entry.appendChild(el("p", "message", violation.message));
      if (violation.items.length > 0) {
        entry.appendChild(el("p", "items", violation.items.join(", ")));
      }
      list.appendChild(entry);
    }
    panel.appendChild(list);
    if (report.conflicts.length > 0) {
      panel.appendChild(
        el("p", "note", `${report.conflicts.length} item(s) are torn both ways`),
      );
    }
  }

  const dismiss = el("button", "dismiss", "close") as HTMLButtonElement;
  dismiss.dataset.act = "dismiss";
  panel.appendChild(dismiss);
  return panel;
}
