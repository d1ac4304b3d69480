import { explain, ruleText } from "./rules.js";
import type { ConflictBody, DerivationChain } from "./types.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function chainLine(kind: "for" | "against", chain: DerivationChain): HTMLElement {
  const line = el("li", `chain ${kind}`);
  const wants = kind === "for" ? "must be in the pathway" : "must stay out";
  line.appendChild(el("span", "wants", wants));
  const tag = el("span", "tag", chain.rule === "user" ? "you" : chain.rule);
  tag.title = ruleText(chain.rule).blurb;
  line.appendChild(tag);
  line.appendChild(el("span", "why", explain(chain.state, chain.rule, chain.premises)));
  return line;
}

/**
 * Dialog for a 409 response.  The service already rolled the action back,
 * so the tree behind the dialog still shows the state before the click;
 * this only explains why the click could not stand.
 */
export function renderConflict(body: ConflictBody): HTMLElement {
  const backdrop = el("div", "backdrop");
  const dialog = el("div", "dialog conflict");
  dialog.setAttribute("role", "dialog");
  dialog.setAttribute("aria-modal", "true");

  dialog.appendChild(el("h2", "heading", "That choice contradicts itself"));
  dialog.appendChild(el("p", "message", body.error.message));

  const focus = el("div", "focus");
  focus.appendChild(el("h3", "item", body.error.item));
  const chains = el("ul", "chains");
  chains.appendChild(chainLine("for", body.error.selected_by));
  chains.appendChild(chainLine("against", body.error.notselected_by));
  focus.appendChild(chains);
  dialog.appendChild(focus);

  const rest = body.error.conflicts.filter((c) => c.item !== body.error.item);
  if (rest.length > 0) {
    const more = el("div", "more");
    more.appendChild(el("h3", "heading", "also torn both ways"));
    const list = el("ul", "conflict-list");
    for (const conflict of rest) {
      const entry = el("li", "entry");
      entry.appendChild(el("h4", "item", conflict.item));
      const chains = el("ul", "chains");
      chains.appendChild(chainLine("for", conflict.selected_by));
      chains.appendChild(chainLine("against", conflict.notselected_by));
      entry.appendChild(chains);
      list.appendChild(entry);
    }
    more.appendChild(list);
    dialog.appendChild(more);
  }

  const dismiss = el("button", "dismiss", "back to the pathway") as HTMLButtonElement;
  dismiss.dataset.act = "dismiss";
  dialog.appendChild(dismiss);
  backdrop.appendChild(dialog);
  return backdrop;
}
