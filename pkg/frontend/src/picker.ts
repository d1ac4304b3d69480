import type { ModelsList } from "./types.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Start page: one card per model the service offers. */
export function renderPicker(models: ModelsList): HTMLElement {
  const page = el("section", "picker");
  page.appendChild(el("h2", "heading", "choose a study area"));
  const cards = el("ul", "models");
  for (const model of models.models) {
    const card = el("li", "model-card");
    const open = el("button", "open", model.study_area) as HTMLButtonElement;
    open.dataset.model = model.name;
    card.appendChild(open);
    card.appendChild(el("span", "file", model.name));
    card.appendChild(
      el(
        "span",
        "stats",
        `${model.fields} fields, ${model.options} options`,
      ),
    );
    cards.appendChild(card);
  }
  page.appendChild(cards);
  return page;
}
