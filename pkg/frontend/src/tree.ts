import { explain } from "./rules.js";
import { SessionView } from "./view.js";

export interface TreeOptions {
  /** Items flipped by the most recent action; they get the change flash. */
  highlight?: Set<string>;
  /** Items named by a completion report's violations. */
  violations?: Set<string>;
  /** Fields the user folded shut. */
  collapsed?: Set<string>;
  /** While a request is in flight every control is off. */
  busy?: boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function cardinality(view: SessionView, id: string): string | null {
  const counts = view.counts[id];
  if (counts === undefined) {
    return null;
  }
  return `${counts.selected} / ${counts.min}-${counts.max}`;
}

// An undecided option cannot be picked once its field has no room left.
// The service would refuse it anyway; the numbers it sent tell us not to ask.
function maxBlocked(view: SessionView, id: string): boolean {
  const node = view.node(id);
  if (node.parent === null || node.common) {
    return false;
  }
  return view.decision(id).state === "undecided" && view.atMax(node.parent);
}

function renderRow(view: SessionView, id: string, options: TreeOptions): HTMLElement {
  const node = view.node(id);
  const decision = view.decision(id);
  const blocked = maxBlocked(view, id);

  const classes = ["row", `state-${decision.state}`];
  if (options.highlight?.has(id)) {
    classes.push("just-changed");
  }
  if (options.violations?.has(id)) {
    classes.push("violation");
  }
  if (blocked) {
    classes.push("blocked-max");
  }
  const row = el("div", classes.join(" "));

  if (node.children.length > 0) {
    const twist = el("button", "twist", "▾");
    twist.dataset.toggle = id;
    twist.setAttribute("aria-expanded", String(!options.collapsed?.has(id)));
    row.appendChild(twist);
  }

  row.appendChild(el("span", "name", id));
  if (node.common) {
    row.appendChild(el("span", "badge common", "common"));
  }

  const counts = cardinality(view, id);
  if (counts !== null) {
    row.appendChild(el("span", "counts", counts));
  }
  if (view.atMax(id)) {
    row.appendChild(el("span", "badge at-max", "max reached"));
  }

  if (decision.rule !== null) {
    const tag = el("span", "tag", decision.rule === "user" ? "you" : decision.rule);
    tag.title = explain(decision.state, decision.rule, decision.premises);
    row.appendChild(tag);
  }

  const actions = el("span", "actions");
  const pick = el("button", "act select", "pick");
  pick.dataset.act = "select";
  pick.dataset.item = id;
  const drop = el("button", "act exclude", "drop");
  drop.dataset.act = "exclude";
  drop.dataset.item = id;
  const decided = decision.state !== "undecided";
  pick.disabled = Boolean(options.busy) || decided || blocked;
  if (blocked) {
    pick.title = "max reached";
  }
  drop.disabled = Boolean(options.busy) || decided;
  actions.append(pick, drop);
  row.appendChild(actions);
  return row;
}

function renderNode(view: SessionView, id: string, options: TreeOptions): HTMLElement {
  const node = view.node(id);
  const li = el("li", `node kind-${node.kind}`);
  li.dataset.item = id;
  if (options.collapsed?.has(id)) {
    li.classList.add("collapsed");
  }
  li.appendChild(renderRow(view, id, options));
  if (node.children.length > 0) {
    const children = el("ul", "children");
    for (const child of node.children) {
      children.appendChild(renderNode(view, child, options));
    }
    li.appendChild(children);
  }
  return li;
}

/**
 * Draw the whole selection tree.  The layout mirrors the model's parent
 * structure one node per item; everything shown is read straight off the
 * view, which in turn is read straight off the last service response.
 */
export function renderTree(view: SessionView, options: TreeOptions = {}): HTMLElement {
  const tree = el("section", "tree");
  if (options.busy) {
    tree.classList.add("busy");
  }
  const header = el("header", "study-area");
  header.appendChild(el("h2", "title", view.studyArea));
  header.appendChild(el("span", "undecided-count", `${view.undecided} to decide`));
  tree.appendChild(header);

  const roots = el("ul", "roots");
  for (const id of view.roots) {
    roots.appendChild(renderNode(view, id, options));
  }
  tree.appendChild(roots);
  return tree;
}
