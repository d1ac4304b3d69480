import {
  ActionRejection,
  Api,
  ConflictRejection,
  ServiceUnreachable,
} from "./api.js";
import { renderConflict } from "./conflict.js";
import { renderPicker } from "./picker.js";
import { offendingItems, renderReport } from "./report.js";
import { renderTree } from "./tree.js";
import type { DeltaView, ModelsList } from "./types.js";
import { changedIds, SessionView } from "./view.js";

interface Banner {
  message: string;
  retry: (() => void) | null;
}

/**
 * Wiring between the service client and the renderers.  One request at a
 * time: every control is dead while a call is out, and whatever the
 * service answers is the next thing on screen.
 */
export class App {
  private view: SessionView | null = null;
  private models: ModelsList | null = null;
  private highlight = new Set<string>();
  private violations = new Set<string>();
  private collapsed = new Set<string>();
  private overlay: HTMLElement | null = null;
  private banner: Banner | null = null;
  private busy = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: Api = new Api(),
  ) {
    root.addEventListener("click", (event) => this.onClick(event));
  }

  async start(): Promise<void> {
    await this.run(async () => {
      this.models = await this.api.listModels();
    });
  }

  private onClick(event: Event): void {
    const target = event.target;
    if (!(target instanceof HTMLElement)) {
      return;
    }
    const act = target.dataset.act;
    const item = target.dataset.item;
    const toggle = target.dataset.toggle;
    const model = target.dataset.model;

    if (toggle !== undefined) {
      if (this.collapsed.has(toggle)) {
        this.collapsed.delete(toggle);
      } else {
        this.collapsed.add(toggle);
      }
      this.render();
      return;
    }
    if (act === "dismiss") {
      this.overlay = null;
      this.render();
      return;
    }
    if (act === "dismiss-banner") {
      this.banner = null;
      this.render();
      return;
    }
    if (act === "retry") {
      const retry = this.banner?.retry;
      this.banner = null;
      if (retry) {
        retry();
      } else {
        this.render();
      }
      return;
    }
    if (this.busy) {
      return;
    }
    if (model !== undefined) {
      void this.openSession(model);
      return;
    }
    if (act === "select" && item !== undefined) {
      void this.applyAction(() => this.api.select(this.session(), item));
      return;
    }
    if (act === "exclude" && item !== undefined) {
      void this.applyAction(() => this.api.exclude(this.session(), item));
      return;
    }
    if (act === "undo") {
      void this.applyAction(() => this.api.undo(this.session()));
      return;
    }
    if (act === "complete") {
      void this.run(async () => {
        const report = await this.api.complete(this.session());
        this.violations = offendingItems(report);
        this.overlay = renderReport(report);
      });
      return;
    }
    if (act === "leave") {
      this.view = null;
      this.overlay = null;
      this.highlight.clear();
      this.violations.clear();
      this.collapsed.clear();
      void this.start();
    }
  }

  private session(): string {
    if (!this.view) {
      throw new Error("no session open");
    }
    return this.view.session;
  }

  private async openSession(model: string): Promise<void> {
    await this.run(async () => {
      const created = await this.api.createSession(model);
      const state = await this.api.getState(created.session);
      this.view = SessionView.fromState(state);
      this.highlight.clear();
      this.violations.clear();
      this.collapsed.clear();
    });
  }

  private async applyAction(call: () => Promise<DeltaView>): Promise<void> {
    await this.run(async () => {
      const delta = await call();
      this.view = this.view!.withDelta(delta);
      this.highlight = changedIds(delta);
    });
  }

  // Busy gate and error sorting.  Conflicts become the dialog, domain
  // rejections a plain notice, anything transport-shaped a retry banner.
  private async run(operation: () => Promise<void>): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    this.render();
    try {
      await operation();
      this.violations.clear();
      this.banner = null;
    } catch (failure) {
      if (failure instanceof ConflictRejection) {
        this.overlay = renderConflict(failure.body);
      } else if (failure instanceof ActionRejection) {
        this.banner = { message: `${failure.code}: ${failure.message}`, retry: null };
      } else if (failure instanceof ServiceUnreachable) {
        this.banner = {
          message: failure.message,
          retry: () => void this.run(operation),
        };
      } else {
        throw failure;
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private render(): void {
    this.root.textContent = "";

    if (this.banner) {
      const bar = document.createElement("div");
      bar.className = "banner";
      const message = document.createElement("span");
      message.className = "message";
      message.textContent = this.banner.message;
      bar.appendChild(message);
      if (this.banner.retry) {
        const retry = document.createElement("button");
        retry.dataset.act = "retry";
        retry.textContent = "try again";
        bar.appendChild(retry);
      }
      const dismiss = document.createElement("button");
      dismiss.dataset.act = "dismiss-banner";
      dismiss.textContent = "dismiss";
      bar.appendChild(dismiss);
      this.root.appendChild(bar);
    }

    if (!this.view) {
      if (this.models) {
        this.root.appendChild(renderPicker(this.models));
      }
      return;
    }

    const toolbar = document.createElement("nav");
    toolbar.className = "toolbar";
    const title = document.createElement("span");
    title.className = "session-name";
    title.textContent = `${this.view.model} · ${this.view.session}`;
    toolbar.appendChild(title);
    for (const [act, label] of [
      ["undo", "undo"],
      ["complete", "check completion"],
      ["leave", "start over"],
    ] as const) {
      const button = document.createElement("button");
      button.dataset.act = act;
      button.textContent = label;
      button.disabled = this.busy;
      toolbar.appendChild(button);
    }
    this.root.appendChild(toolbar);

    this.root.appendChild(
      renderTree(this.view, {
        highlight: this.highlight,
        violations: this.violations,
        collapsed: this.collapsed,
        busy: this.busy,
      }),
    );

    if (this.overlay) {
      this.root.appendChild(this.overlay);
    }
  }
}

const mount = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mount) {
  const app = new App(mount);
  void app.start();
}
