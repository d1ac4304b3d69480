import type {
  ChangedItem,
  DeltaView,
  FieldCounts,
  ItemKind,
  ItemState,
  StateView,
} from "./types.js";

/** Structure of one item; fixed for the lifetime of a session. */
export interface NodeMeta {
  id: string;
  kind: ItemKind;
  common: boolean;
  parent: string | null;
  min: number | null;
  max: number | null;
  children: string[];
}

export interface Decision {
  state: ItemState;
  rule: string | null;
  premises: string[];
}

/**
 * Everything the tree needs to draw itself, assembled purely from
 * service responses.  `fromState` swallows a full state view; `withDelta`
 * folds an action response into a copy.  Nothing in here decides an item:
 * decisions only ever arrive from the wire.
 */
export class SessionView {
  private constructor(
    readonly session: string,
    readonly model: string,
    readonly studyArea: string,
    readonly meta: ReadonlyMap<string, NodeMeta>,
    readonly order: readonly string[],
    readonly roots: readonly string[],
    readonly decisions: ReadonlyMap<string, Decision>,
    readonly counts: Record<string, FieldCounts>,
    readonly undecided: number,
  ) {}

  static fromState(state: StateView): SessionView {
    const meta = new Map<string, NodeMeta>();
    const decisions = new Map<string, Decision>();
    const order: string[] = [];
    const roots: string[] = [];
    for (const [id, item] of Object.entries(state.items)) {
      order.push(id);
      if (item.parent === null) {
        roots.push(id);
      }
      meta.set(id, {
        id,
        kind: item.kind,
        common: item.common,
        parent: item.parent,
        min: item.min,
        max: item.max,
        children: item.children,
      });
      decisions.set(id, {
        state: item.state,
        rule: item.rule,
        premises: item.premises,
      });
    }
    return new SessionView(
      state.session,
      state.model,
      state.study_area,
      meta,
      order,
      roots,
      decisions,
      state.counts,
      state.undecided,
    );
  }

  withDelta(delta: DeltaView): SessionView {
    const decisions = new Map(this.decisions);
    for (const change of delta.changed) {
      decisions.set(change.item, {
        state: change.state,
        rule: change.rule,
        premises: change.premises,
      });
    }
    return new SessionView(
      this.session,
      this.model,
      this.studyArea,
      this.meta,
      this.order,
      this.roots,
      decisions,
      delta.counts,
      delta.undecided,
    );
  }

  decision(id: string): Decision {
    const found = this.decisions.get(id);
    if (!found) {
      throw new Error(`no such item: ${id}`);
    }
    return found;
  }

  node(id: string): NodeMeta {
    const found = this.meta.get(id);
    if (!found) {
      throw new Error(`no such item: ${id}`);
    }
    return found;
  }

  /** Field is at its maximum when the service-reported count says so. */
  atMax(fieldId: string): boolean {
    const counts = this.counts[fieldId];
    return counts !== undefined && counts.selected >= counts.max;
  }
}

/** Items touched by the last action, for the change flash. */
export function changedIds(delta: DeltaView): Set<string> {
  return new Set(delta.changed.map((change: ChangedItem) => change.item));
}
