// Wire shapes of the /api/v1 endpoints.  The UI renders these verbatim;
// it never derives a selection state on its own.

export type ItemState = "selected" | "notselected" | "undecided";

export type ItemKind = "field" | "option" | "field_and_option";

/** One tree node as the service reports it inside a full state view. */
export interface ItemView {
  id: string;
  kind: ItemKind;
  common: boolean;
  parent: string | null;
  min: number | null;
  max: number | null;
  children: string[];
  state: ItemState;
  rule: string | null;
  premises: string[];
}

export interface FieldCounts {
  selected: number;
  min: number;
  max: number;
}

export interface StateView {
  session: string;
  model: string;
  study_area: string;
  items: Record<string, ItemView>;
  counts: Record<string, FieldCounts>;
  undecided: number;
  history: number;
  created_at: string;
  updated_at: string;
}

/** One entry of a delta's `changed` list. */
export interface ChangedItem {
  item: string;
  state: ItemState;
  rule: string | null;
  premises: string[];
}

export interface DeltaView {
  session: string;
  action: "select" | "exclude" | "undo";
  item?: string;
  changed: ChangedItem[];
  counts: Record<string, FieldCounts>;
  undecided: number;
  updated_at: string;
}

export interface SessionCreated {
  session: string;
  model: string;
  study_area: string;
  created_at: string;
  updated_at: string;
  undecided: number;
  history: number;
}

export interface ModelSummary {
  name: string;
  study_area: string;
  items: number;
  fields: number;
  options: number;
}

export interface ModelsList {
  models: ModelSummary[];
}

/** How a rule arrived at a decision for one item. */
export interface DerivationChain {
  item: string;
  state: ItemState;
  rule: string;
  premises: string[];
}

export interface ConflictEntry {
  item: string;
  selected_by: DerivationChain;
  notselected_by: DerivationChain;
}

/** Body of a 409 response: the action was rolled back. */
export interface ConflictBody {
  error: {
    code: "Conflict";
    message: string;
    item: string;
    selected_by: DerivationChain;
    notselected_by: DerivationChain;
    conflicts: ConflictEntry[];
  };
}

export interface ErrorBody {
  error: {
    code: string;
    message: string;
  };
}

export interface Violation {
  rule: string;
  items: string[];
  message: string;
}

export interface CompletionReport {
  session: string;
  ok: boolean;
  violations: Violation[];
  conflicts: ConflictEntry[];
}
