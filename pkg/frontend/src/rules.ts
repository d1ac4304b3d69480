// Display text for the rule tags the service attaches to derived
// decisions.  The engine owns the semantics; this table only says, in
// student words, why an item flipped.  Labels go on the tag chips,
// blurbs into tooltips and the conflict dialog.

export interface RuleText {
  label: string;
  blurb: string;
}

export const RULE_TEXT: Record<string, RuleText> = {
  R1: {
    label: "needed by your choice",
    blurb: "an option you picked only works together with this option",
  },
  R2: {
    label: "ruled out by an option",
    blurb: "this option cannot be combined with an option that is in the pathway",
  },
  R3: {
    label: "field needed by an option",
    blurb: "an option in the pathway needs this whole field as well",
  },
  R4: {
    label: "field ruled out by an option",
    blurb: "an option in the pathway cannot be combined with this field",
  },
  R5: {
    label: "needed by another field",
    blurb: "a field in the pathway brings this field with it",
  },
  R6: {
    label: "fields exclude each other",
    blurb: "this field cannot be combined with a field that is in the pathway",
  },
  R7: {
    label: "carries its field",
    blurb: "picking an option puts the field it belongs to into the pathway",
  },
  R8: {
    label: "only candidate left",
    blurb:
      "every other option of this field is out, so this one has to fill the minimum",
  },
  R9: {
    label: "field dropped out",
    blurb: "when a field leaves the pathway all of its options leave too",
  },
  R10: {
    label: "core part of its field",
    blurb: "this option is marked common, every pathway through its field takes it",
  },
  R11: {
    label: "part of every pathway",
    blurb: "marked common at the top level, no pathway can leave it out",
  },
  R12: {
    label: "no room left",
    blurb: "the field already has as many picked options as it allows",
  },
  R13: {
    label: "too few picked",
    blurb: "the field needs more picked options before the pathway is complete",
  },
};

// Tags that are not deduction rules but show up in the same places.
export const EXTRA_TEXT: Record<string, RuleText> = {
  user: { label: "your choice", blurb: "you decided this one yourself" },
  init: { label: "starting point", blurb: "decided before the first action" },
  incomplete: {
    label: "still undecided",
    blurb: "some items have no decision yet",
  },
};

export function ruleText(tag: string): RuleText {
  const known = RULE_TEXT[tag] ?? EXTRA_TEXT[tag];
  return known ?? { label: tag, blurb: "" };
}

/** Tooltip line for a derived decision, e.g. `forced by R1 (needed by your choice)`. */
export function explain(state: string, rule: string, premises: string[]): string {
  const { label } = ruleText(rule);
  const verb =
    rule === "user"
      ? state === "selected"
        ? "picked by you"
        : "excluded by you"
      : state === "selected"
        ? `forced by ${rule} (${label})`
        : `blocked by ${rule} (${label})`;
  return premises.length > 0 ? `${verb}, because of: ${premises.join(", ")}` : verb;
}
