// Interchange payload types: offset-based layers over a sofa text, with the
// sofa's SHA-256 binding the payload to its exact input.

import { createHash } from "node:crypto";

export interface SpanItem {
  begin: number;
  end: number;
}

export interface ValueItem extends SpanItem {
  value: string;
}

export interface MorphItem extends SpanItem {
  features: Record<string, string>;
  value: string;
}

export interface DependencyItem extends SpanItem {
  governor: [number, number];
  dependent: [number, number];
  type: string;
  flavor: string;
}

export interface EntityItem extends SpanItem {
  label: string;
}

export interface SidecarPayload {
  document_id: string;
  sofa_sha256: string;
  layers: {
    sentences: SpanItem[];
    tokens: SpanItem[];
    lemmas: ValueItem[];
    pos: ValueItem[];
    morph: MorphItem[];
    dependencies: DependencyItem[];
    entities: EntityItem[];
  };
}

export function sha256Utf8(text: string): string {
  return createHash("sha256").update(text, "utf-8").digest("hex");
}

export function canonicalFeatureString(features: Record<string, string>): string {
  return Object.keys(features)
    .sort()
    .map((key) => `${key}=${features[key]}`)
    .join("|");
}

/** Structural validation; throws with the first offending item. */
export function validatePayload(payload: SidecarPayload, sofaLength: number): void {
  const checkSpan = (item: SpanItem, what: string) => {
    if (
      !Number.isInteger(item.begin) ||
      !Number.isInteger(item.end) ||
      item.begin < 0 ||
      item.begin > item.end ||
      item.end > sofaLength
    ) {
      throw new Error(`${what}: bad span [${item.begin},${item.end}) for sofa length ${sofaLength}`);
    }
  };
  const layers = payload.layers;
  layers.sentences.forEach((s, i) => checkSpan(s, `sentence ${i}`));
  layers.tokens.forEach((t, i) => checkSpan(t, `token ${i}`));
  const tokenKeys = new Set(layers.tokens.map((t) => `${t.begin}:${t.end}`));
  const requireToken = (item: SpanItem, what: string) => {
    if (!tokenKeys.has(`${item.begin}:${item.end}`)) {
      throw new Error(`${what} at [${item.begin},${item.end}) matches no token`);
    }
  };
  layers.lemmas.forEach((l, i) => {
    checkSpan(l, `lemma ${i}`);
    requireToken(l, `lemma ${i}`);
    if (!l.value) throw new Error(`lemma ${i} has an empty value`);
  });
  layers.pos.forEach((p, i) => {
    checkSpan(p, `pos ${i}`);
    requireToken(p, `pos ${i}`);
    if (!p.value) throw new Error(`pos ${i} has an empty value`);
  });
  layers.morph.forEach((m, i) => {
    checkSpan(m, `morph ${i}`);
    requireToken(m, `morph ${i}`);
    if (canonicalFeatureString(m.features) !== m.value) {
      throw new Error(`morph ${i}: value ${m.value} is not the canonical form`);
    }
  });
  layers.dependencies.forEach((d, i) => {
    checkSpan(d, `dependency ${i}`);
    requireToken({ begin: d.governor[0], end: d.governor[1] }, `dependency ${i} governor`);
    requireToken({ begin: d.dependent[0], end: d.dependent[1] }, `dependency ${i} dependent`);
    if (!d.type) throw new Error(`dependency ${i} has an empty type`);
  });
  layers.entities.forEach((e, i) => {
    checkSpan(e, `entity ${i}`);
    if (!e.label) throw new Error(`entity ${i} has an empty label`);
  });
  if (
    layers.lemmas.length !== layers.tokens.length ||
    layers.pos.length !== layers.tokens.length
  ) {
    throw new Error(
      `layer counts disagree: ${layers.tokens.length} tokens, ` +
        `${layers.lemmas.length} lemmas, ${layers.pos.length} pos tags`,
    );
  }
}
