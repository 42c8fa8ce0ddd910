// Deterministic rule-and-lexicon German pipeline. Tag values are opaque to
// consumers; the contract is structural: offsets index the sofa as Unicode
// code points, one lemma and one pos per token.

import {
  ABBREVIATIONS,
  CLOSED_CLASS,
  FIRST_NAMES,
  IRREGULAR_LEMMAS,
  KNOWN_PLACES,
} from "./lexicon.js";
import {
  DependencyItem,
  EntityItem,
  MorphItem,
  SidecarPayload,
  SpanItem,
  ValueItem,
  canonicalFeatureString,
  sha256Utf8,
  validatePayload,
} from "./payload.js";

export const MODELS = ["de-rules"];

const TOKEN_RE = /[\p{L}\p{N}_]+(?:[-'’][\p{L}\p{N}_]+)*|[^\s]/gu;
const OPENING_QUOTES = new Set(['"', "'", "„", "‚", "«", "»", "‹", "›", "(", "[", "{"]);
const TERMINALS = new Set([".", "?", "!"]);

interface Tok extends SpanItem {
  text: string;
}

/** Code-point offsets: JS string indexes are UTF-16, so spans are remapped. */
export function tokenize(sofa: string): Tok[] {
  const utf16ToCp: number[] = new Array(sofa.length + 1);
  let cp = 0;
  let u = 0;
  for (const ch of sofa) {
    utf16ToCp[u] = cp;
    if (ch.length === 2) utf16ToCp[u + 1] = cp;
    u += ch.length;
    cp += 1;
  }
  utf16ToCp[sofa.length] = cp;
  const tokens: Tok[] = [];
  for (const m of sofa.matchAll(TOKEN_RE)) {
    const start = m.index ?? 0;
    tokens.push({
      begin: utf16ToCp[start],
      end: utf16ToCp[start + m[0].length],
      text: m[0],
    });
  }
  return tokens;
}

export function sentenceSpans(sofa: string, tokens: Tok[]): SpanItem[] {
  if (tokens.length === 0) return [];
  const sentences: SpanItem[] = [];
  let start = 0;
  const chars = Array.from(sofa);
  for (let i = 0; i < tokens.length; i++) {
    const tok = tokens[i];
    let boundary = false;
    if (TERMINALS.has(tok.text) && tok.end < chars.length && /\s/.test(chars[tok.end])) {
      let k = tok.end;
      while (k < chars.length && /\s/.test(chars[k])) k++;
      const next = chars[k];
      if (
        next &&
        ((/\p{Lu}/u.test(next)) || OPENING_QUOTES.has(next))
      ) {
        boundary = true;
        if (tok.text === "." && i > 0 && tokens[i - 1].end === tok.begin) {
          if (ABBREVIATIONS.has(tokens[i - 1].text + ".")) boundary = false;
        }
      }
    }
    if (boundary) {
      sentences.push({ begin: tokens[start].begin, end: tok.end });
      start = i + 1;
    }
  }
  if (start < tokens.length) {
    sentences.push({ begin: tokens[start].begin, end: tokens[tokens.length - 1].end });
  }
  return sentences;
}

function isCapitalized(text: string): boolean {
  const first = text[0] ?? "";
  return /\p{Lu}/u.test(first);
}

function tagOf(tok: Tok, sentenceInitial: boolean): string {
  const lower = tok.text.toLowerCase();
  const entry = CLOSED_CLASS[lower];
  if (entry && (!isCapitalized(tok.text) || sentenceInitial)) return entry.pos;
  if (/^\p{N}+([.,]\p{N}+)?$/u.test(tok.text)) return "CARD";
  if (!/[\p{L}\p{N}]/u.test(tok.text)) {
    if (tok.text === "," ) return "$,";
    if (tok.text === "(" || tok.text === ")" || tok.text === "-") return "$(";
    return "$.";
  }
  if (isCapitalized(tok.text)) {
    if (FIRST_NAMES[tok.text] || KNOWN_PLACES.has(tok.text)) return "NE";
    return "NN";
  }
  if (/(lich|ig|isch|sam|bar|haft|los)(e[nmrs]?)?$/.test(lower)) return "ADJA";
  if (/(te|ten|erte|erten)$/.test(lower) && IRREGULAR_LEMMAS[tok.text]) return "ADJA";
  if (/(st|t|en|te|ten|est)$/.test(lower)) return "VVFIN";
  return "ADV";
}

function lemmaOf(tok: Tok, pos: string): string {
  if (IRREGULAR_LEMMAS[tok.text]) return IRREGULAR_LEMMAS[tok.text];
  const entry = CLOSED_CLASS[tok.text.toLowerCase()];
  if (entry?.lemma && pos === entry.pos) return entry.lemma;
  const text = tok.text;
  if (pos === "NN") {
    if (text.endsWith("innen")) return text.slice(0, -3);
    if (text.endsWith("ungen") || text.endsWith("heiten") || text.endsWith("keiten")) {
      return text.slice(0, -2);
    }
  }
  if (pos === "ADJA") {
    const stripped = text.replace(/(e[nmrs]?)$/, "");
    return stripped.length >= 3 ? stripped : text;
  }
  if (pos === "VVFIN") {
    if (/(et|st)$/.test(text)) return text.replace(/(et|st)$/, "en");
    if (/t$/.test(text)) return text.slice(0, -1) + "en";
  }
  return text;
}

function morphOf(tok: Tok, pos: string): Record<string, string> | undefined {
  const entry = CLOSED_CLASS[tok.text.toLowerCase()];
  if (entry?.morph) return { ...entry.morph };
  const gender = FIRST_NAMES[tok.text];
  if (gender) return { Case: "Nom", Gender: gender, Number: "Sing" };
  if (pos === "NE") return { Case: "Nom", Gender: "Masc", Number: "Sing" };
  if (pos === "NN") {
    const features: Record<string, string> = {};
    if (/(en|e)$/.test(tok.text) && IRREGULAR_LEMMAS[tok.text]) {
      features.Number = "Plur";
    } else {
      features.Number = "Sing";
    }
    if (/ung$/.test(tok.text) || /heit$/.test(tok.text) || /keit$/.test(tok.text)) {
      features.Gender = "Fem";
    }
    return Object.keys(features).length ? features : undefined;
  }
  return undefined;
}

interface Analyzed {
  tokens: Tok[];
  sentences: SpanItem[];
  pos: string[];
  lemma: string[];
  morph: (Record<string, string> | undefined)[];
}

function analyze(sofa: string): Analyzed {
  const tokens = tokenize(sofa);
  const sentences = sentenceSpans(sofa, tokens);
  const sentenceStart = new Set(
    sentences.map((s) => tokens.findIndex((t) => t.begin === s.begin)),
  );
  const pos = tokens.map((tok, i) => tagOf(tok, sentenceStart.has(i)));
  const lemma = tokens.map((tok, i) => lemmaOf(tok, pos[i]));
  const morph = tokens.map((tok, i) => morphOf(tok, pos[i]));
  return { tokens, sentences, pos, lemma, morph };
}

/** Head assignment within each sentence: finite verb as root, names chain
 * as PNC onto the last of the name run, everything else onto the root. */
function dependenciesOf(a: Analyzed): DependencyItem[] {
  const deps: DependencyItem[] = [];
  for (const sentence of a.sentences) {
    const indexes: number[] = [];
    a.tokens.forEach((tok, i) => {
      if (tok.begin >= sentence.begin && tok.end <= sentence.end) indexes.push(i);
    });
    if (indexes.length === 0) continue;
    const rootIdx =
      indexes.find((i) => a.pos[i].startsWith("V")) ?? indexes[0];
    const span = (i: number): [number, number] => [a.tokens[i].begin, a.tokens[i].end];
    for (const i of indexes) {
      if (i === rootIdx) {
        deps.push({
          begin: a.tokens[i].begin,
          end: a.tokens[i].end,
          governor: span(i),
          dependent: span(i),
          type: "ROOT",
          flavor: "basic",
        });
        continue;
      }
      let governor = rootIdx;
      let type = "NK";
      const next = indexes.find((j) => j > i);
      if (a.pos[i] === "NE" && next !== undefined && a.pos[next] === "NE") {
        governor = lastOfNameRun(a, indexes, i);
        type = "PNC";
      } else if (a.pos[i] === "NN" && a.pos[next ?? -1] === "NE") {
        governor = lastOfNameRun(a, indexes, next!);
        type = "PNC";
      } else if (a.pos[i].startsWith("$")) {
        type = "PUNC";
      } else if (a.pos[i] === "NN" || a.pos[i] === "NE") {
        type = i < rootIdx ? "SB" : "OA";
      } else if (a.pos[i] === "ADJA" || a.pos[i] === "ART" || a.pos[i] === "PPOSAT") {
        const noun = indexes.find((j) => j > i && (a.pos[j] === "NN" || a.pos[j] === "NE"));
        if (noun !== undefined) governor = noun;
      } else if (a.pos[i] === "ADV") {
        type = "MO";
      }
      deps.push({
        begin: a.tokens[i].begin,
        end: a.tokens[i].end,
        governor: span(governor),
        dependent: span(i),
        type,
        flavor: "basic",
      });
    }
  }
  return deps;
}

function lastOfNameRun(a: Analyzed, indexes: number[], from: number): number {
  let last = from;
  for (const j of indexes) {
    if (j >= from && a.pos[j] === "NE") last = j;
    if (j > last && a.pos[j] !== "NE") break;
  }
  return last;
}

function entitiesOf(a: Analyzed): EntityItem[] {
  const entities: EntityItem[] = [];
  let run: number[] = [];
  const flush = () => {
    if (run.length === 0) return;
    const first = a.tokens[run[0]];
    const last = a.tokens[run[run.length - 1]];
    const label = FIRST_NAMES[first.text]
      ? "PER"
      : KNOWN_PLACES.has(first.text)
        ? "LOC"
        : "MISC";
    entities.push({ begin: first.begin, end: last.end, label });
    run = [];
  };
  a.tokens.forEach((tok, i) => {
    if (a.pos[i] === "NE") {
      run.push(i);
    } else {
      flush();
    }
  });
  flush();
  return entities;
}

export function annotateText(sofa: string, documentId: string): SidecarPayload {
  const a = analyze(sofa);
  const lemmas: ValueItem[] = a.tokens.map((tok, i) => ({
    begin: tok.begin,
    end: tok.end,
    value: a.lemma[i],
  }));
  const pos: ValueItem[] = a.tokens.map((tok, i) => ({
    begin: tok.begin,
    end: tok.end,
    value: a.pos[i],
  }));
  const morph: MorphItem[] = [];
  a.tokens.forEach((tok, i) => {
    const features = a.morph[i];
    if (features) {
      morph.push({
        begin: tok.begin,
        end: tok.end,
        features,
        value: canonicalFeatureString(features),
      });
    }
  });
  const payload: SidecarPayload = {
    document_id: documentId,
    sofa_sha256: sha256Utf8(sofa),
    layers: {
      sentences: a.sentences,
      tokens: a.tokens.map(({ begin, end }) => ({ begin, end })),
      lemmas,
      pos,
      morph,
      dependencies: dependenciesOf(a),
      entities: entitiesOf(a),
    },
  };
  validatePayload(payload, Array.from(sofa).length);
  return payload;
}
