#!/usr/bin/env node
// nlp-sidecar annotate <text-file> --model <name> --out <json-file>

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { parseArgs } from "node:util";
import { MODELS, annotateText } from "./pipeline.js";

function fail(message: string): never {
  console.error(`nlp-sidecar: ${message}`);
  process.exit(1);
}

const [command, ...rest] = process.argv.slice(2);
if (command !== "annotate") {
  fail(`unknown command ${command ?? "(none)"}; expected: annotate <text-file> --model <name> --out <json-file>`);
}

const { values, positionals } = parseArgs({
  args: rest,
  allowPositionals: true,
  options: {
    model: { type: "string", default: "de-rules" },
    out: { type: "string" },
  },
});

const textFile = positionals[0];
if (!textFile) fail("missing <text-file>");
if (!MODELS.includes(values.model!)) {
  fail(`model ${values.model} is not available (have: ${MODELS.join(", ")})`);
}

let sofa: string;
try {
  sofa = readFileSync(textFile, "utf-8");
} catch (err) {
  fail(`cannot read ${textFile}: ${err}`);
}

const documentId = basename(textFile).replace(/\.(sofa\.)?txt$/, "");
const payload = annotateText(sofa, documentId);
const outFile = values.out ?? `${textFile}.json`;
writeFileSync(outFile, JSON.stringify(payload, null, 1) + "\n", "utf-8");
console.error(
  `nlp-sidecar: ${documentId}: ${payload.layers.tokens.length} tokens, ` +
    `${payload.layers.sentences.length} sentences -> ${outFile}`,
);
