import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { SCHEMA_IDS, Validator } from "../src/protocol.js";

export const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

export function loadSchemas(): Record<string, object> {
  const schemas: Record<string, object> = {};
  for (const id of SCHEMA_IDS) {
    const path = join(REPO_ROOT, "schemas", `${id}.json`);
    schemas[id] = JSON.parse(readFileSync(path, "utf-8"));
  }
  return schemas;
}

export function makeValidator(): Validator {
  return new Validator(loadSchemas());
}
