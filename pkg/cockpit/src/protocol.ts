// Wire protocol client: envelope encode/decode with client-side schema
// validation. The JSON Schema documents are the shared ones in ../schemas;
// callers load them (fs in tests, fetch in the browser) and hand them in.

import { Ajv2020, type ValidateFunction } from "ajv/dist/2020.js";

export type EnvelopeType = "sensor_frame" | "adaptation_command" | "session_control";

export interface Envelope {
  v: 1;
  type: EnvelopeType;
  session: string;
  seq: number;
  t_ms: number;
  payload: Record<string, unknown>;
}

export interface Violation {
  path: string;
  message: string;
}

export class ProtocolError extends Error {
  violations: Violation[];

  constructor(message: string, violations: Violation[] = []) {
    super(message);
    this.violations = violations;
  }
}

export const SCHEMA_IDS = [
  "envelope",
  "sensor_frame",
  "adaptation_command",
  "session_control",
  "semantic_event",
  "tutor_speech",
  "visualization",
  "instruction_update",
  "learner_assessment",
  "intervention_plan",
] as const;

const PAYLOAD_SCHEMA: Record<EnvelopeType, string> = {
  sensor_frame: "sensor_frame",
  adaptation_command: "adaptation_command",
  session_control: "session_control",
};

export class Validator {
  private ajv: Ajv2020;
  private compiled = new Map<string, ValidateFunction>();

  constructor(schemas: Record<string, object>) {
    this.ajv = new Ajv2020({ allErrors: true, strict: false });
    for (const id of SCHEMA_IDS) {
      const doc = schemas[id];
      if (!doc) {
        throw new Error(`missing schema document ${id}`);
      }
      this.ajv.addSchema(doc, id);
    }
  }

  private validator(id: string): ValidateFunction {
    let fn = this.compiled.get(id);
    if (!fn) {
      fn = this.ajv.getSchema(id);
      if (!fn) {
        throw new Error(`unknown schema ${id}`);
      }
      this.compiled.set(id, fn);
    }
    return fn;
  }

  check(value: unknown, schemaId: string): Violation[] {
    const fn = this.validator(schemaId);
    if (fn(value)) {
      return [];
    }
    return (fn.errors ?? []).map((e) => ({
      path: e.instancePath || ".",
      message: e.message ?? "invalid",
    }));
  }

  checkEnvelope(env: Envelope): Violation[] {
    const outer = this.check(env, "envelope");
    if (outer.length > 0) {
      return outer;
    }
    return this.check(env.payload, PAYLOAD_SCHEMA[env.type]).map((v) => ({
      path: ".payload" + (v.path === "." ? "" : v.path),
      message: v.message,
    }));
  }
}

export function encodeEnvelope(env: Envelope, validator: Validator): string {
  const violations = validator.checkEnvelope(env);
  if (violations.length > 0) {
    throw new ProtocolError("refusing to encode invalid envelope", violations);
  }
  return JSON.stringify(env) + "\n";
}

export function decodeEnvelope(line: string, validator: Validator): Envelope {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`not valid JSON: ${err}`);
  }
  const env = parsed as Envelope;
  if (env && typeof env === "object" && env.v !== 1) {
    throw new ProtocolError(`unsupported protocol version ${env.v}`);
  }
  const violations = validator.checkEnvelope(env);
  if (violations.length > 0) {
    throw new ProtocolError("invalid envelope", violations);
  }
  return env;
}
