/**
 * Wire formats for the gateway API.
 *
 * Everything that crosses the HTTP or WebSocket boundary is validated
 * here before it reaches application state, so a malformed or
 * unexpected payload surfaces as a diagnostic event instead of a
 * silent rendering bug.
 */

import { z } from "zod";

/** A telemetry or control value as the gateway reports it. */
export const pointValueSchema = z.union([z.number(), z.boolean(), z.null()]);

export type PointValue = z.infer<typeof pointValueSchema>;

/** One row of the GET /points snapshot. */
export const pointSnapshotSchema = z.object({
  name: z.string(),
  path: z.string(),
  writable: z.boolean(),
  value: pointValueSchema,
  quality: z.string(),
  tick: z.number().int(),
});

export type PointSnapshot = z.infer<typeof pointSnapshotSchema>;

/** Full GET /points response. */
export const pointsResponseSchema = z.object({
  tick: z.number().int(),
  points: z.array(pointSnapshotSchema),
});

export type PointsResponse = z.infer<typeof pointsResponseSchema>;

/** One change inside a stream frame. */
export const streamUpdateSchema = z.object({
  point: z.string(),
  value: pointValueSchema,
});

/**
 * One WebSocket frame. Frames carry only the points whose value
 * changed during that tick, so an empty update list is normal.
 */
export const streamFrameSchema = z.object({
  tick: z.number().int(),
  updates: z.array(streamUpdateSchema),
});

export type StreamFrame = z.infer<typeof streamFrameSchema>;

/** Bus record from the power section of GET /model. */
export const busSchema = z.object({
  id: z.number().int(),
  kv: z.number(),
  name: z.string(),
});

export type Bus = z.infer<typeof busSchema>;

/** Series branch (line or cable) from GET /model. */
export const branchSchema = z.object({
  name: z.string(),
  kind: z.string(),
  from: z.number().int(),
  to: z.number().int(),
});

export type Branch = z.infer<typeof branchSchema>;

/** Switching device (breaker or disconnector) from GET /model. */
export const switchSchema = z.object({
  id: z.string(),
  kind: z.string(),
  from: z.number().int(),
  to: z.number().int(),
  closed: z.boolean(),
});

export type Switch = z.infer<typeof switchSchema>;

/** Generator or infeed from GET /model. */
export const machineSchema = z.object({
  name: z.string(),
  kind: z.string(),
  bus: z.number().int(),
  slack: z.boolean().optional(),
});

export type Machine = z.infer<typeof machineSchema>;

export const powerModelSchema = z.object({
  layer: z.string(),
  base_mva: z.number(),
  buses: z.array(busSchema),
  branches: z.array(branchSchema),
  switches: z.array(switchSchema),
  machines: z.array(machineSchema),
});

export type PowerModel = z.infer<typeof powerModelSchema>;

/**
 * Point directory entry from GET /model (values live in /points).
 * `switch` names the power switch the point tracks, or null for
 * analog measurements; the diagram uses it to bind breaker symbols
 * to live values.
 */
export const modelPointSchema = z.object({
  name: z.string(),
  path: z.string(),
  writable: z.boolean(),
  switch: z.string().nullable(),
});

export type ModelPoint = z.infer<typeof modelPointSchema>;

/**
 * GET /model response. The cyber section is passed through untouched
 * because the diagram only draws the power layer; keeping it opaque
 * means a gateway-side change there cannot break the HMI.
 */
export const modelResponseSchema = z.object({
  power: powerModelSchema,
  cyber: z.unknown(),
  points: z.array(modelPointSchema),
});

export type ModelResponse = z.infer<typeof modelResponseSchema>;

/** Success body of POST /points/{name}/command. */
export const commandAcceptedSchema = z.object({
  ok: z.literal(true),
  value: pointValueSchema,
  tick: z.number().int(),
});

/** Error body of POST /points/{name}/command. */
export const commandRejectedSchema = z.object({
  error: z.string(),
});

export const commandResponseSchema = z.union([
  commandAcceptedSchema,
  commandRejectedSchema,
]);

export type CommandResponse = z.infer<typeof commandResponseSchema>;
