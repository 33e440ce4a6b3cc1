/** Frozen wire schema for every envelope this client may emit.
 *
 * The strict zod objects reject unknown keys, so a captured session
 * validated here is byte-shape-identical to what the bridge accepts.
 */

import { z } from "zod";

const utime = z.number().int().nonnegative();

export const TwistSchema = z.strictObject({
  vx: z.number(),
  vy: z.number(),
  wz: z.number(),
  utime,
});

export const SlamModeSchema = z.strictObject({
  utime,
  mode: z.enum(["IDLE", "LOCALIZATION_ONLY", "FULL_SLAM"]),
});

export const SlamResetSchema = z.strictObject({ utime });

export const PublishSchema = z.discriminatedUnion("channel", [
  z.strictObject({
    op: z.literal("publish"),
    channel: z.literal("MBOT_VEL_CMD"),
    data: TwistSchema,
  }),
  z.strictObject({
    op: z.literal("publish"),
    channel: z.literal("SLAM_MODE"),
    data: SlamModeSchema,
  }),
  z.strictObject({
    op: z.literal("publish"),
    channel: z.literal("SLAM_RESET"),
    data: SlamResetSchema,
  }),
]);

const channelName = z.enum([
  "MBOT_VEL_CMD", "ODOMETRY", "LIDAR", "SLAM_POSE", "SLAM_MAP",
  "CONTROLLER_PATH", "SLAM_MODE", "SLAM_RESET", "MBOT_ENCODERS",
  "MBOT_MOTOR_CMD", "PLAN_REQUEST", "PLAN_RESPONSE", "SLAM_STATUS",
]);

export const SubscribeSchema = z.strictObject({
  op: z.enum(["subscribe", "unsubscribe"]),
  channel: channelName,
});

export const RequestSchema = z.strictObject({
  op: z.literal("request"),
  channel: channelName,
  as_bytes: z.boolean().optional(),
});

export const OutboundSchema = z.union([
  PublishSchema,
  SubscribeSchema,
  RequestSchema,
]);

/** Validate one raw outbound frame; throws with a useful message if bad. */
export function validateOutbound(raw: string): z.infer<typeof OutboundSchema> {
  return OutboundSchema.parse(JSON.parse(raw));
}
