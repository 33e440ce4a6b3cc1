/** Regenerate the committed golden images for the renderer snapshots.
 *
 * Run via `npm run make-goldens`; commit the resulting .b64 files after
 * reviewing an intentional renderer change.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import {
  GOLDEN_NOW_MS, GOLDEN_SIZE, allZeroMapState, fixtureSceneState,
} from "../fixtures.js";
import { render } from "../render.js";

const here = dirname(fileURLToPath(import.meta.url));
const goldenDir = join(here, "..", "..", "test", "goldens");

mkdirSync(goldenDir, { recursive: true });

const scenes = {
  "all_zero_map.b64": allZeroMapState(),
  "fixture_scene.b64": fixtureSceneState(),
};

for (const [name, state] of Object.entries(scenes)) {
  const buf = render(state, GOLDEN_SIZE, GOLDEN_SIZE, GOLDEN_NOW_MS);
  const b64 = Buffer.from(buf).toString("base64");
  writeFileSync(join(goldenDir, name), b64 + "\n");
  console.log(`wrote ${name} (${buf.length} bytes RGBA as base64)`);
}
