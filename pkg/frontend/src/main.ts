/**
 * Browser entry point: a small launcher form, then the app shell.
 *
 * The launcher asks for the service address and a scene document and
 * starts a fresh session; everything after that is the App's business.
 */

import { Client } from "./api";
import { App } from "./app";

const DEFAULT_BASE = "http://127.0.0.1:8000";

const SAMPLE_SCENE = {
  room: {
    width: 3.0,
    depth: 3.0,
    height: 2.5,
    patch_resolution: 0.25,
    global_targets: { color_temperature: [2700.0, 3300.0] },
  },
  surfaces: [
    {
      id: "floor",
      kind: "floor",
      axis: "z",
      offset: 0.0,
      normal: 1,
      u_range: [0.0, 3.0],
      v_range: [0.0, 3.0],
      reflectance: 0.4,
    },
    {
      id: "ceiling",
      kind: "ceiling",
      axis: "z",
      offset: 2.5,
      normal: -1,
      u_range: [0.0, 3.0],
      v_range: [0.0, 3.0],
      reflectance: 0.75,
    },
  ],
  luminaires: [
    {
      id: "S1",
      model: "orb",
      position: [1.5, 1.5, 1.8],
      aim: [0.0, 0.0, -1.0],
      dim: 1.0,
    },
  ],
  measuring_surfaces: [
    {
      id: "floor_all",
      axis: "z",
      offset: 0.0,
      normal: 1,
      u_range: [0.0, 3.0],
      v_range: [0.0, 3.0],
      targets: { average_lux: 100.0, uniformity_min_avg: 0.4 },
    },
  ],
  glare_probes: [],
  groups: [{ id: "tasks", name: "Task areas", members: ["floor_all"] }],
  catalog_ref: {
    models: [
      {
        id: "orb",
        collection: "orb",
        version: "one",
        flux: 1800.0,
        color_temperature: 3000.0,
        cri: 90.0,
        distribution: { type: "isotropic" },
        mount: "pendant",
        luminous_area: 0.08,
        height_range: [1.2, 2.0],
      },
    ],
  },
};

function mountLauncher(root: HTMLElement): void {
  root.innerHTML = "";
  const form = document.createElement("form");
  form.className = "launcher";

  const baseLabel = document.createElement("label");
  baseLabel.textContent = "Service address ";
  const base = document.createElement("input");
  base.type = "text";
  base.value = DEFAULT_BASE;
  base.size = 28;
  baseLabel.appendChild(base);

  const sceneLabel = document.createElement("label");
  sceneLabel.textContent = "Scene document";
  const sceneBox = document.createElement("textarea");
  sceneBox.rows = 16;
  sceneBox.cols = 72;
  sceneBox.value = JSON.stringify(SAMPLE_SCENE, null, 2);
  sceneLabel.appendChild(sceneBox);

  const start = document.createElement("button");
  start.type = "submit";
  start.textContent = "Start session";
  const error = document.createElement("p");
  error.className = "launcher-error";

  form.append(baseLabel, sceneLabel, start, error);
  form.addEventListener("submit", (e) => {
    e.preventDefault();
    let scene: unknown;
    try {
      scene = JSON.parse(sceneBox.value);
    } catch (err) {
      error.textContent = `scene is not valid JSON: ${String(err)}`;
      return;
    }
    App.create(new Client(base.value), root, { scene }).catch((err: unknown) => {
      error.textContent = `could not start: ${String(err)}`;
    });
  });
  root.appendChild(form);
}

const rootEl = document.getElementById("root");
if (rootEl) mountLauncher(rootEl);
