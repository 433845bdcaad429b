/**
 * Client view state.
 *
 * Everything here is presentation: which node is selected or hovered, how
 * cells are compared and subdivided, where the scene camera looks. Design
 * truth (the tree, reports, layouts) always comes fresh from the server,
 * so rebuilding the view from the API with an equal ViewState reproduces
 * the identical picture.
 */

import type { ComparisonMode } from "./color";

export interface Camera {
  cx: number;
  cy: number;
  zoom: number;
  focus: string | null; // measuring surface to center, if any
}

export interface ViewState {
  sessionId: string;
  selected: string;
  hovered: string | null;
  comparison: ComparisonMode;
  detailGroups: string[]; // groups shown one cell per member
  falseColor: boolean;
  camera: Camera;
}

export function initialViewState(sessionId: string, rootId: string): ViewState {
  return {
    sessionId,
    selected: rootId,
    hovered: null,
    comparison: "off",
    detailGroups: [],
    falseColor: false,
    camera: { cx: 0.5, cy: 0.5, zoom: 1, focus: null },
  };
}

/**
 * The comparison mode actually in effect.
 *
 * Local comparison means "selected versus the node under the cursor", so
 * it only exists while something is hovered; with the cursor elsewhere
 * the view falls back to plain fulfillment colors.
 */
export function effectiveComparison(vs: ViewState): ComparisonMode {
  if (vs.comparison === "local" && vs.hovered === null) return "off";
  return vs.comparison;
}

export function withHover(vs: ViewState, nodeId: string | null): ViewState {
  return { ...vs, hovered: nodeId };
}

export function withSelection(vs: ViewState, nodeId: string): ViewState {
  return { ...vs, selected: nodeId };
}

export function withComparison(vs: ViewState, mode: ComparisonMode): ViewState {
  return { ...vs, comparison: mode };
}

export function toggleDetail(vs: ViewState, groupId: string): ViewState {
  const detail = vs.detailGroups.includes(groupId)
    ? vs.detailGroups.filter((g) => g !== groupId)
    : [...vs.detailGroups, groupId].sort();
  return { ...vs, detailGroups: detail };
}

export function focusCamera(vs: ViewState, surfaceId: string | null): ViewState {
  return { ...vs, camera: { ...vs.camera, focus: surfaceId } };
}
