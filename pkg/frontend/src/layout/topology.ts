/**
 * Topology glyph model. The icon vocabulary is fixed: node roles map to
 * role glyphs, runtime status decorates nodes and services, and link
 * coloring buckets current throughput.
 */

import type { TopologyNodeView } from "../types.js";

export const ROLE_GLYPHS: Record<string, string> = {
  attacker: "skull",
  victim: "crosshair",
  server: "server",
  workstation: "desktop",
  router: "router",
};

export const STATUS_COLORS: Record<string, string> = {
  up: "#2e7d32",
  down: "#c62828",
  unknown: "#9e9e9e",
};

export interface NodeGlyph {
  nodeId: string;
  glyph: string;
  down: boolean;
  badges: string[]; // e.g. "bug" for a known vulnerability, "mail" for received mail
  services: { name: string; color: string }[];
}

export function nodeGlyphs(nodes: TopologyNodeView[]): NodeGlyph[] {
  return nodes.map((node) => ({
    nodeId: node.node_id,
    glyph: ROLE_GLYPHS[node.role_glyph] ?? "host",
    down: node.down,
    badges: node.vulnerabilities.length > 0 ? ["bug"] : [],
    services: node.services.map((svc) => ({
      name: svc.name,
      color: STATUS_COLORS[svc.status] ?? STATUS_COLORS.unknown,
    })),
  }));
}

/** Bucket link throughput into a stroke color (bytes per second). */
export function linkColor(bytesPerSec: number): string {
  if (bytesPerSec >= 1_000_000) return "#c62828";
  if (bytesPerSec >= 100_000) return "#f9a825";
  if (bytesPerSec > 0) return "#2e7d32";
  return "#9e9e9e";
}
