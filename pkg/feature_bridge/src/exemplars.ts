/**
 * Exemplar extraction from polygon-annotated images.
 *
 * Annotations follow the LabelMe convention: a JSON document with a
 * `shapes` list of `{label, points: [[x, y], ...]}` polygons. A patch
 * contributes an exemplar for a label when its center falls inside one of
 * that label's polygons; patches outside every polygon are background,
 * sampled at a configurable stride.
 */

import { readFileSync } from 'fs'
import type { FeatureGrid } from './backbone.js'

export interface PolygonAnnotation {
  label: string
  points: Array<[number, number]>
}

export interface ExemplarEntry {
  label: number
  feature: number[]
}

export interface ExemplarDocument {
  labels: string[]
  entries: ExemplarEntry[]
}

export function readLabelMeAnnotations(path: string): PolygonAnnotation[] {
  const doc = JSON.parse(readFileSync(path, 'utf-8'))
  if (!Array.isArray(doc.shapes)) {
    throw new Error(`${path}: not a polygon annotation file (missing 'shapes')`)
  }
  return doc.shapes.map((shape: any) => {
    if (typeof shape.label !== 'string' || !Array.isArray(shape.points)) {
      throw new Error(`${path}: malformed shape entry`)
    }
    return { label: shape.label, points: shape.points as Array<[number, number]> }
  })
}

/** Even-odd rule point-in-polygon test. */
export function pointInPolygon(x: number, y: number, points: Array<[number, number]>): boolean {
  let inside = false
  for (let i = 0, j = points.length - 1; i < points.length; j = i++) {
    const [xi, yi] = points[i]
    const [xj, yj] = points[j]
    if ((yi > y) !== (yj > y) && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside
    }
  }
  return inside
}

/** Per-patch label ids from polygons: 0 background, 1.. in labelNames order. */
export function patchLabelsFromPolygons(
  grid: FeatureGrid,
  annotations: PolygonAnnotation[],
  labelNames: string[],
): Uint8Array {
  const known = new Map(labelNames.map((name, i) => [name, i + 1]))
  for (const ann of annotations) {
    if (!known.has(ann.label)) {
      throw new Error(
        `unknown label '${ann.label}'; known labels: ${labelNames.join(', ')}`)
    }
  }
  const labels = new Uint8Array(grid.gridH * grid.gridW)
  for (let py = 0; py < grid.gridH; py++) {
    for (let px = 0; px < grid.gridW; px++) {
      const cx = (px + 0.5) * grid.patchPx
      const cy = (py + 0.5) * grid.patchPx
      for (const ann of annotations) {
        if (pointInPolygon(cx, cy, ann.points)) {
          labels[py * grid.gridW + px] = known.get(ann.label)!
          break
        }
      }
    }
  }
  return labels
}

export interface CollectOptions {
  /** Keep every Nth background patch (row-major order). */
  backgroundStride: number
}

export function collectExemplars(
  grids: FeatureGrid[],
  patchLabels: Uint8Array[],
  labelNames: string[],
  options: CollectOptions = { backgroundStride: 4 },
): ExemplarDocument {
  const entries: ExemplarEntry[] = []
  let backgroundSeen = 0
  grids.forEach((grid, g) => {
    const labels = patchLabels[g]
    for (let p = 0; p < labels.length; p++) {
      const label = labels[p]
      if (label === 0) {
        if (backgroundSeen++ % options.backgroundStride !== 0) continue
      }
      const feature = Array.from(grid.data.subarray(p * grid.dim, (p + 1) * grid.dim))
      entries.push({ label, feature })
    }
  })
  return { labels: ['background', ...labelNames], entries }
}
