/**
 * Patch-feature backbones.
 *
 * A backbone turns an image into a grid of per-patch feature vectors,
 * ceil(height / patchPx) by ceil(width / patchPx). Matching and transfer
 * downstream use cosine similarity, so absolute feature scale is free.
 *
 * The built-in `local` backbone is a deterministic hand-crafted patch
 * descriptor (color statistics plus an oriented-gradient histogram). It
 * needs no downloaded weights, which keeps exports reproducible anywhere;
 * a learned ViT-style extractor can be plugged in by implementing
 * `Backbone` and registering it, as long as it keeps the same grid
 * geometry.
 */

import type { RgbImage } from './image.js'

export interface FeatureGrid {
  gridH: number
  gridW: number
  dim: number
  patchPx: number
  /** Row-major (gridH, gridW, dim). */
  data: Float32Array
}

export interface Backbone {
  readonly name: string
  readonly dim: number
  extract(image: RgbImage, patchPx: number): FeatureGrid
}

const GRADIENT_BINS = 8

/** 3 mean + 3 std + 4 gray cells + 1 edge strength + 8 orientation bins. */
export const LOCAL_DESCRIPTOR_DIM = 19

export class LocalDescriptorBackbone implements Backbone {
  readonly name = 'local'
  readonly dim = LOCAL_DESCRIPTOR_DIM

  extract(image: RgbImage, patchPx: number): FeatureGrid {
    if (patchPx < 1) throw new Error(`patch size must be >= 1, got ${patchPx}`)
    const gridH = Math.ceil(image.height / patchPx)
    const gridW = Math.ceil(image.width / patchPx)
    const out = new Float32Array(gridH * gridW * this.dim)
    const gray = toGray(image)

    for (let py = 0; py < gridH; py++) {
      for (let px = 0; px < gridW; px++) {
        const x0 = px * patchPx
        const y0 = py * patchPx
        const x1 = Math.min(x0 + patchPx, image.width)
        const y1 = Math.min(y0 + patchPx, image.height)
        const f = out.subarray((py * gridW + px) * this.dim, (py * gridW + px + 1) * this.dim)
        describePatch(image, gray, x0, y0, x1, y1, f)
      }
    }
    return { gridH, gridW, dim: this.dim, patchPx, data: out }
  }
}

function toGray(image: RgbImage): Float32Array {
  const gray = new Float32Array(image.width * image.height)
  for (let i = 0; i < gray.length; i++) {
    gray[i] = (image.data[i * 3] + image.data[i * 3 + 1] + image.data[i * 3 + 2]) / 3
  }
  return gray
}

function describePatch(
  image: RgbImage, gray: Float32Array,
  x0: number, y0: number, x1: number, y1: number, out: Float32Array,
): void {
  const n = (x1 - x0) * (y1 - y0)
  const w = image.width

  // color mean and spread
  const mean = [0, 0, 0]
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const p = (y * w + x) * 3
      mean[0] += image.data[p]
      mean[1] += image.data[p + 1]
      mean[2] += image.data[p + 2]
    }
  }
  mean[0] /= n; mean[1] /= n; mean[2] /= n
  const vars = [0, 0, 0]
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const p = (y * w + x) * 3
      for (let c = 0; c < 3; c++) {
        const d = image.data[p + c] - mean[c]
        vars[c] += d * d
      }
    }
  }
  out[0] = mean[0]; out[1] = mean[1]; out[2] = mean[2]
  out[3] = Math.sqrt(vars[0] / n)
  out[4] = Math.sqrt(vars[1] / n)
  out[5] = Math.sqrt(vars[2] / n)

  // 2x2 gray cells capture coarse layout inside the patch
  const midX = Math.max(x0 + 1, Math.floor((x0 + x1) / 2))
  const midY = Math.max(y0 + 1, Math.floor((y0 + y1) / 2))
  const cells = [[x0, y0, midX, midY], [midX, y0, x1, midY],
                 [x0, midY, midX, y1], [midX, midY, x1, y1]]
  for (let c = 0; c < 4; c++) {
    const [cx0, cy0, cx1, cy1] = cells[c]
    let sum = 0
    let count = 0
    for (let y = cy0; y < cy1; y++) {
      for (let x = cx0; x < cx1; x++) {
        sum += gray[y * w + x]
        count++
      }
    }
    out[6 + c] = count ? sum / count : 0
  }

  // central-difference gradients: magnitude plus an orientation histogram
  let edge = 0
  const hist = new Float32Array(GRADIENT_BINS)
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const xm = Math.max(x - 1, 0)
      const xp = Math.min(x + 1, image.width - 1)
      const ym = Math.max(y - 1, 0)
      const yp = Math.min(y + 1, image.height - 1)
      const gx = (gray[y * w + xp] - gray[y * w + xm]) / 2
      const gy = (gray[yp * w + x] - gray[ym * w + x]) / 2
      const mag = Math.sqrt(gx * gx + gy * gy)
      edge += mag
      if (mag > 1e-8) {
        const angle = Math.atan2(gy, gx) // [-pi, pi]
        let bin = Math.floor(((angle + Math.PI) / (2 * Math.PI)) * GRADIENT_BINS)
        if (bin === GRADIENT_BINS) bin = 0
        hist[bin] += mag
      }
    }
  }
  out[10] = edge / n
  for (let b = 0; b < GRADIENT_BINS; b++) out[11 + b] = hist[b] / n
}

const BACKBONES: Record<string, () => Backbone> = {
  local: () => new LocalDescriptorBackbone(),
}

export function loadBackbone(name: string): Backbone {
  const factory = BACKBONES[name]
  if (!factory) {
    throw new Error(
      `cannot load backbone '${name}'; available: ${Object.keys(BACKBONES).join(', ')}`)
  }
  return factory()
}
