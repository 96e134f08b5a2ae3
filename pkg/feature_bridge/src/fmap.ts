/**
 * FMAP binary writer/reader.
 *
 * Layout: magic "FMAP", five little-endian uint32 (version=1, grid_h,
 * grid_w, dim, patch_px), then grid_h*grid_w*dim little-endian float32,
 * row-major.
 */

import { readFileSync, writeFileSync } from 'fs'
import type { FeatureGrid } from './backbone.js'

export const FMAP_VERSION = 1

export function encodeFmap(grid: FeatureGrid): Buffer {
  const header = Buffer.alloc(24)
  header.write('FMAP', 0, 'ascii')
  header.writeUInt32LE(FMAP_VERSION, 4)
  header.writeUInt32LE(grid.gridH, 8)
  header.writeUInt32LE(grid.gridW, 12)
  header.writeUInt32LE(grid.dim, 16)
  header.writeUInt32LE(grid.patchPx, 20)
  const payload = Buffer.alloc(grid.data.length * 4)
  for (let i = 0; i < grid.data.length; i++) payload.writeFloatLE(grid.data[i], i * 4)
  return Buffer.concat([header, payload])
}

export function writeFmap(grid: FeatureGrid, path: string): void {
  writeFileSync(path, encodeFmap(grid))
}

export function readFmap(path: string): FeatureGrid {
  const buf = readFileSync(path)
  if (buf.length < 24 || buf.toString('ascii', 0, 4) !== 'FMAP') {
    throw new Error(`${path}: bad FMAP magic`)
  }
  const version = buf.readUInt32LE(4)
  if (version !== FMAP_VERSION) throw new Error(`${path}: unsupported FMAP version ${version}`)
  const gridH = buf.readUInt32LE(8)
  const gridW = buf.readUInt32LE(12)
  const dim = buf.readUInt32LE(16)
  const patchPx = buf.readUInt32LE(20)
  const count = gridH * gridW * dim
  if (buf.length !== 24 + count * 4) {
    throw new Error(`${path}: expected ${count * 4} payload bytes, found ${buf.length - 24}`)
  }
  const data = new Float32Array(count)
  for (let i = 0; i < count; i++) data[i] = buf.readFloatLE(24 + i * 4)
  return { gridH, gridW, dim, patchPx, data }
}
