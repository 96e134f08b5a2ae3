/**
 * Image loading: PNG and JPEG files decoded to planar float RGB in [0, 1].
 */

import { readFileSync, writeFileSync } from 'fs'
import pngjs from 'pngjs'
import jpeg from 'jpeg-js'

const { PNG } = pngjs

export interface RgbImage {
  width: number
  height: number
  /** Row-major, 3 floats per pixel, values in [0, 1]. */
  data: Float32Array
}

export function loadImage(path: string): RgbImage {
  const lower = path.toLowerCase()
  if (lower.endsWith('.png')) return loadPng(path)
  if (lower.endsWith('.jpg') || lower.endsWith('.jpeg')) return loadJpeg(path)
  throw new Error(`unsupported image format: ${path} (PNG and JPEG are supported)`)
}

function toFloatRgb(rgba: Uint8Array, width: number, height: number): RgbImage {
  const data = new Float32Array(width * height * 3)
  for (let i = 0; i < width * height; i++) {
    data[i * 3] = rgba[i * 4] / 255
    data[i * 3 + 1] = rgba[i * 4 + 1] / 255
    data[i * 3 + 2] = rgba[i * 4 + 2] / 255
  }
  return { width, height, data }
}

function loadPng(path: string): RgbImage {
  const png = PNG.sync.read(readFileSync(path))
  return toFloatRgb(png.data, png.width, png.height)
}

function loadJpeg(path: string): RgbImage {
  const decoded = jpeg.decode(readFileSync(path), { useTArray: true })
  return toFloatRgb(decoded.data, decoded.width, decoded.height)
}

export function savePng(image: RgbImage, path: string): void {
  const png = new PNG({ width: image.width, height: image.height })
  for (let i = 0; i < image.width * image.height; i++) {
    png.data[i * 4] = Math.round(image.data[i * 3] * 255)
    png.data[i * 4 + 1] = Math.round(image.data[i * 3 + 1] * 255)
    png.data[i * 4 + 2] = Math.round(image.data[i * 3 + 2] * 255)
    png.data[i * 4 + 3] = 255
  }
  writeFileSync(path, PNG.sync.write(png))
}
