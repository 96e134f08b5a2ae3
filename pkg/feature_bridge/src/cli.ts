/**
 * feature-bridge CLI: export patch features (FMAP) and annotated
 * exemplars (JSON) for the splat segmentation pipeline.
 *
 *   export-features --image frame.png --out features/00000.fmap
 *   export-exemplars --image ex.png --annotations ex.json \
 *       --label grasp --label cut --out exemplars.json
 */

import { writeFileSync } from 'fs'
import { basename } from 'path'
import { loadBackbone } from './backbone.js'
import { collectExemplars, patchLabelsFromPolygons, readLabelMeAnnotations } from './exemplars.js'
import { writeFmap } from './fmap.js'
import { loadImage } from './image.js'

interface Options {
  command: string
  images: string[]
  annotations: string[]
  labels: string[]
  out: string
  patch: number
  backbone: string
  backgroundStride: number
}

function parseArgs(argv: string[]): Options {
  const opts: Options = {
    command: argv[0] ?? '',
    images: [], annotations: [], labels: [],
    out: '', patch: 14, backbone: 'local', backgroundStride: 4,
  }
  for (let i = 1; i < argv.length; i++) {
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`missing value for ${argv[i]}`)
      return argv[++i]
    }
    switch (argv[i]) {
      case '--image': opts.images.push(next()); break
      case '--annotations': opts.annotations.push(next()); break
      case '--label': opts.labels.push(next()); break
      case '--out': opts.out = next(); break
      case '--patch': opts.patch = parseInt(next(), 10); break
      case '--backbone': opts.backbone = next(); break
      case '--background-stride': opts.backgroundStride = parseInt(next(), 10); break
      default: throw new Error(`unknown argument: ${argv[i]}`)
    }
  }
  return opts
}

function exportFeatures(opts: Options): void {
  if (opts.images.length === 0 || !opts.out) {
    throw new Error('export-features needs --image and --out')
  }
  const backbone = loadBackbone(opts.backbone)
  if (opts.images.length === 1 && opts.out.endsWith('.fmap')) {
    writeFmap(backbone.extract(loadImage(opts.images[0]), opts.patch), opts.out)
    console.log(JSON.stringify({ command: 'export-features', files: 1, out: opts.out }))
    return
  }
  for (const image of opts.images) {
    const stem = basename(image).replace(/\.[^.]+$/, '')
    const target = `${opts.out}/${stem}.fmap`
    writeFmap(backbone.extract(loadImage(image), opts.patch), target)
  }
  console.log(JSON.stringify({
    command: 'export-features', files: opts.images.length, out: opts.out,
  }))
}

function exportExemplars(opts: Options): void {
  if (opts.images.length === 0 || opts.images.length !== opts.annotations.length) {
    throw new Error('export-exemplars needs matching --image/--annotations pairs')
  }
  if (opts.labels.length === 0 || !opts.out) {
    throw new Error('export-exemplars needs --label (at least one) and --out')
  }
  const backbone = loadBackbone(opts.backbone)
  const grids = opts.images.map((img) => backbone.extract(loadImage(img), opts.patch))
  const patchLabels = grids.map((grid, i) =>
    patchLabelsFromPolygons(grid, readLabelMeAnnotations(opts.annotations[i]), opts.labels))
  const doc = collectExemplars(grids, patchLabels, opts.labels,
                               { backgroundStride: opts.backgroundStride })
  writeFileSync(opts.out, JSON.stringify(doc))
  const annotated = patchLabels.reduce(
    (acc, l) => acc + l.reduce((a, v) => a + (v > 0 ? 1 : 0), 0), 0)
  console.log(JSON.stringify({
    command: 'export-exemplars', entries: doc.entries.length,
    annotated_patches: annotated, out: opts.out,
  }))
}

export function main(argv: string[]): number {
  let opts: Options
  try {
    opts = parseArgs(argv)
    switch (opts.command) {
      case 'export-features': exportFeatures(opts); break
      case 'export-exemplars': exportExemplars(opts); break
      default:
        throw new Error(
          `unknown command '${opts.command}' (use export-features or export-exemplars)`)
    }
  } catch (err) {
    console.error(JSON.stringify({ event: 'error', message: String(err) }))
    return 1
  }
  return 0
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(main(process.argv.slice(2)))
}
