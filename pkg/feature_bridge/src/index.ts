export { loadImage, savePng, type RgbImage } from './image.js'
export {
  LocalDescriptorBackbone,
  loadBackbone,
  LOCAL_DESCRIPTOR_DIM,
  type Backbone,
  type FeatureGrid,
} from './backbone.js'
export { encodeFmap, readFmap, writeFmap, FMAP_VERSION } from './fmap.js'
export {
  collectExemplars,
  patchLabelsFromPolygons,
  pointInPolygon,
  readLabelMeAnnotations,
  type ExemplarDocument,
  type PolygonAnnotation,
} from './exemplars.js'
export { main } from './cli.js'
