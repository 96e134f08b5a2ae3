// Minimal ambient declarations for the image codecs (no bundled types).

declare module 'pngjs' {
  interface PngData {
    width: number
    height: number
    data: Uint8Array
  }
  class PNGClass {
    constructor(options?: { width?: number; height?: number })
    width: number
    height: number
    data: Uint8Array
    static sync: {
      read(buffer: Uint8Array): PngData
      write(png: PNGClass): Uint8Array
    }
  }
  const _default: { PNG: typeof PNGClass }
  export = _default
}

declare module 'jpeg-js' {
  interface JpegData {
    width: number
    height: number
    data: Uint8Array
  }
  const _default: {
    decode(buffer: Uint8Array, options?: { useTArray?: boolean }): JpegData
    encode(image: { width: number; height: number; data: Uint8Array }, quality?: number): {
      data: Uint8Array
    }
  }
  export = _default
}
