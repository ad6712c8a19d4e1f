// Decoder for the binary PPM (P6) frames the preview endpoints return.

export interface PpmImage {
  width: number;
  height: number;
  pixels: Uint8Array; // RGB triplets, row-major
}

export function parsePpm(data: Uint8Array): PpmImage {
  // header: "P6\n<w> <h>\n<maxval>\n" followed by raw pixels
  let pos = 0;
  const tokens: string[] = [];
  while (tokens.length < 4) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (pos < data.length && data[pos] === 0x23) {
      // '#' comment runs to end of line
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    if (start === pos) throw new Error("truncated PPM header");
    tokens.push(String.fromCharCode(...data.subarray(start, pos)));
  }
  pos++; // single whitespace after maxval
  const [magic, w, h, maxval] = tokens;
  if (magic !== "P6") throw new Error(`not a P6 PPM (got "${magic}")`);
  if (maxval !== "255") throw new Error("only 8-bit PPM supported");
  const width = parseInt(w, 10);
  const height = parseInt(h, 10);
  const n = 3 * width * height;
  const pixels = data.subarray(pos, pos + n);
  if (pixels.length !== n) throw new Error("truncated PPM pixel data");
  return { width, height, pixels: new Uint8Array(pixels) };
}

export function ppmToImageData(img: PpmImage): ImageData {
  const rgba = new Uint8ClampedArray(4 * img.width * img.height);
  for (let i = 0, j = 0; i < img.pixels.length; i += 3, j += 4) {
    rgba[j] = img.pixels[i];
    rgba[j + 1] = img.pixels[i + 1];
    rgba[j + 2] = img.pixels[i + 2];
    rgba[j + 3] = 255;
  }
  return new ImageData(rgba, img.width, img.height);
}

export function pixelDiffCount(a: PpmImage, b: PpmImage): number {
  if (a.width !== b.width || a.height !== b.height) {
    throw new Error("image size mismatch");
  }
  let diff = 0;
  for (let i = 0; i < a.pixels.length; i += 3) {
    if (
      a.pixels[i] !== b.pixels[i] ||
      a.pixels[i + 1] !== b.pixels[i + 1] ||
      a.pixels[i + 2] !== b.pixels[i + 2]
    ) {
      diff++;
    }
  }
  return diff;
}

function isSpace(c: number): boolean {
  return c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d;
}
