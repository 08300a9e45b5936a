// Frame payload decoding: base64 -> grayscale bytes -> RGBA pixels.

export const FRAME_SIZE = 256;
export const FRAME_BYTES = FRAME_SIZE * FRAME_SIZE;

/** Decode the base64 frame field; throws if the size is not 256x256. */
export function decodeFrame(b64: string): Uint8Array {
  const bin = atob(b64);
  if (bin.length !== FRAME_BYTES) {
    throw new Error(`frame must be ${FRAME_BYTES} bytes, got ${bin.length}`);
  }
  const out = new Uint8Array(FRAME_BYTES);
  for (let i = 0; i < FRAME_BYTES; i++) out[i] = bin.charCodeAt(i);
  return out;
}

/** Expand grayscale bytes into an RGBA buffer for putImageData. */
export function grayToRgba(gray: Uint8Array): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(gray.length * 4);
  for (let i = 0; i < gray.length; i++) {
    const v = gray[i];
    const j = i * 4;
    rgba[j] = v;
    rgba[j + 1] = v;
    rgba[j + 2] = v;
    rgba[j + 3] = 255;
  }
  return rgba;
}

export function encodeFrameBase64(gray: Uint8Array): string {
  // test helper: inverse of decodeFrame
  let bin = "";
  const chunk = 8192;
  for (let i = 0; i < gray.length; i += chunk) {
    bin += String.fromCharCode(...gray.subarray(i, i + chunk));
  }
  return btoa(bin);
}
