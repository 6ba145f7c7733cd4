/**
 * Query-parameter envelopes shared with the issuer and verifier services.
 *
 * Everything travels as base64url (no padding) of compact JSON. The field
 * names here are a wire contract; they must match the services exactly.
 */

const B64URL_RE = /^[A-Za-z0-9_-]*$/;

export function bytesToB64url(bytes: Uint8Array): string {
  let binary = "";
  for (const byte of bytes) {
    binary += String.fromCharCode(byte);
  }
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

export function b64urlToBytes(text: string): Uint8Array {
  if (!B64URL_RE.test(text) || text.length % 4 === 1) {
    throw new Error(`not unpadded base64url: ${text}`);
  }
  const padded = text.replace(/-/g, "+").replace(/_/g, "/").padEnd(
    text.length + ((4 - (text.length % 4)) % 4),
    "=",
  );
  const binary = atob(padded);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return bytes;
}

export interface CreationOptions {
  rp_id: string;
  challenge: string; // base64url
  user: { name: string; email: string; phone: string };
}

export interface RequestOptions {
  rp_id: string;
  challenge: string; // base64url
  allow_credential_ids: string[]; // base64url
}

export type CeremonyOptions = CreationOptions | RequestOptions;

/** Ceremony result envelope; `signature` is present only for assertions. */
export interface ResultEnvelope {
  id: string;
  clientDataJSON: string;
  authenticatorData: string;
  signature?: string;
}

const textDecoder = new TextDecoder();
const textEncoder = new TextEncoder();

export function decodeOptionsParam(param: string): CeremonyOptions {
  const parsed = JSON.parse(textDecoder.decode(b64urlToBytes(param)));
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("options envelope must be a JSON object");
  }
  const options = parsed as Record<string, unknown>;
  if (typeof options.rp_id !== "string" || typeof options.challenge !== "string") {
    throw new Error("options envelope needs rp_id and challenge");
  }
  return parsed as CeremonyOptions;
}

export function encodeOptionsParam(options: CeremonyOptions): string {
  return bytesToB64url(textEncoder.encode(JSON.stringify(options)));
}

export function encodeResultParam(envelope: ResultEnvelope): string {
  return bytesToB64url(textEncoder.encode(JSON.stringify(envelope)));
}

export function decodeResultParam(param: string): ResultEnvelope {
  const parsed = JSON.parse(textDecoder.decode(b64urlToBytes(param)));
  for (const field of ["id", "clientDataJSON", "authenticatorData"]) {
    if (typeof parsed[field] !== "string") {
      throw new Error(`result envelope missing ${field}`);
    }
  }
  return parsed as ResultEnvelope;
}
