/**
 * Virtual authenticator: a WebCrypto-backed credentials container.
 *
 * Implements the same CredentialsApi surface PageX sees in a browser, so
 * scripted tests can run full ceremonies without hardware or a browser
 * WebAuthn stack. Emits standards-shaped output: CBOR COSE keys inside
 * attested credential data, DER ECDSA assertion signatures.
 */

import { CeremonyCredential, CredentialsApi } from "./pagex.js";

const FLAG_UP = 0x01;
const FLAG_AT = 0x40;

const AAGUID = new TextEncoder().encode("VPASS-VIRT-AUTH0"); // 16 bytes

interface StoredKey {
  rpId: string;
  credentialId: Uint8Array;
  keyPair: CryptoKeyPair;
  signCount: number;
}

function concat(...parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await crypto.subtle.digest("SHA-256", data as BufferSource));
}

function u16be(value: number): Uint8Array {
  return new Uint8Array([value >> 8, value & 0xff]);
}

function u32be(value: number): Uint8Array {
  return new Uint8Array([
    (value >>> 24) & 0xff,
    (value >>> 16) & 0xff,
    (value >>> 8) & 0xff,
    value & 0xff,
  ]);
}

/** Canonical CBOR map for an ES256 key: {1:2, 3:-7, -1:1, -2:x, -3:y}. */
function cborCoseKey(x: Uint8Array, y: Uint8Array): Uint8Array {
  return concat(
    new Uint8Array([0xa5, 0x01, 0x02, 0x03, 0x26, 0x20, 0x01, 0x21, 0x58, 0x20]),
    x,
    new Uint8Array([0x22, 0x58, 0x20]),
    y,
  );
}

/** Wrap a raw r||s WebCrypto signature as the DER form WebAuthn uses. */
export function rawSignatureToDer(raw: Uint8Array): Uint8Array {
  const encodeInt = (bytes: Uint8Array): Uint8Array => {
    let start = 0;
    while (start < bytes.length - 1 && bytes[start] === 0) {
      start++;
    }
    let body: Uint8Array = bytes.slice(start);
    if (body[0] & 0x80) {
      body = concat(new Uint8Array([0]), body);
    }
    return concat(new Uint8Array([0x02, body.length]), body);
  };
  const r = encodeInt(raw.slice(0, 32));
  const s = encodeInt(raw.slice(32));
  return concat(new Uint8Array([0x30, r.length + s.length]), r, s);
}

function toBytes(value: unknown): Uint8Array {
  if (value instanceof Uint8Array) {
    return value;
  }
  if (value instanceof ArrayBuffer) {
    return new Uint8Array(value);
  }
  throw new Error("expected a byte buffer");
}

function clientDataJson(type: string, challenge: Uint8Array, origin: string): Uint8Array {
  const challengeB64url = btoa(String.fromCharCode(...challenge))
    .replace(/\+/g, "-")
    .replace(/\//g, "_")
    .replace(/=+$/, "");
  return new TextEncoder().encode(
    JSON.stringify({ type, challenge: challengeB64url, origin }),
  );
}

export class VirtualAuthenticator implements CredentialsApi {
  private keys: StoredKey[] = [];

  constructor(private origin: string) {}

  async create(options: { publicKey: Record<string, unknown> }): Promise<CeremonyCredential> {
    const publicKey = options.publicKey;
    const rp = publicKey.rp as { id: string };
    const challenge = toBytes(publicKey.challenge);
    const keyPair = await crypto.subtle.generateKey(
      { name: "ECDSA", namedCurve: "P-256" },
      false,
      ["sign"],
    );
    const credentialId = new Uint8Array(32);
    crypto.getRandomValues(credentialId);
    this.keys.push({ rpId: rp.id, credentialId, keyPair, signCount: 0 });

    const rawPoint = new Uint8Array(
      await crypto.subtle.exportKey("raw", keyPair.publicKey),
    );
    const x = rawPoint.slice(1, 33);
    const y = rawPoint.slice(33, 65);
    const authData = concat(
      await sha256(new TextEncoder().encode(rp.id)),
      new Uint8Array([FLAG_UP | FLAG_AT]),
      u32be(0),
      AAGUID,
      u16be(credentialId.length),
      credentialId,
      cborCoseKey(x, y),
    );
    const clientData = clientDataJson("webauthn.create", challenge, this.origin);
    return {
      rawId: credentialId.buffer as ArrayBuffer,
      response: {
        clientDataJSON: clientData.buffer as ArrayBuffer,
        getAuthenticatorData: () => authData.buffer as ArrayBuffer,
      },
    };
  }

  async get(options: { publicKey: Record<string, unknown> }): Promise<CeremonyCredential> {
    const publicKey = options.publicKey;
    const rpId = publicKey.rpId as string;
    const challenge = toBytes(publicKey.challenge);
    const allowed = (publicKey.allowCredentials as { id: unknown }[] | undefined) ?? [];
    const allowedIds = allowed.map((entry) => toBytes(entry.id));
    const stored = this.keys.find(
      (key) =>
        key.rpId === rpId &&
        allowedIds.some(
          (id) =>
            id.length === key.credentialId.length &&
            id.every((byte, i) => byte === key.credentialId[i]),
        ),
    );
    if (stored === undefined) {
      throw new DOMException("no matching credential", "NotAllowedError");
    }
    stored.signCount += 1;
    const authData = concat(
      await sha256(new TextEncoder().encode(rpId)),
      new Uint8Array([FLAG_UP]),
      u32be(stored.signCount),
    );
    const clientData = clientDataJson("webauthn.get", challenge, this.origin);
    const message = concat(authData, await sha256(clientData));
    const rawSignature = new Uint8Array(
      await crypto.subtle.sign(
        { name: "ECDSA", hash: "SHA-256" },
        stored.keyPair.privateKey,
        message as BufferSource,
      ),
    );
    return {
      rawId: stored.credentialId.buffer as ArrayBuffer,
      response: {
        clientDataJSON: clientData.buffer as ArrayBuffer,
        authenticatorData: authData.buffer as ArrayBuffer,
        signature: rawSignatureToDer(rawSignature).buffer as ArrayBuffer,
      },
    };
  }
}
