/**
 * PageX: the static ceremony page.
 *
 * Reads mode/options/redirect_uri from its own query string, runs the
 * WebAuthn create or get ceremony entirely client-side, and navigates to
 * the redirect URI with the result (or an error code) in query parameters.
 * It performs no network requests of its own — in particular it never
 * calls any issuer endpoint — so hosting it on a dumb static file host is
 * all it takes.
 */

import {
  CreationOptions,
  RequestOptions,
  ResultEnvelope,
  b64urlToBytes,
  bytesToB64url,
  decodeOptionsParam,
  encodeResultParam,
} from "./envelope.js";

/** The slice of PublicKeyCredential surface PageX needs. */
export interface CeremonyCredential {
  rawId: ArrayBuffer;
  response: {
    clientDataJSON: ArrayBuffer;
    /** Assertion responses carry it directly. */
    authenticatorData?: ArrayBuffer;
    /** Attestation responses expose it through this accessor. */
    getAuthenticatorData?: () => ArrayBuffer;
    signature?: ArrayBuffer;
  };
}

/** navigator.credentials, or a virtual stand-in under test. */
export interface CredentialsApi {
  create(options: { publicKey: Record<string, unknown> }): Promise<CeremonyCredential>;
  get(options: { publicKey: Record<string, unknown> }): Promise<CeremonyCredential>;
}

export interface PageXEnvironment {
  /** Full URL of the PageX page, including the query string. */
  locationHref: string;
  credentials: CredentialsApi;
  navigate(url: string): void;
  showError(message: string): void;
}

export const ERROR_CEREMONY_ABORTED = "ceremony_aborted";

function appendParam(url: string, name: string, value: string): string {
  const separator = url.includes("?") ? "&" : "?";
  return `${url}${separator}${name}=${encodeURIComponent(value)}`;
}

function creationPublicKey(options: CreationOptions): Record<string, unknown> {
  const userId = new Uint8Array(16);
  crypto.getRandomValues(userId);
  return {
    rp: { id: options.rp_id, name: options.rp_id },
    user: {
      id: userId,
      name: options.user.email,
      displayName: options.user.name,
    },
    challenge: b64urlToBytes(options.challenge),
    pubKeyCredParams: [{ type: "public-key", alg: -7 }],
    attestation: "none",
    authenticatorSelection: { userVerification: "preferred" },
  };
}

function requestPublicKey(options: RequestOptions): Record<string, unknown> {
  return {
    rpId: options.rp_id,
    challenge: b64urlToBytes(options.challenge),
    allowCredentials: options.allow_credential_ids.map((id) => ({
      type: "public-key",
      id: b64urlToBytes(id),
    })),
    userVerification: "preferred",
  };
}

function resultFromCredential(credential: CeremonyCredential): ResultEnvelope {
  const response = credential.response;
  const authenticatorData = response.authenticatorData ??
    response.getAuthenticatorData?.();
  if (authenticatorData === undefined) {
    throw new Error("ceremony response carries no authenticator data");
  }
  const envelope: ResultEnvelope = {
    id: bytesToB64url(new Uint8Array(credential.rawId)),
    clientDataJSON: bytesToB64url(new Uint8Array(response.clientDataJSON)),
    authenticatorData: bytesToB64url(new Uint8Array(authenticatorData)),
  };
  if (response.signature !== undefined) {
    envelope.signature = bytesToB64url(new Uint8Array(response.signature));
  }
  return envelope;
}

/**
 * Run one ceremony from the page's own URL parameters.
 *
 * Malformed parameters show an inline error and never navigate; a failed
 * or cancelled ceremony navigates back with error=ceremony_aborted.
 */
export async function pagexRun(env: PageXEnvironment): Promise<void> {
  let params: URLSearchParams;
  try {
    params = new URL(env.locationHref).searchParams;
  } catch {
    env.showError("PageX was opened without a valid URL");
    return;
  }
  const mode = params.get("mode");
  const optionsParam = params.get("options");
  const redirectUri = params.get("redirect_uri");
  if (!mode || !optionsParam || !redirectUri) {
    env.showError("missing mode, options, or redirect_uri parameter");
    return;
  }
  if (mode !== "create" && mode !== "get") {
    env.showError(`unknown mode: ${mode}`);
    return;
  }
  let publicKey: Record<string, unknown>;
  try {
    const options = decodeOptionsParam(optionsParam);
    publicKey = mode === "create"
      ? creationPublicKey(options as CreationOptions)
      : requestPublicKey(options as RequestOptions);
  } catch (error) {
    env.showError(`options parameter does not decode: ${String(error)}`);
    return;
  }

  let credential: CeremonyCredential;
  try {
    credential = mode === "create"
      ? await env.credentials.create({ publicKey })
      : await env.credentials.get({ publicKey });
  } catch {
    env.navigate(appendParam(redirectUri, "error", ERROR_CEREMONY_ABORTED));
    return;
  }

  try {
    const envelope = resultFromCredential(credential);
    env.navigate(appendParam(redirectUri, "result", encodeResultParam(envelope)));
  } catch {
    env.navigate(appendParam(redirectUri, "error", ERROR_CEREMONY_ABORTED));
  }
}

/** Wire the real browser environment and run; called from pagex.html. */
export function browserMain(): Promise<void> {
  const statusElement = document.getElementById("status");
  return pagexRun({
    locationHref: window.location.href,
    credentials: navigator.credentials as unknown as CredentialsApi,
    navigate: (url) => window.location.assign(url),
    showError: (message) => {
      if (statusElement) {
        statusElement.textContent = message;
      }
    },
  });
}
