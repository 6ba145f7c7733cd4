import { afterEach, beforeEach, describe, expect, it } from "vitest";

import {
  decodeResultParam,
  encodeOptionsParam,
  bytesToB64url,
} from "../src/envelope.js";
import {
  ERROR_CEREMONY_ABORTED,
  pagexRun,
  type CredentialsApi,
  type PageXEnvironment,
} from "../src/pagex.js";
import { VirtualAuthenticator } from "../src/virtual-authenticator.js";

const PAGEX_URL = "https://pagex.vpass.test/pagex.html";
const REDIRECT_URI = "https://issuer.vpass.test/enroll/finish?session=abc123";

function creationParams(): string {
  const challenge = new Uint8Array(32);
  crypto.getRandomValues(challenge);
  return encodeOptionsParam({
    rp_id: "pagex.vpass.test",
    challenge: bytesToB64url(challenge),
    user: { name: "Pat", email: "pat@example.org", phone: "+1555" },
  });
}

interface Recorded {
  navigations: string[];
  errors: string[];
}

function makeEnv(
  locationHref: string,
  credentials: CredentialsApi,
): { env: PageXEnvironment; recorded: Recorded } {
  const recorded: Recorded = { navigations: [], errors: [] };
  return {
    env: {
      locationHref,
      credentials,
      navigate: (url) => recorded.navigations.push(url),
      showError: (message) => recorded.errors.push(message),
    },
    recorded,
  };
}

describe("pagexRun", () => {
  let fetchCalls: string[];
  const realFetch = globalThis.fetch;

  beforeEach(() => {
    // Network audit: PageX must not make any request of its own.
    fetchCalls = [];
    globalThis.fetch = ((input: unknown, ...rest: unknown[]) => {
      fetchCalls.push(String(input));
      return (realFetch as any)(input, ...rest);
    }) as typeof fetch;
  });

  afterEach(() => {
    globalThis.fetch = realFetch;
  });

  it("runs a create ceremony and redirects with the result", async () => {
    const authenticator = new VirtualAuthenticator("https://pagex.vpass.test");
    const url =
      `${PAGEX_URL}?mode=create&options=${creationParams()}` +
      `&redirect_uri=${encodeURIComponent(REDIRECT_URI)}`;
    const { env, recorded } = makeEnv(url, authenticator);

    await pagexRun(env);

    expect(recorded.errors).toEqual([]);
    expect(recorded.navigations).toHaveLength(1);
    const target = new URL(recorded.navigations[0]);
    expect(target.origin + target.pathname).toBe(
      "https://issuer.vpass.test/enroll/finish",
    );
    expect(target.searchParams.get("session")).toBe("abc123");
    const envelope = decodeResultParam(target.searchParams.get("result")!);
    expect(envelope.signature).toBeUndefined();
    expect(envelope.id.length).toBeGreaterThan(0);
    expect(fetchCalls).toEqual([]);
  });

  it("runs a get ceremony after enrollment and includes a signature", async () => {
    const authenticator = new VirtualAuthenticator("https://pagex.vpass.test");
    const createUrl =
      `${PAGEX_URL}?mode=create&options=${creationParams()}` +
      `&redirect_uri=${encodeURIComponent(REDIRECT_URI)}`;
    const createRun = makeEnv(createUrl, authenticator);
    await pagexRun(createRun.env);
    const created = decodeResultParam(
      new URL(createRun.recorded.navigations[0]).searchParams.get("result")!,
    );

    const challenge = new Uint8Array(32);
    crypto.getRandomValues(challenge);
    const getUrl =
      `${PAGEX_URL}?mode=get&options=${encodeOptionsParam({
        rp_id: "pagex.vpass.test",
        challenge: bytesToB64url(challenge),
        allow_credential_ids: [created.id],
      })}&redirect_uri=${encodeURIComponent("https://rp.example/auth/finish?session=s1")}`;
    const getRun = makeEnv(getUrl, authenticator);

    await pagexRun(getRun.env);

    expect(getRun.recorded.errors).toEqual([]);
    const target = new URL(getRun.recorded.navigations[0]);
    const envelope = decodeResultParam(target.searchParams.get("result")!);
    expect(envelope.id).toBe(created.id);
    expect(envelope.signature).toBeDefined();
    expect(fetchCalls).toEqual([]);
  });

  it("redirects with error when the user cancels", async () => {
    const declining: CredentialsApi = {
      create: () => Promise.reject(new DOMException("denied", "NotAllowedError")),
      get: () => Promise.reject(new DOMException("denied", "NotAllowedError")),
    };
    const url =
      `${PAGEX_URL}?mode=create&options=${creationParams()}` +
      `&redirect_uri=${encodeURIComponent(REDIRECT_URI)}`;
    const { env, recorded } = makeEnv(url, declining);

    await pagexRun(env);

    expect(recorded.navigations).toHaveLength(1);
    const target = new URL(recorded.navigations[0]);
    expect(target.searchParams.get("error")).toBe(ERROR_CEREMONY_ABORTED);
    expect(target.searchParams.get("result")).toBeNull();
  });

  it("shows an inline error without navigating when redirect_uri is missing", async () => {
    const authenticator = new VirtualAuthenticator("https://pagex.vpass.test");
    const url = `${PAGEX_URL}?mode=create&options=${creationParams()}`;
    const { env, recorded } = makeEnv(url, authenticator);

    await pagexRun(env);

    expect(recorded.navigations).toEqual([]);
    expect(recorded.errors).toHaveLength(1);
  });

  it("shows an inline error for an unknown mode", async () => {
    const authenticator = new VirtualAuthenticator("https://pagex.vpass.test");
    const url =
      `${PAGEX_URL}?mode=attest&options=${creationParams()}` +
      `&redirect_uri=${encodeURIComponent(REDIRECT_URI)}`;
    const { env, recorded } = makeEnv(url, authenticator);

    await pagexRun(env);

    expect(recorded.navigations).toEqual([]);
    expect(recorded.errors).toHaveLength(1);
  });

  it("shows an inline error for undecodable options", async () => {
    const authenticator = new VirtualAuthenticator("https://pagex.vpass.test");
    const url =
      `${PAGEX_URL}?mode=create&options=%%%%` +
      `&redirect_uri=${encodeURIComponent(REDIRECT_URI)}`;
    const { env, recorded } = makeEnv(url, authenticator);

    await pagexRun(env);

    expect(recorded.navigations).toEqual([]);
    expect(recorded.errors).toHaveLength(1);
  });
});
