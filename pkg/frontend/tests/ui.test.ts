/** Scripted browser test: a full session against the real service.
 *
 * Spawns the Python session service, mounts the app in jsdom, plays three
 * human proposals (the agent counters in between), accepts, checks that
 * rewards appear only after close, and submits one rating. Over-allocation
 * is verified blocked on both sides: the propose button disables in the
 * client, and a direct API call with an oversized request gets a 422.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { NegotiationApp } from "../src/app.js";
import { ApiError, SessionApi } from "../src/api.js";
import { PRESET_CONTEXT } from "../src/types.js";

const PORT = 18200 + Math.floor(Math.random() * 2000);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const resp = await fetch(`${BASE}/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "strategos-ui-"));
  service = spawn(
    "python3",
    ["-m", "strategos.cli", "serve", "--port", String(PORT), "--data", dataDir],
    { stdio: "ignore" },
  );
  await waitForHealth();
}, 30_000);

afterAll(() => {
  service?.kill();
});

function testid(id: string): HTMLElement {
  const node = document.querySelector(`[data-testid="${id}"]`);
  if (!node) throw new Error(`missing [data-testid=${id}]`);
  return node as HTMLElement;
}

function maybe(id: string): HTMLElement | null {
  return document.querySelector(`[data-testid="${id}"]`);
}

function click(id: string): void {
  const button = testid(id) as HTMLButtonElement;
  if (button.hasAttribute("disabled")) {
    throw new Error(`button ${id} is disabled`);
  }
  button.click();
}

async function until(
  predicate: () => boolean,
  what: string,
  timeoutMs = 10_000,
): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    if (predicate()) return;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

describe("full session through the real service", () => {
  it("plays three proposals, accepts, sees rewards only after close, rates once", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    new NegotiationApp(root, new SessionApi(BASE));

    // setup screen: preset deal shows the canonical pot
    click("start-preset");
    await until(() => maybe("game") !== null, "game screen");
    expect(testid("pot").textContent).toContain("book=1 hat=4 ball=1");
    expect(testid("values").textContent).toContain("book=0 hat=2 ball=4");

    // stepper bounding: the hat plus-button stops at the pot count
    for (let i = 0; i < 9; i++) {
      const plus = testid("plus-hat") as HTMLButtonElement;
      if (plus.hasAttribute("disabled")) break;
      plus.click();
      await until(
        () => true,
        "render",
        100,
      );
    }
    expect(testid("count-hat").textContent).toBe("4");
    (testid("plus-book") as HTMLButtonElement).click();
    await until(() => testid("count-book").textContent === "1", "book stepper");
    expect((testid("plus-book") as HTMLButtonElement).hasAttribute("disabled")).toBe(
      true,
    );

    // no rewards anywhere while open
    expect(maybe("rewards")).toBeNull();
    expect(maybe("agent-values")).toBeNull();

    // proposal 1: ask for 1 book + 4 hats; the agent counters
    click("propose");
    await until(
      () => document.querySelectorAll('[data-testid="timeline"] li').length >= 2,
      "agent reply in the timeline",
    );
    expect(testid("offer-1").textContent).toContain("You asked for");
    expect(testid("offer-2").textContent).toContain("Agent asked for");
    expect(maybe("rewards")).toBeNull();

    // proposal 2: concede a hat
    (testid("minus-hat") as HTMLButtonElement).click();
    await until(() => testid("count-hat").textContent === "3", "hat decrement");
    click("propose");
    await until(
      () => document.querySelectorAll('[data-testid="timeline"] li').length >= 4,
      "second agent reply",
    );

    // proposal 3: concede another hat
    (testid("minus-hat") as HTMLButtonElement).click();
    await until(() => testid("count-hat").textContent === "2", "hat decrement 2");
    click("propose");
    await until(
      () => document.querySelectorAll('[data-testid="timeline"] li').length >= 6,
      "third agent reply",
    );
    expect(testid("offers-left").textContent).toContain("0 of 6 offers left");

    // offers exhausted: propose is gated off client-side
    expect((testid("propose") as HTMLButtonElement).hasAttribute("disabled")).toBe(
      true,
    );

    // accept the agent's last counter; rewards appear only now
    click("accept");
    await until(() => maybe("outcome") !== null, "outcome panel");
    expect(testid("turn").textContent).toContain("accepted");
    expect(testid("rewards").textContent).toMatch(/You scored \d+/);
    expect(testid("agent-values").textContent).toContain("Agent's values were");

    // rating: incomplete first, then full; locks after submit
    click("rating-submit");
    await until(() => maybe("error") !== null, "validation message");
    for (const dim of ["humanlike", "reasonable", "aggressive", "compromising"]) {
      const input = testid(`rating-${dim}`) as HTMLInputElement;
      input.value = dim === "aggressive" ? "2" : "6";
      input.dispatchEvent(new window.Event("input"));
    }
    click("rating-submit");
    await until(() => maybe("rating-done") !== null, "rating confirmation");
    expect(maybe("rating-submit")).toBeNull(); // form locked
  }, 30_000);

  it("server rejects an over-allocated proposal that bypasses the client", async () => {
    const api = new SessionApi(BASE);
    const created = await api.createSession({
      context: PRESET_CONTEXT,
      method: "strategic",
    });
    await expect(
      api.sendAction(created.id, { action: "propose", allocation: [9, 9, 9] }),
    ).rejects.toMatchObject({ status: 422 });
    // the client-side mirror refuses the same request before any call
    const { overAllocated } = await import("../src/composer.js");
    expect(overAllocated([9, 9, 9], created.pot)).toBe(true);
  });

  it("rating before close is rejected by the service", async () => {
    const api = new SessionApi(BASE);
    const created = await api.createSession({
      context: { seed: 3 },
      method: "strategic",
    });
    await expect(
      api.submitRating(created.id, {
        humanlike: 5,
        reasonable: 5,
        aggressive: 5,
        compromising: 5,
      }),
    ).rejects.toMatchObject({ status: 409 });
  });

  it("surfaces a startup error when the server is unreachable", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    new NegotiationApp(root, new SessionApi("http://127.0.0.1:1"));
    click("start-random");
    await until(() => maybe("error") !== null, "error banner");
    expect(testid("error").textContent).toContain("Could not start");
    // the setup screen is still usable for a retry
    expect(maybe("start-random")).not.toBeNull();
  });
});
