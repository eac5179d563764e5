/** The negotiation client: setup screen, offer composer, timeline, rating.
 *
 * One active session per page. All reward numbers are rendered straight
 * from API payloads; the client computes no game values itself.
 */

import { ApiError, SessionApi } from "./api.js";
import { actionGates, offersUsedLabel, stepCount } from "./composer.js";
import {
  ITEM_NAMES,
  PRESET_CONTEXT,
  type ItemCounts,
  type Rating,
  type SessionState,
} from "./types.js";

const HUMAN_NAME = "Bob";
const METHODS = ["strategic", "strategic-no-belief", "fewshot"];
const RATING_DIMENSIONS: (keyof Rating)[] = [
  "humanlike",
  "reasonable",
  "aggressive",
  "compromising",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) node.textContent = text;
  return node;
}

export class NegotiationApp {
  private root: HTMLElement;
  private session: SessionState | null = null;
  private request: ItemCounts = [0, 0, 0];
  private ratingDraft: Partial<Rating> = {};
  private ratingSubmitted = false;
  private busy = false;

  constructor(
    root: HTMLElement,
    private api: SessionApi,
  ) {
    this.root = root;
    this.renderSetup();
  }

  // ---- setup screen -------------------------------------------------------

  private renderSetup(error = ""): void {
    this.root.replaceChildren();
    const panel = el("div", { "data-testid": "setup" });
    panel.append(el("h1", {}, "Negotiate a deal"));
    panel.append(
      el(
        "p",
        {},
        "Split a pot of books, hats and balls with the agent. You propose first; six offers at most.",
      ),
    );

    const methodSelect = el("select", { "data-testid": "method" });
    for (const method of METHODS) {
      methodSelect.append(el("option", { value: method }, method));
    }
    panel.append(el("label", {}, "Agent: "), methodSelect);

    const seedInput = el("input", {
      type: "number",
      value: "0",
      "data-testid": "seed",
    });
    const startRandom = el(
      "button",
      { "data-testid": "start-random" },
      "Start with random deal",
    );
    startRandom.onclick = () =>
      this.start(
        { context: { seed: Number(seedInput.value) || 0 }, method: methodSelect.value },
      );
    const startPreset = el(
      "button",
      { "data-testid": "start-preset" },
      "Start with the preset deal",
    );
    startPreset.onclick = () =>
      this.start({ context: PRESET_CONTEXT, method: methodSelect.value });

    panel.append(
      el("div", {}, "Seed: "),
      seedInput,
      startRandom,
      startPreset,
    );
    if (error) {
      panel.append(el("div", { "data-testid": "error", role: "alert" }, error));
    }
    this.root.append(panel);
  }

  private async start(request: {
    context: { seed: number } | typeof PRESET_CONTEXT;
    method: string;
  }): Promise<void> {
    try {
      const created = await this.api.createSession(request);
      this.session = await this.api.getSession(created.id);
      this.request = [0, 0, 0];
      this.render();
    } catch (e) {
      this.renderSetup(e instanceof Error ? `Could not start: ${e.message}` : "failed");
    }
  }

  // ---- game screen ----------------------------------------------------------

  private render(): void {
    const state = this.session;
    if (!state) return;
    this.root.replaceChildren();
    const panel = el("div", { "data-testid": "game" });

    const header = el("div", { "data-testid": "header" });
    header.append(el("h1", {}, "Your deal"));
    const potLine = ITEM_NAMES.map((n, i) => `${n}=${state.pot[i]}`).join(" ");
    header.append(el("div", { "data-testid": "pot" }, `Pot: ${potLine}`));
    const valueLine = ITEM_NAMES.map(
      (n, i) => `${n}=${state.human_values[i]}`,
    ).join(" ");
    header.append(
      el("div", { "data-testid": "values" }, `Your values: ${valueLine}`),
    );
    header.append(
      el("div", { "data-testid": "offers-left" }, offersUsedLabel(state)),
    );
    header.append(
      el(
        "div",
        { "data-testid": "turn" },
        state.outcome !== "open"
          ? `Outcome: ${state.outcome}`
          : state.on_turn === HUMAN_NAME
            ? "Your turn"
            : "Agent's turn",
      ),
    );
    panel.append(header);

    panel.append(this.renderTimeline(state));
    if (state.outcome === "open") {
      panel.append(this.renderComposer(state));
    } else {
      panel.append(this.renderOutcome(state));
    }
    this.root.append(panel);
  }

  private renderTimeline(state: SessionState): HTMLElement {
    const list = el("ol", { "data-testid": "timeline" });
    for (const offer of state.history) {
      const who = offer.actor === HUMAN_NAME ? "You" : "Agent";
      const items = ITEM_NAMES.map((n, i) => `${n}=${offer.allocation[i]}`).join(" ");
      list.append(
        el(
          "li",
          { "data-testid": `offer-${offer.offer_number}` },
          `${who} asked for ${items}`,
        ),
      );
    }
    return list;
  }

  private renderComposer(state: SessionState): HTMLElement {
    const composer = el("div", { "data-testid": "composer" });
    composer.append(el("h2", {}, "Your counter-offer (what you keep)"));
    ITEM_NAMES.forEach((name, i) => {
      const row = el("div", {});
      row.append(el("span", {}, `${name}: `));
      const minus = el("button", { "data-testid": `minus-${name}` }, "-");
      const count = el(
        "span",
        { "data-testid": `count-${name}` },
        String(this.request[i]),
      );
      const plus = el("button", { "data-testid": `plus-${name}` }, "+");
      const max = state.pot[i] ?? 0;
      minus.onclick = () => {
        this.request[i] = stepCount(this.request[i] ?? 0, -1, max);
        this.render();
      };
      plus.onclick = () => {
        this.request[i] = stepCount(this.request[i] ?? 0, 1, max);
        this.render();
      };
      if ((this.request[i] ?? 0) <= 0) minus.setAttribute("disabled", "");
      if ((this.request[i] ?? 0) >= max) plus.setAttribute("disabled", "");
      row.append(minus, count, plus, el("span", {}, ` of ${max}`));
      composer.append(row);
    });

    const gates = actionGates(state, HUMAN_NAME, this.request);
    const propose = el("button", { "data-testid": "propose" }, "Propose");
    const accept = el("button", { "data-testid": "accept" }, "Accept their offer");
    const reject = el("button", { "data-testid": "reject" }, "Reject and end");
    if (!gates.proposeEnabled || this.busy) propose.setAttribute("disabled", "");
    if (!gates.acceptEnabled || this.busy) accept.setAttribute("disabled", "");
    if (!gates.rejectEnabled || this.busy) reject.setAttribute("disabled", "");
    propose.onclick = () =>
      this.act({ action: "propose", allocation: [...this.request] as ItemCounts });
    accept.onclick = () => this.act({ action: "accept" });
    reject.onclick = () => this.act({ action: "reject" });
    composer.append(propose, accept, reject);
    if (gates.reason) {
      composer.append(el("div", { "data-testid": "gate-reason" }, gates.reason));
    }
    return composer;
  }

  private async act(action: Parameters<SessionApi["sendAction"]>[1]): Promise<void> {
    const state = this.session;
    if (!state || this.busy) return;
    this.busy = true;
    this.render();
    try {
      const response = await this.api.sendAction(state.id, action);
      this.session = response.session;
    } catch (e) {
      if (e instanceof ApiError) {
        // 409/422: reconcile with the server's view of the session
        this.session = await this.api.getSession(state.id);
        this.render();
        this.root
          .querySelector('[data-testid="game"]')
          ?.append(el("div", { "data-testid": "error", role: "alert" }, e.message));
        this.busy = false;
        return;
      }
      throw e;
    } finally {
      this.busy = false;
    }
    this.render();
  }

  // ---- outcome + rating -----------------------------------------------------

  private renderOutcome(state: SessionState): HTMLElement {
    const panel = el("div", { "data-testid": "outcome" });
    panel.append(el("h2", {}, `Deal ${state.outcome}`));
    if (state.rewards) {
      const yours = state.rewards[HUMAN_NAME];
      const theirs = Object.entries(state.rewards).find(([k]) => k !== HUMAN_NAME);
      panel.append(
        el(
          "div",
          { "data-testid": "rewards" },
          `You scored ${yours}; the agent scored ${theirs ? theirs[1] : "?"}.`,
        ),
      );
    }
    if (state.agent_values) {
      const line = ITEM_NAMES.map((n, i) => `${n}=${state.agent_values![i]}`).join(" ");
      panel.append(
        el("div", { "data-testid": "agent-values" }, `Agent's values were: ${line}`),
      );
    }
    panel.append(this.renderRatingForm(state));
    return panel;
  }

  private renderRatingForm(state: SessionState): HTMLElement {
    const form = el("div", { "data-testid": "rating-form" });
    if (state.rating || this.ratingSubmitted) {
      form.append(
        el("div", { "data-testid": "rating-done" }, "Thanks for your rating!"),
      );
      return form;
    }
    form.append(el("h3", {}, "Rate the agent (1-7)"));
    for (const dim of RATING_DIMENSIONS) {
      const row = el("div", {});
      row.append(el("label", {}, `${dim}: `));
      const input = el("input", {
        type: "number",
        min: "1",
        max: "7",
        "data-testid": `rating-${dim}`,
      });
      input.oninput = () => {
        this.ratingDraft[dim] = Number(input.value);
      };
      if (this.ratingDraft[dim] !== undefined) {
        input.value = String(this.ratingDraft[dim]);
      }
      row.append(input);
      form.append(row);
    }
    const submit = el("button", { "data-testid": "rating-submit" }, "Submit rating");
    submit.onclick = async () => {
      const state2 = this.session;
      if (!state2) return;
      const draft = this.ratingDraft;
      const complete = RATING_DIMENSIONS.every(
        (d) => typeof draft[d] === "number" && draft[d]! >= 1 && draft[d]! <= 7,
      );
      if (!complete) {
        form.append(
          el("div", { "data-testid": "error", role: "alert" }, "fill all four scales 1-7"),
        );
        return;
      }
      try {
        await this.api.submitRating(state2.id, draft as Rating);
        this.ratingSubmitted = true;
      } catch (e) {
        if (e instanceof ApiError && e.status === 409) {
          this.ratingSubmitted = true; // someone beat us to it; reconcile
        } else {
          // network trouble: keep the draft so the user can retry
          form.append(
            el("div", { "data-testid": "error", role: "alert" }, "submit failed, try again"),
          );
          return;
        }
      }
      this.session = await this.api.getSession(state2.id);
      this.render();
    };
    form.append(submit);
    return form;
  }
}

export function mount(root: HTMLElement, baseUrl: string): NegotiationApp {
  return new NegotiationApp(root, new SessionApi(baseUrl));
}
