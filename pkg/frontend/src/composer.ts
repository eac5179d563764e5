/** Pure offer-composer logic: stepper bounds and action gating.
 *
 * The client mirrors the engine's over-allocation rule so an illegal
 * proposal can never be submitted; everything else (values, rewards) comes
 * from API payloads untouched.
 */

import type { ItemCounts, SessionState } from "./types.js";

export function clampCount(value: number, max: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.max(0, Math.min(Math.trunc(value), max));
}

export function stepCount(current: number, delta: 1 | -1, max: number): number {
  return clampCount(current + delta, max);
}

export function overAllocated(request: ItemCounts, pot: ItemCounts): boolean {
  return request.some((count, i) => count < 0 || count > (pot[i] ?? 0));
}

export interface ActionGates {
  proposeEnabled: boolean;
  acceptEnabled: boolean;
  rejectEnabled: boolean;
  reason: string;
}

export function actionGates(
  state: Pick<SessionState, "outcome" | "on_turn" | "offers_left" | "history" | "pot">,
  humanName: string,
  request: ItemCounts,
): ActionGates {
  if (state.outcome !== "open") {
    return {
      proposeEnabled: false,
      acceptEnabled: false,
      rejectEnabled: false,
      reason: "the session has ended",
    };
  }
  if (state.on_turn !== humanName) {
    return {
      proposeEnabled: false,
      acceptEnabled: false,
      rejectEnabled: false,
      reason: "waiting for the agent",
    };
  }
  const hasOffer = state.history.length > 0;
  if (overAllocated(request, state.pot)) {
    return {
      proposeEnabled: false,
      acceptEnabled: hasOffer,
      rejectEnabled: true,
      reason: "the request exceeds the pot",
    };
  }
  if (state.offers_left <= 0) {
    return {
      proposeEnabled: false,
      acceptEnabled: hasOffer,
      rejectEnabled: true,
      reason: "no proposals left; accept or reject",
    };
  }
  return {
    proposeEnabled: true,
    acceptEnabled: hasOffer,
    rejectEnabled: true,
    reason: "",
  };
}

export function offersUsedLabel(state: SessionState): string {
  const used = state.history.length;
  return `${state.offers_left} of ${state.max_offers} offers left (${used} made)`;
}
