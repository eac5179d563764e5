/** Payload types mirroring the session-service wire format. */

export type ItemCounts = [number, number, number];

export const ITEM_NAMES = ["book", "hat", "ball"] as const;

export interface SessionCreated {
  id: string;
  pot: ItemCounts;
  human_values: ItemCounts;
  first: string;
  max_offers: number;
  offers_left: number;
}

export interface OfferRecord {
  actor: string;
  allocation: ItemCounts;
  offer_number: number;
}

export interface SessionState {
  id: string;
  method: string;
  outcome: "open" | "accepted" | "rejected";
  pot: ItemCounts;
  human_values: ItemCounts;
  on_turn: string | null;
  offers_left: number;
  max_offers: number;
  history: OfferRecord[];
  rating: Rating | null;
  // present only after the session closes
  rewards?: Record<string, number>;
  agent_values?: ItemCounts;
  accepted_allocation?: ItemCounts;
  accepted_by?: string;
}

export interface AgentReply {
  action: "propose" | "accept" | "reject";
  allocation: ItemCounts | null;
}

export interface ActionResponse {
  human_action: AgentReply;
  agent_reply: AgentReply | null;
  session: SessionState;
}

export interface Rating {
  humanlike: number;
  reasonable: number;
  aggressive: number;
  compromising: number;
}

export type HumanAction =
  | { action: "propose"; allocation: ItemCounts }
  | { action: "accept" }
  | { action: "reject" };

export interface NewSessionRequest {
  context: { seed: number } | {
    pot: ItemCounts;
    human_values: ItemCounts;
    agent_values: ItemCounts;
  };
  method: string;
}

/** The canonical preset deal (1 book, 4 hats, 1 ball). */
export const PRESET_CONTEXT = {
  pot: [1, 4, 1] as ItemCounts,
  human_values: [0, 2, 4] as ItemCounts,
  agent_values: [4, 1, 2] as ItemCounts,
};
