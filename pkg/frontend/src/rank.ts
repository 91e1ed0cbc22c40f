/**
 * Pure ranking-state helpers.
 *
 * A ranking in progress is a fixed-length array of rank positions: entry i
 * holds the plan slot the participant put at rank i+1, or null while that
 * rank is still open. Plan slots live in a pool until placed, so partial
 * states are first-class and the submit gate can see them.
 */

export type RankOrder = (string | null)[];

export function emptyOrder(size: number): RankOrder {
  return new Array(size).fill(null);
}

/** Slots not yet placed at any rank, in served order. */
export function pooledSlots(slots: readonly string[], order: RankOrder): string[] {
  return slots.filter((s) => !order.includes(s));
}

/**
 * Place `slot` at rank `position` (0-based). The slot leaves its previous
 * rank if it had one; whatever occupied the target rank returns to the pool.
 */
export function assignRank(order: RankOrder, slot: string, position: number): RankOrder {
  if (position < 0 || position >= order.length) return order.slice();
  const next = order.map((s) => (s === slot ? null : s));
  next[position] = slot;
  return next;
}

export function unassignRank(order: RankOrder, slot: string): RankOrder {
  return order.map((s) => (s === slot ? null : s));
}

export function isCompleteRanking(order: RankOrder, slots: readonly string[]): boolean {
  if (order.length !== slots.length || order.some((s) => s === null)) return false;
  return [...order].sort().join("") === [...slots].sort().join("");
}
