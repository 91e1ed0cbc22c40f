import { describe, expect, it } from "vitest";

import {
  assignRank,
  emptyOrder,
  isCompleteRanking,
  pooledSlots,
  unassignRank,
} from "../src/rank.js";

const SLOTS = ["A", "B", "C"];

describe("rank order state", () => {
  it("starts empty with everything pooled", () => {
    const order = emptyOrder(3);
    expect(order).toEqual([null, null, null]);
    expect(pooledSlots(SLOTS, order)).toEqual(["A", "B", "C"]);
    expect(isCompleteRanking(order, SLOTS)).toBe(false);
  });

  it("assigns into a position and drains the pool", () => {
    let order = assignRank(emptyOrder(3), "B", 0);
    expect(order).toEqual(["B", null, null]);
    expect(pooledSlots(SLOTS, order)).toEqual(["A", "C"]);
    order = assignRank(order, "A", 2);
    order = assignRank(order, "C", 1);
    expect(order).toEqual(["B", "C", "A"]);
    expect(pooledSlots(SLOTS, order)).toEqual([]);
    expect(isCompleteRanking(order, SLOTS)).toBe(true);
  });

  it("moving a placed slot vacates its old position", () => {
    let order = assignRank(emptyOrder(3), "A", 0);
    order = assignRank(order, "A", 2);
    expect(order).toEqual([null, null, "A"]);
  });

  it("displaces the previous occupant back to the pool", () => {
    let order = assignRank(emptyOrder(3), "A", 0);
    order = assignRank(order, "B", 0);
    expect(order).toEqual(["B", null, null]);
    expect(pooledSlots(SLOTS, order)).toContain("A");
  });

  it("unassign returns a slot to the pool", () => {
    let order = assignRank(emptyOrder(3), "A", 1);
    order = unassignRank(order, "A");
    expect(order).toEqual([null, null, null]);
  });

  it("ignores out-of-range positions", () => {
    const order = emptyOrder(3);
    expect(assignRank(order, "A", -1)).toEqual([null, null, null]);
    expect(assignRank(order, "A", 3)).toEqual([null, null, null]);
  });

  it("never mutates its input", () => {
    const order = emptyOrder(3);
    assignRank(order, "A", 0);
    expect(order).toEqual([null, null, null]);
  });

  it("rejects non-permutations as incomplete", () => {
    expect(isCompleteRanking(["A", "A", "B"], SLOTS)).toBe(false);
    expect(isCompleteRanking(["A", "B"], SLOTS)).toBe(false);
    expect(isCompleteRanking(["A", "B", "D"], SLOTS)).toBe(false);
  });
});
