import { describe, expect, it } from "vitest";

import { RetryQueue } from "../src/queue.js";

describe("RetryQueue", () => {
  it("drains queued mutations in order", async () => {
    const ran: string[] = [];
    const queue = new RetryQueue();
    queue.push({ label: "a", run: async () => void ran.push("a") });
    queue.push({ label: "b", run: async () => void ran.push("b") });
    expect(await queue.drain()).toBe(true);
    expect(ran).toEqual(["a", "b"]);
    expect(queue.size).toBe(0);
  });

  it("stops at the first failure and keeps order", async () => {
    const ran: string[] = [];
    let aFails = true;
    const queue = new RetryQueue();
    queue.push({
      label: "a",
      run: async () => {
        if (aFails) throw new Error("offline");
        ran.push("a");
      },
    });
    queue.push({ label: "b", run: async () => void ran.push("b") });

    expect(await queue.drain()).toBe(false);
    expect(ran).toEqual([]);
    expect(queue.size).toBe(2);

    aFails = false;
    expect(await queue.drain()).toBe(true);
    expect(ran).toEqual(["a", "b"]);
  });

  it("reports size changes", async () => {
    const sizes: number[] = [];
    const queue = new RetryQueue((n) => sizes.push(n));
    queue.push({ label: "a", run: async () => {} });
    await queue.drain();
    expect(sizes).toEqual([1, 0]);
  });
});
