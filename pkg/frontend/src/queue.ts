/** Retry queue for failed mutations: strict order, one in flight. */

export interface PendingMutation {
  label: string;
  run: () => Promise<void>;
}

export class RetryQueue {
  private items: PendingMutation[] = [];
  private draining = false;

  constructor(private onChange: (size: number) => void = () => {}) {}

  get size(): number {
    return this.items.length;
  }

  push(item: PendingMutation): void {
    this.items.push(item);
    this.onChange(this.items.length);
  }

  /**
   * Re-run queued mutations in order; stops at the first failure so
   * ordering is preserved. Returns true when the queue emptied.
   */
  async drain(): Promise<boolean> {
    if (this.draining) return this.items.length === 0;
    this.draining = true;
    try {
      while (this.items.length > 0) {
        try {
          await this.items[0].run();
        } catch {
          return false;
        }
        this.items.shift();
        this.onChange(this.items.length);
      }
      return true;
    } finally {
      this.draining = false;
    }
  }
}
