// Fixed-capacity FIFO; old entries fall off the front.

export class RingBuffer<T> {
  private items: T[] = [];

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error(`capacity must be >= 1, got ${capacity}`);
  }

  push(item: T): void {
    this.items.push(item);
    if (this.items.length > this.capacity) {
      this.items.splice(0, this.items.length - this.capacity);
    }
  }

  get length(): number {
    return this.items.length;
  }

  at(i: number): T | undefined {
    return this.items[i];
  }

  last(): T | undefined {
    return this.items[this.items.length - 1];
  }

  toArray(): readonly T[] {
    return this.items;
  }

  clear(): void {
    this.items = [];
  }
}
