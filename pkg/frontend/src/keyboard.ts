// Input mapping: '0'/'1' keys plus two named touch targets.

import { Bit } from "./protocol.js";

export function keyToBit(key: string): Bit | null {
  if (key === "0" || key === "left") return 0;
  if (key === "1" || key === "right") return 1;
  return null;
}

export interface KeyEmitter {
  on(event: "key", handler: (key: string) => void): void;
}

export function attachInput(
  emitter: KeyEmitter,
  accept: (bit: Bit) => void,
): void {
  emitter.on("key", (key) => {
    const bit = keyToBit(key);
    if (bit !== null) accept(bit);
  });
}
