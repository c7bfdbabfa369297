// TCP client for the hub: sends bits, requests predictions and feedback.
//
// Input transmission never waits on the network: while the socket is
// down, outgoing lines queue locally and flush in order on reconnect.

import net from "node:net";

import {
  Bit, ClientMessage, FeedbackEntry, LineSplitter, decodeLine, encodeLine,
} from "./protocol.js";

export class DisconnectedError extends Error {}

interface Pending<T> {
  resolve: (value: T) => void;
  reject: (err: Error) => void;
}

export class HubClient {
  private socket: net.Socket | null = null;
  private splitter = new LineSplitter();
  private outbox: string[] = [];
  private predictWaiters: Pending<Bit>[] = [];
  private feedbackWaiters: Pending<FeedbackEntry[]>[] = [];
  private seq = 0;
  connected = false;

  constructor(
    readonly host: string,
    readonly port: number,
    readonly user: string,
  ) {}

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host: this.host, port: this.port });
      socket.setNoDelay(true);
      socket.once("connect", () => {
        this.socket = socket;
        this.connected = true;
        this.push({ type: "hello", user: this.user });
        this.flush();
        resolve();
      });
      socket.once("error", (err) => {
        if (!this.connected) reject(err);
      });
      socket.on("data", (data) => {
        for (const line of this.splitter.push(data.toString("ascii"))) {
          this.dispatch(decodeLine(line));
        }
      });
      socket.on("close", () => {
        this.connected = false;
        this.socket = null;
        // resolving these is impossible now; the caller retries after reconnect
        for (const waiter of this.predictWaiters.splice(0)) {
          waiter.reject(new DisconnectedError("connection lost"));
        }
        for (const waiter of this.feedbackWaiters.splice(0)) {
          waiter.reject(new DisconnectedError("connection lost"));
        }
      });
    });
  }

  private dispatch(message: ReturnType<typeof decodeLine>): void {
    if (message.type === "prediction") {
      this.predictWaiters.shift()?.resolve(message.bit);
    } else if (message.type === "feedback") {
      this.feedbackWaiters.shift()?.resolve(message.per_lab);
    } else if (message.type === "error") {
      const err = new Error(message.error);
      (this.predictWaiters.shift() ?? this.feedbackWaiters.shift())?.reject(err);
    }
  }

  private push(message: ClientMessage): void {
    this.outbox.push(encodeLine(message));
    this.flush();
  }

  private flush(): void {
    if (!this.connected || this.socket === null) return;
    while (this.outbox.length > 0) {
      this.socket.write(this.outbox.shift()!);
    }
  }

  /** Queue a bit for transmission; buffered while offline, never dropped. */
  sendBit(bit: Bit): void {
    this.push({ type: "bits", user: this.user, seq: this.seq++,
                payload: String(bit), ts: Date.now() / 1000 });
  }

  sendBits(payload: string): void {
    this.push({ type: "bits", user: this.user, seq: this.seq++, payload,
                ts: Date.now() / 1000 });
  }

  predict(): Promise<Bit> {
    if (!this.connected) {
      return Promise.reject(new DisconnectedError("offline"));
    }
    const promise = new Promise<Bit>((resolve, reject) => {
      this.predictWaiters.push({ resolve, reject });
    });
    this.push({ type: "predict?", user: this.user });
    return promise;
  }

  missionDone(n: number): Promise<FeedbackEntry[]> {
    const promise = new Promise<FeedbackEntry[]>((resolve, reject) => {
      this.feedbackWaiters.push({ resolve, reject });
    });
    this.push({ type: "mission_done", user: this.user, n });
    return promise;
  }

  get buffered(): number {
    return this.outbox.length;
  }

  close(): void {
    this.socket?.end();
    this.socket = null;
    this.connected = false;
  }
}
