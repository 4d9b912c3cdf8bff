// WebSocket bridge client with auto-retry. The WebSocket constructor is
// injectable so node tests can pass the `ws` implementation.

export interface Snapshot {
  type: "snapshot";
  t_ms: number;
  drone: {
    x: number;
    y: number;
    z: number;
    yaw: number;
    velocity: [number, number, number];
    battery: number;
    flying: boolean;
    sim_time_ms: number;
  };
  view: string | null;
  last_gesture: { name: string; timestamp_ms: number; frame_index: number } | null;
  distance: { continuous_cm: number; posterior: number[]; argmax_class_cm: number } | null;
  mode: string;
  frames_ingested: number;
  photos: number;
}

export type BridgeStatus = "connecting" | "open" | "closed";

type WebSocketLike = {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
};

type WebSocketCtor = new (url: string) => WebSocketLike;

export class BridgeClient {
  url: string;
  status: BridgeStatus = "closed";
  onSnapshot: ((snap: Snapshot) => void) | null = null;
  onAck: ((msg: Record<string, unknown>) => void) | null = null;
  onStatus: ((status: BridgeStatus) => void) | null = null;
  retryMs: number;

  private ws: WebSocketLike | null = null;
  private ctor: WebSocketCtor;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(url: string, ctor?: WebSocketCtor, retryMs = 1000) {
    this.url = url;
    this.retryMs = retryMs;
    this.ctor = ctor ?? ((globalThis as Record<string, unknown>).WebSocket as WebSocketCtor);
    if (!this.ctor) throw new Error("no WebSocket implementation available");
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.setStatus("connecting");
    const ws = new this.ctor(this.url);
    this.ws = ws;
    ws.onopen = () => this.setStatus("open");
    ws.onmessage = (ev) => {
      let msg: Record<string, unknown>;
      try {
        msg = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      if (msg.type === "snapshot" && this.onSnapshot) this.onSnapshot(msg as unknown as Snapshot);
      else if ((msg.type === "ack" || msg.type === "error") && this.onAck) this.onAck(msg);
    };
    ws.onerror = () => {};
    ws.onclose = () => {
      this.ws = null;
      this.setStatus("closed");
      if (!this.closed) {
        this.timer = setTimeout(() => this.open(), this.retryMs);
      }
    };
  }

  private setStatus(status: BridgeStatus): void {
    if (this.status !== status) {
      this.status = status;
      if (this.onStatus) this.onStatus(status);
    }
  }

  /** Send raw text; false (nothing sent) when the socket is not open. */
  send(data: string): boolean {
    if (this.status !== "open" || !this.ws) return false;
    this.ws.send(data);
    return true;
  }

  sendControl(record: Record<string, unknown>): boolean {
    return this.send(JSON.stringify(record));
  }

  close(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    if (this.ws) this.ws.close();
    this.setStatus("closed");
  }
}
