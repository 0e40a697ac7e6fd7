/** Request/reply WebSocket client.
 *
 * Every request gets a fresh seq; the promise it returns resolves with the
 * reply echoing that seq (Error replies resolve too — the caller inspects
 * the type).  Pushed frames never resolve a request.  Every sent request
 * and every received document is also forwarded to the sink, in order, so
 * a `reduce` fold over the sink stream sees the whole session.
 */

import { isPush, parseServerMsg, PROTO_VERSION } from "./protocol.js";
import type { ClientMsg, SentMsg, ServerMsg, WelcomeMsg } from "./protocol.js";
import type { UiEvent } from "./state.js";

/** The part of the WebSocket surface the client uses; both the browser's
 * WebSocket and the `ws` package satisfy it. */
export interface WsLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type Sink = (ev: UiEvent) => void;

export class GridhouseClient {
  private seq = 0;
  private waiters = new Map<number, (msg: ServerMsg) => void>();
  private closed: Error | null = null;

  private constructor(
    private readonly sock: WsLike,
    private readonly sink: Sink,
  ) {}

  /** Open a socket and wire it up; resolves once the connection is live. */
  static open(makeSocket: () => WsLike, sink: Sink = () => {}): Promise<GridhouseClient> {
    return new Promise((resolve, reject) => {
      const sock = makeSocket();
      const client = new GridhouseClient(sock, sink);
      sock.onopen = () => resolve(client);
      sock.onerror = (ev) => {
        const err = new Error(`websocket error: ${String(ev)}`);
        if (client.closed === null) client.fail(err);
        reject(err);
      };
      sock.onclose = () => {
        if (client.closed === null) client.fail(new Error("connection closed"));
      };
      sock.onmessage = (ev) => client.receive(ev.data);
    });
  }

  private fail(err: Error): void {
    this.closed = err;
    // a closed socket answers nobody; unblock every in-flight request
    for (const [, resolve] of this.waiters) {
      resolve({ type: "Error", seq: null, code: "ProtocolError", message: err.message });
    }
    this.waiters.clear();
  }

  private receive(data: unknown): void {
    const text = typeof data === "string" ? data : String(data);
    const msg = parseServerMsg(text);
    this.sink({ dir: "received", msg });
    if (isPush(msg)) return;
    if (msg.seq !== null) {
      const resolve = this.waiters.get(msg.seq);
      if (resolve) {
        this.waiters.delete(msg.seq);
        resolve(msg);
      }
    }
  }

  /** Send one request; resolves with its reply. */
  request(msg: ClientMsg): Promise<ServerMsg> {
    if (this.closed) return Promise.reject(this.closed);
    const sent: SentMsg = { ...msg, seq: ++this.seq };
    return new Promise((resolve) => {
      this.waiters.set(sent.seq, resolve);
      this.sink({ dir: "sent", msg: sent });
      this.sock.send(JSON.stringify(sent));
    });
  }

  /** Handshake; rejects when the server speaks another protocol version. */
  async hello(): Promise<WelcomeMsg> {
    const reply = await this.request({ type: "Hello", proto_version: PROTO_VERSION });
    if (reply.type !== "Welcome") {
      throw new Error(`handshake refused: ${JSON.stringify(reply)}`);
    }
    return reply;
  }

  close(): void {
    if (this.closed === null) this.closed = new Error("closed by client");
    this.sock.onclose = null;
    this.sock.close();
  }
}
