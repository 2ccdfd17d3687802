import { describe, expect, it, vi } from 'vitest';

import { MapApiClient } from '../src/client.js';

function fetchStub(handler: (url: string, init?: RequestInit) => unknown) {
  return vi.fn(async (url: string | URL | Request, init?: RequestInit) => {
    const body = handler(String(url), init);
    return { json: async () => body } as Response;
  }) as unknown as typeof fetch;
}

describe('MapApiClient commands', () => {
  it('posts JSON commands to /command', async () => {
    const calls: Array<{ url: string; body: unknown }> = [];
    const client = new MapApiClient({
      baseUrl: 'http://x/',
      fetchFn: fetchStub((url, init) => {
        calls.push({ url, body: init?.body && JSON.parse(String(init.body)) });
        return { ok: true };
      }),
    });
    const result = await client.sendCommand({ action: 'delete', id: 5 });
    expect(result.ok).toBe(true);
    expect(calls).toEqual([{ url: 'http://x/command', body: { action: 'delete', id: 5 } }]);
  });

  it('never sends the same command twice while one is in flight', async () => {
    let resolve!: (value: unknown) => void;
    const gate = new Promise((r) => (resolve = r));
    let posts = 0;
    const fetchFn = vi.fn(async () => {
      posts += 1;
      await gate;
      return { json: async () => ({ ok: true }) } as Response;
    }) as unknown as typeof fetch;

    const client = new MapApiClient({ baseUrl: 'http://x', fetchFn });
    const first = client.sendCommand({ action: 'goto', id: 1 });
    const second = client.sendCommand({ action: 'goto', id: 1 });
    expect(second).toBe(first); // same gesture, same promise
    expect(posts).toBe(1);
    resolve(null);
    await first;
    // After completion a new gesture posts again.
    const third = client.sendCommand({ action: 'goto', id: 1 });
    expect(third).not.toBe(first);
    await third;
    expect(posts).toBe(2);
  });

  it('distinct commands are not coalesced', async () => {
    let posts = 0;
    const client = new MapApiClient({
      baseUrl: 'http://x',
      fetchFn: fetchStub(() => {
        posts += 1;
        return { ok: true };
      }),
    });
    await Promise.all([
      client.sendCommand({ action: 'goto', id: 1 }),
      client.sendCommand({ action: 'goto', id: 2 }),
    ]);
    expect(posts).toBe(2);
  });
});

describe('MapApiClient events', () => {
  class FakeSocket {
    static instances: FakeSocket[] = [];
    onopen: ((ev: unknown) => void) | null = null;
    onmessage: ((ev: { data: unknown }) => void) | null = null;
    onclose: ((ev: unknown) => void) | null = null;
    onerror: ((ev: unknown) => void) | null = null;
    closed = false;
    constructor(public url: string) {
      FakeSocket.instances.push(this);
    }
    close() {
      this.closed = true;
      this.onclose?.({});
    }
  }

  it('parses events and reconnects after a drop', async () => {
    FakeSocket.instances = [];
    const events: unknown[] = [];
    let opens = 0;
    const client = new MapApiClient({
      baseUrl: 'http://host:1',
      webSocketCtor: FakeSocket as never,
      reconnectDelayMs: 1,
    });
    client.openEvents({
      onEvent: (e) => events.push(e),
      onOpen: () => opens++,
      onDown: () => undefined,
    });
    const socket = FakeSocket.instances[0];
    expect(socket.url).toBe('ws://host:1/events');
    socket.onopen?.({});
    socket.onmessage?.({ data: JSON.stringify({ type: 'ping' }) });
    socket.onmessage?.({ data: 'not json' }); // ignored
    expect(events).toEqual([{ type: 'ping' }]);

    socket.onclose?.({});
    await new Promise((r) => setTimeout(r, 10));
    expect(FakeSocket.instances.length).toBe(2);

    client.close();
    await new Promise((r) => setTimeout(r, 10));
    expect(FakeSocket.instances.length).toBe(2); // closed clients stay closed
  });
});
