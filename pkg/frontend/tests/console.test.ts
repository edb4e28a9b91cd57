// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';

import { mountApp } from '../src/main';
import type { JobView } from '../src/types';
import { MAP_HEIGHT, MAP_WIDTH, lonLatToXY } from '../src/worldmap';

/** Orchestrator API stand-in for the full console flow. */
function scriptedFetch() {
  const complete: JobView = {
    id: 'job-eu',
    state: 'complete',
    timings: {
      unmarshal_ms: 233.1,
      select_ms: 7.3,
      marshal_ms: 14.6,
      deploy_ms: 52.4,
      setup_ms: 307.4,
    },
    acks: { 'http://127.0.0.1:9101': 'ok' },
    descriptor_count: 130,
    error: null,
  };
  const states: JobView[] = [
    { ...complete, state: 'fetching', timings: { unmarshal_ms: null, select_ms: null, marshal_ms: null, deploy_ms: null, setup_ms: null }, acks: { 'http://127.0.0.1:9101': 'pending' } },
    complete,
  ];
  let polls = 0;
  const created: unknown[] = [];
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), { status });
    if (path.startsWith('/regions/sensors')) return json({ count: 5184, sensors: [] });
    if (path === '/jobs' && init?.method === 'POST') {
      created.push(JSON.parse(String(init.body)));
      return json({ id: 'job-eu' }, 201);
    }
    if (path.startsWith('/jobs/')) {
      const view = states[Math.min(polls, states.length - 1)];
      polls += 1;
      return json(view);
    }
    return json({ detail: 'not found' }, 404);
  };
  return { fetchImpl, created };
}

function flush(ms = 0): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

describe('console flow (scripted Europe scenario)', () => {
  it('draw Europe -> 5184 available -> submit 130 -> complete card', async () => {
    const { fetchImpl, created } = scriptedFetch();
    (globalThis as any).fetch = fetchImpl;

    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = mountApp(root, {
      apiBaseUrl: '',
      defaultTargets: ['http://127.0.0.1:9101'],
    });
    app.map.svg.getBoundingClientRect = () =>
      ({ left: 0, top: 0, width: MAP_WIDTH, height: MAP_HEIGHT }) as DOMRect;

    // draw the Europe rectangle on the map
    const [x0, y0] = lonLatToXY(-30, 80);
    const [x1, y1] = lonLatToXY(30, 40);
    app.map.svg.dispatchEvent(
      new MouseEvent('mousedown', { clientX: x0, clientY: y0, bubbles: true }),
    );
    app.map.svg.dispatchEvent(
      new MouseEvent('mouseup', { clientX: x1, clientY: y1, bubbles: true }),
    );
    await flush(); // allow the preview promise to settle

    const availableEl = root.querySelector('.draft-card .available');
    expect(availableEl?.textContent).toBe('5184');

    // configure 130 sensors and submit
    const requested = root.querySelector<HTMLInputElement>('.draft-card .requested')!;
    requested.value = '130';
    requested.dispatchEvent(new Event('change', { bubbles: true }));
    root.querySelector<HTMLButtonElement>('.submit-all')!.click();

    // tracker polls once per second; two polls reach the terminal state
    await flush(1100);
    await flush(1100);
    await flush();

    expect(created).toHaveLength(1);
    expect((created[0] as any).count).toBe(130);
    expect((created[0] as any).selector).toBe('topsis');

    const card = root.querySelector('.job-card')!;
    expect(card.querySelector('.state')!.textContent).toContain('complete');
    const rows = card.querySelectorAll('.phase-row');
    expect(rows).toHaveLength(4);
    for (const row of rows) {
      const ms = row.querySelector('.ms')!.textContent!;
      expect(Number.parseFloat(ms)).toBeGreaterThan(0);
    }
    const chip = card.querySelector('.ack-chip')!;
    expect(chip.className).toContain('ok');
    expect(chip.textContent).toContain('ok');
  }, 15000);

  it('zero-area click never creates a draft card', async () => {
    const { fetchImpl } = scriptedFetch();
    (globalThis as any).fetch = fetchImpl;
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = mountApp(root, { apiBaseUrl: '' });
    app.map.svg.getBoundingClientRect = () =>
      ({ left: 0, top: 0, width: MAP_WIDTH, height: MAP_HEIGHT }) as DOMRect;
    app.map.svg.dispatchEvent(
      new MouseEvent('mousedown', { clientX: 50, clientY: 50, bubbles: true }),
    );
    app.map.svg.dispatchEvent(
      new MouseEvent('mouseup', { clientX: 50, clientY: 50, bubbles: true }),
    );
    await flush();
    expect(root.querySelectorAll('.draft-card')).toHaveLength(0);
  });

  it('inline validation blocks oversubscribed drafts', async () => {
    const { fetchImpl, created } = scriptedFetch();
    (globalThis as any).fetch = fetchImpl;
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = mountApp(root, {
      apiBaseUrl: '',
      defaultTargets: ['http://127.0.0.1:9101'],
    });
    app.map.svg.getBoundingClientRect = () =>
      ({ left: 0, top: 0, width: MAP_WIDTH, height: MAP_HEIGHT }) as DOMRect;
    const [x0, y0] = lonLatToXY(-30, 80);
    const [x1, y1] = lonLatToXY(30, 40);
    app.map.svg.dispatchEvent(
      new MouseEvent('mousedown', { clientX: x0, clientY: y0, bubbles: true }),
    );
    app.map.svg.dispatchEvent(
      new MouseEvent('mouseup', { clientX: x1, clientY: y1, bubbles: true }),
    );
    await flush();

    const requested = root.querySelector<HTMLInputElement>('.draft-card .requested')!;
    requested.value = '99999';
    requested.dispatchEvent(new Event('change', { bubbles: true }));
    root.querySelector<HTMLButtonElement>('.submit-all')!.click();
    await flush();

    expect(created).toHaveLength(0);
    const validation = root.querySelector('.draft-card .validation')!;
    expect(validation.textContent).toMatch(/99999 > available 5184/);
  });
});
