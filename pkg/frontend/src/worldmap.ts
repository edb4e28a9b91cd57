import { CONTINENT_OUTLINES } from './outlines';
import type { BBox } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';

/** Equirectangular world extent in projected units. */
export const MAP_WIDTH = 720;
export const MAP_HEIGHT = 360;

export function lonLatToXY(lon: number, lat: number): [number, number] {
  return [((lon + 180) / 360) * MAP_WIDTH, ((90 - lat) / 180) * MAP_HEIGHT];
}

export function xyToLonLat(x: number, y: number): [number, number] {
  return [(x / MAP_WIDTH) * 360 - 180, 90 - (y / MAP_HEIGHT) * 180];
}

/** Convert a drawn pixel rectangle into a lat/lon bounding box. */
export function rectToBBox(x0: number, y0: number, x1: number, y1: number): BBox {
  const [lonA, latA] = xyToLonLat(Math.min(x0, x1), Math.min(y0, y1));
  const [lonB, latB] = xyToLonLat(Math.max(x0, x1), Math.max(y0, y1));
  return {
    min_lon: Math.max(-180, lonA),
    max_lon: Math.min(180, lonB),
    min_lat: Math.max(-90, latB),
    max_lat: Math.min(90, latA),
  };
}

export interface WorldMapOptions {
  /** Called when the user finishes drawing a non-degenerate rectangle. */
  onRegionDrawn: (bbox: BBox) => void;
}

/**
 * SVG world map with pan/zoom (viewBox-based) and drag-to-draw region
 * rectangles. Holding Shift pans; a plain drag draws a selection.
 */
export class WorldMap {
  readonly svg: SVGSVGElement;
  private viewBox = { x: 0, y: 0, w: MAP_WIDTH, h: MAP_HEIGHT };
  private drawing: { x0: number; y0: number; rect: SVGRectElement } | null = null;
  private panning: { startX: number; startY: number; vx: number; vy: number } | null = null;
  private readonly regionLayer: SVGGElement;

  constructor(
    container: HTMLElement,
    private readonly options: WorldMapOptions,
  ) {
    this.svg = document.createElementNS(SVG_NS, 'svg');
    this.svg.setAttribute('class', 'worldmap');
    this.svg.setAttribute('width', '100%');
    this.applyViewBox();

    const land = document.createElementNS(SVG_NS, 'g');
    land.setAttribute('class', 'land');
    for (const [name, ring] of Object.entries(CONTINENT_OUTLINES)) {
      const polygon = document.createElementNS(SVG_NS, 'polygon');
      polygon.setAttribute('data-continent', name);
      polygon.setAttribute(
        'points',
        ring.map(([lon, lat]) => lonLatToXY(lon, lat).join(',')).join(' '),
      );
      land.appendChild(polygon);
    }
    this.svg.appendChild(land);

    this.regionLayer = document.createElementNS(SVG_NS, 'g');
    this.regionLayer.setAttribute('class', 'regions');
    this.svg.appendChild(this.regionLayer);

    this.svg.addEventListener('mousedown', (event) => this.onMouseDown(event as MouseEvent));
    this.svg.addEventListener('mousemove', (event) => this.onMouseMove(event as MouseEvent));
    this.svg.addEventListener('mouseup', (event) => this.onMouseUp(event as MouseEvent));
    this.svg.addEventListener('wheel', (event) => this.onWheel(event as WheelEvent));
    container.appendChild(this.svg);
  }

  private applyViewBox(): void {
    const { x, y, w, h } = this.viewBox;
    this.svg.setAttribute('viewBox', `${x} ${y} ${w} ${h}`);
  }

  /** Map client coordinates into projected map units. */
  private toMapXY(event: MouseEvent): [number, number] {
    const bounds = this.svg.getBoundingClientRect();
    const width = bounds.width || MAP_WIDTH;
    const height = bounds.height || MAP_HEIGHT;
    const x = this.viewBox.x + ((event.clientX - bounds.left) / width) * this.viewBox.w;
    const y = this.viewBox.y + ((event.clientY - bounds.top) / height) * this.viewBox.h;
    return [x, y];
  }

  private onMouseDown(event: MouseEvent): void {
    const [x, y] = this.toMapXY(event);
    if (event.shiftKey) {
      this.panning = { startX: x, startY: y, vx: this.viewBox.x, vy: this.viewBox.y };
      return;
    }
    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.setAttribute('class', 'selection-draft');
    this.regionLayer.appendChild(rect);
    this.drawing = { x0: x, y0: y, rect };
  }

  private onMouseMove(event: MouseEvent): void {
    if (this.panning) {
      const [x, y] = this.toMapXY(event);
      this.viewBox.x = this.panning.vx + (this.panning.startX - x);
      this.viewBox.y = this.panning.vy + (this.panning.startY - y);
      this.applyViewBox();
      return;
    }
    if (!this.drawing) return;
    const [x, y] = this.toMapXY(event);
    const { x0, y0, rect } = this.drawing;
    rect.setAttribute('x', String(Math.min(x0, x)));
    rect.setAttribute('y', String(Math.min(y0, y)));
    rect.setAttribute('width', String(Math.abs(x - x0)));
    rect.setAttribute('height', String(Math.abs(y - y0)));
  }

  private onMouseUp(event: MouseEvent): void {
    if (this.panning) {
      this.panning = null;
      return;
    }
    if (!this.drawing) return;
    const { x0, y0, rect } = this.drawing;
    this.drawing = null;
    const [x1, y1] = this.toMapXY(event);
    if (x0 === x1 || y0 === y1) {
      rect.remove(); // zero-area click: no selection
      return;
    }
    rect.setAttribute('class', 'selection');
    this.options.onRegionDrawn(rectToBBox(x0, y0, x1, y1));
  }

  private onWheel(event: WheelEvent): void {
    event.preventDefault();
    const factor = event.deltaY > 0 ? 1.2 : 1 / 1.2;
    const [cx, cy] = this.toMapXY(event as unknown as MouseEvent);
    const w = Math.min(MAP_WIDTH * 2, Math.max(20, this.viewBox.w * factor));
    const h = (w / MAP_WIDTH) * MAP_HEIGHT;
    this.viewBox = {
      x: cx - ((cx - this.viewBox.x) / this.viewBox.w) * w,
      y: cy - ((cy - this.viewBox.y) / this.viewBox.h) * h,
      w,
      h,
    };
    this.applyViewBox();
  }

  /** Number of committed selection rectangles currently on the map. */
  get selectionCount(): number {
    return this.regionLayer.querySelectorAll('rect.selection').length;
  }
}
