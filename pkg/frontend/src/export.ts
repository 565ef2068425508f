/** Export helpers: interchange-format plan files and vector (SVG) images. */

import type { PlanRecord } from './types';

export function planToInterchangeLine(plan: PlanRecord): string {
  return JSON.stringify(plan);
}

export function svgMarkup(svg: SVGSVGElement): string {
  const clone = svg.cloneNode(true) as SVGSVGElement;
  clone.setAttribute('xmlns', 'http://www.w3.org/2000/svg');
  if (!clone.getAttribute('viewBox')) {
    clone.setAttribute('viewBox', '0 0 1000 1000');
  }
  return clone.outerHTML;
}

export function download(filename: string, mime: string, content: string): void {
  const blob = new Blob([content], { type: mime });
  const url = URL.createObjectURL(blob);
  const link = document.createElement('a');
  link.href = url;
  link.download = filename;
  document.body.appendChild(link);
  link.click();
  link.remove();
  URL.revokeObjectURL(url);
}
