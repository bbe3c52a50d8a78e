// Small DOM builder; enough structure that screens stay readable without a
// framework.

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child);
  }
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (SVGElement | string)[]
): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  node.append(...children);
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild !== null) node.removeChild(node.firstChild);
}

/** Date input value ("2026-08-14") to an RFC-3339 instant, or undefined. */
export function dayStart(value: string): string | undefined {
  return value === "" ? undefined : `${value}T00:00:00Z`;
}

export function dayEnd(value: string): string | undefined {
  return value === "" ? undefined : `${value}T23:59:59Z`;
}
