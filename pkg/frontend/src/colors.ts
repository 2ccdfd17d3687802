/** Deterministic class color: the label hashes to a hue, so colors are
 * stable across sessions and machines. */
export function classColor(label: string, saturation = 70, lightness = 55): string {
  let hash = 2166136261;
  for (let i = 0; i < label.length; i++) {
    hash ^= label.charCodeAt(i);
    hash = Math.imul(hash, 16777619);
  }
  const hue = ((hash % 360) + 360) % 360;
  return `hsl(${hue}, ${saturation}%, ${lightness}%)`;
}
