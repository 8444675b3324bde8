/** Color scale shared by tree nodes: white at 0, fully red at 1. */

export function intensityToColor(intensity: number): string {
  const clamped = Math.min(Math.max(intensity, 0), 1);
  const channel = Math.round(255 * (1 - clamped));
  return `rgb(255, ${channel}, ${channel})`;
}

/** Dark text stays readable on light fills, light text on saturated red. */
export function labelColorFor(intensity: number): string {
  return intensity > 0.6 ? '#ffffff' : '#1e293b';
}
