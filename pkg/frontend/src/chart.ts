import type { Epa, HistoryStep, SessionView, Side } from './types.js'

// Pure transforms from session views to chart series, plus a dependency-free
// SVG line chart. No EPA arithmetic happens here beyond scaling to pixels.

export type Dimension = 'E' | 'P' | 'A'

export interface TrajectorySeries {
  party: Side
  dimension: Dimension
  values: number[]
}

const DIMENSIONS: Dimension[] = ['E', 'P', 'A']

function transientOf(step: HistoryStep, party: Side): Epa {
  return party === 'actor' ? step.actor_transient : step.object_transient
}

/**
 * One series per (party, dimension): the fundamentals point ("s") followed
 * by the transient after each event, so n events yield n + 1 points.
 */
export function buildTrajectorySeries(view: SessionView): TrajectorySeries[] {
  const series: TrajectorySeries[] = []
  for (const party of ['actor', 'object'] as Side[]) {
    DIMENSIONS.forEach((dimension, axis) => {
      const values = [view.fundamentals[party][axis]]
      for (const step of view.history) {
        values.push(transientOf(step, party)[axis])
      }
      series.push({ party, dimension, values })
    })
  }
  return series
}

export function deflectionSeries(view: SessionView): number[] {
  return view.history.map((step) => step.deflection)
}

export interface ChartLayout {
  width: number
  height: number
  padding: number
}

export const DEFAULT_LAYOUT: ChartLayout = { width: 560, height: 240, padding: 24 }

export function valueRange(series: TrajectorySeries[]): [number, number] {
  let low = Number.POSITIVE_INFINITY
  let high = Number.NEGATIVE_INFINITY
  for (const s of series) {
    for (const v of s.values) {
      low = Math.min(low, v)
      high = Math.max(high, v)
    }
  }
  if (!Number.isFinite(low)) {
    return [-1, 1]
  }
  if (low === high) {
    return [low - 1, high + 1]
  }
  return [low, high]
}

export function pointsAttribute(
  values: number[],
  layout: ChartLayout,
  range: [number, number],
): string {
  const [low, high] = range
  const innerWidth = layout.width - 2 * layout.padding
  const innerHeight = layout.height - 2 * layout.padding
  const step = values.length > 1 ? innerWidth / (values.length - 1) : 0
  return values
    .map((value, i) => {
      const x = layout.padding + i * step
      const y = layout.padding + (1 - (value - low) / (high - low)) * innerHeight
      return `${x.toFixed(1)},${y.toFixed(1)}`
    })
    .join(' ')
}

const SERIES_COLORS: Record<string, string> = {
  'actor:E': '#1c7ed6',
  'actor:P': '#1098ad',
  'actor:A': '#74b816',
  'object:E': '#e8590c',
  'object:P': '#d6336c',
  'object:A': '#9c36b5',
}

export function seriesColor(series: TrajectorySeries): string {
  return SERIES_COLORS[`${series.party}:${series.dimension}`] ?? '#495057'
}

/** Standalone SVG markup for the trajectory chart. */
export function renderTrajectorySvg(
  view: SessionView,
  layout: ChartLayout = DEFAULT_LAYOUT,
): string {
  const series = buildTrajectorySeries(view)
  const range = valueRange(series)
  const lines = series
    .map((s) => {
      const points = pointsAttribute(s.values, layout, range)
      return (
        `<polyline fill="none" stroke="${seriesColor(s)}" stroke-width="1.5" points="${points}">` +
        `<title>${s.party} ${s.dimension}</title></polyline>`
      )
    })
    .join('')
  const zeroY =
    layout.padding +
    (1 - (0 - range[0]) / (range[1] - range[0])) * (layout.height - 2 * layout.padding)
  const axis =
    range[0] < 0 && range[1] > 0
      ? `<line x1="${layout.padding}" y1="${zeroY.toFixed(1)}" x2="${layout.width - layout.padding}" y2="${zeroY.toFixed(1)}" stroke="#ced4da" stroke-dasharray="4 3"/>`
      : ''
  return (
    `<svg viewBox="0 0 ${layout.width} ${layout.height}" xmlns="http://www.w3.org/2000/svg">` +
    axis +
    lines +
    '</svg>'
  )
}

/** Simple bar chart markup for per-event deflection. */
export function renderDeflectionSvg(
  view: SessionView,
  layout: ChartLayout = { width: 560, height: 120, padding: 16 },
): string {
  const values = deflectionSeries(view)
  if (values.length === 0) {
    return `<svg viewBox="0 0 ${layout.width} ${layout.height}" xmlns="http://www.w3.org/2000/svg"></svg>`
  }
  const peak = Math.max(...values, 1e-9)
  const innerWidth = layout.width - 2 * layout.padding
  const innerHeight = layout.height - 2 * layout.padding
  const barWidth = innerWidth / values.length
  const bars = values
    .map((value, i) => {
      const height = (value / peak) * innerHeight
      const x = layout.padding + i * barWidth + 2
      const y = layout.height - layout.padding - height
      return (
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(barWidth - 4).toFixed(1)}" ` +
        `height="${height.toFixed(1)}" fill="#868e96"><title>step ${i}: ${value}</title></rect>`
      )
    })
    .join('')
  return (
    `<svg viewBox="0 0 ${layout.width} ${layout.height}" xmlns="http://www.w3.org/2000/svg">` +
    bars +
    '</svg>'
  )
}
