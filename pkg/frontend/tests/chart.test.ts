import { describe, expect, it } from 'vitest'

import {
  buildTrajectorySeries,
  deflectionSeries,
  pointsAttribute,
  renderDeflectionSvg,
  renderTrajectorySvg,
  valueRange,
} from '../src/chart.js'
import type { Epa, HistoryStep, SessionView } from '../src/types.js'

function step(index: number, deflection: number, offset: number): HistoryStep {
  const epa = (base: number): Epa => [base, base + 0.1, base - 0.1]
  return {
    index,
    side: index % 2 === 0 ? 'actor' : 'object',
    behavior: 'greet',
    behavior_epa: epa(1),
    behavior_transient: epa(1 + offset),
    actor_transient: epa(0.5 + offset),
    object_transient: epa(-0.5 - offset),
    deflection,
  }
}

function view(steps: HistoryStep[]): SessionView {
  return {
    id: 'x',
    actor: { identity: 'employee' },
    object: { identity: 'employer', modifier: 'bossy' },
    coefficients: 'synthetic',
    fundamentals: { actor: [1.45, 0.52, 0.81], object: [-1.15, 1.8, 0.67] },
    transients: { actor: [0, 0, 0], object: [0, 0, 0] },
    deflection: 0,
    history: steps,
    created: 0,
    updated: 0,
  }
}

describe('trajectory series', () => {
  it('renders one point per event plus the initial sentiments', () => {
    const five = view([0.5, 1.2, 0.7, 2.1, 1.4].map((d, i) => step(i, d, i * 0.1)))
    const series = buildTrajectorySeries(five)
    expect(series).toHaveLength(6)
    for (const s of series) {
      expect(s.values).toHaveLength(6)
    }
  })

  it('zero events leaves a single point per series', () => {
    const series = buildTrajectorySeries(view([]))
    expect(series).toHaveLength(6)
    for (const s of series) {
      expect(s.values).toHaveLength(1)
    }
  })

  it('copies service numbers verbatim with no local arithmetic', () => {
    const v = view([step(0, 0.5, 0.25)])
    const series = buildTrajectorySeries(v)
    const actorE = series.find((s) => s.party === 'actor' && s.dimension === 'E')!
    expect(actorE.values[0]).toBe(v.fundamentals.actor[0])
    expect(actorE.values[1]).toBe(v.history[0].actor_transient[0])
    const objectA = series.find((s) => s.party === 'object' && s.dimension === 'A')!
    expect(objectA.values[1]).toBe(v.history[0].object_transient[2])
  })

  it('deflection series mirrors history', () => {
    const v = view([step(0, 0.5, 0), step(1, 2.25, 0.1)])
    expect(deflectionSeries(v)).toEqual([0.5, 2.25])
  })
})

describe('svg rendering', () => {
  it('emits a polyline per series', () => {
    const svg = renderTrajectorySvg(view([step(0, 1, 0)]))
    expect(svg.match(/<polyline/g)).toHaveLength(6)
    expect(svg).toContain('<svg viewBox="0 0 560 240"')
  })

  it('deflection bars match event count', () => {
    const svg = renderDeflectionSvg(view([step(0, 1, 0), step(1, 2, 0)]))
    expect(svg.match(/<rect/g)).toHaveLength(2)
  })

  it('points scale into the padded box', () => {
    const layout = { width: 100, height: 50, padding: 10 }
    const points = pointsAttribute([0, 1], layout, [0, 1])
    expect(points).toBe('10.0,40.0 90.0,10.0')
  })

  it('degenerate ranges widen instead of dividing by zero', () => {
    expect(valueRange([{ party: 'actor', dimension: 'E', values: [2, 2] }])).toEqual([1, 3])
  })
})
