// Keyboard shortcuts for the choice screen: one key per airline.

export const AIRLINE_KEYS = ['1', '2', '3']

export function airlineForKey(key: string, numAirlines: number): number | null {
  const idx = AIRLINE_KEYS.indexOf(key)
  return idx >= 0 && idx < numAirlines ? idx : null
}

export function bindAirlineKeys(
  target: EventTarget,
  numAirlines: number,
  onAirline: (airline: number) => void,
): () => void {
  const handler = (e: Event) => {
    const idx = airlineForKey((e as KeyboardEvent).key, numAirlines)
    if (idx !== null) onAirline(idx)
  }
  target.addEventListener('keydown', handler)
  return () => target.removeEventListener('keydown', handler)
}
