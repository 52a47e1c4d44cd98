// DOM rendering for the experiment screens: instructions with a
// comprehension check, the three-airline choice screen with counters and
// outcome feedback, and the completion screen with the bonus amount.

import { bindAirlineKeys, AIRLINE_KEYS } from './keyboard.js'
import { InstructionContent, quizPassed } from './content.js'
import { SessionDriver, SessionView, BONUS_PER_ON_TIME } from './session.js'

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

// Instruction pages followed by the comprehension check; wrong answers loop
// back to the first instruction page. Resolves when the check is passed.
export function renderInstructions(
  root: HTMLElement,
  content: InstructionContent,
): Promise<void> {
  const doc = root.ownerDocument
  return new Promise((resolve) => {
    let page = 0

    const showPage = () => {
      root.innerHTML = ''
      const box = el(doc, 'div', 'instructions')
      box.appendChild(el(doc, 'p', 'instruction-text', content.pages[page]))
      const next = el(doc, 'button', 'next-button',
        page < content.pages.length - 1 ? 'Next' : 'Start the check')
      next.addEventListener('click', () => {
        page += 1
        if (page < content.pages.length) showPage()
        else showQuiz()
      })
      box.appendChild(next)
      root.appendChild(box)
    }

    const showQuiz = () => {
      root.innerHTML = ''
      const form = el(doc, 'div', 'quiz')
      const selections: number[] = content.quiz.map(() => -1)
      content.quiz.forEach((q, qi) => {
        const block = el(doc, 'div', 'quiz-question')
        block.appendChild(el(doc, 'p', 'quiz-prompt', q.prompt))
        q.options.forEach((opt, oi) => {
          const label = el(doc, 'label', 'quiz-option')
          const radio = el(doc, 'input') as HTMLInputElement
          radio.type = 'radio'
          radio.name = `q${qi}`
          radio.addEventListener('change', () => { selections[qi] = oi })
          label.appendChild(radio)
          label.appendChild(doc.createTextNode(opt))
          block.appendChild(label)
        })
        form.appendChild(block)
      })
      const submit = el(doc, 'button', 'quiz-submit', 'Submit answers')
      submit.addEventListener('click', () => {
        if (quizPassed(content, selections)) {
          resolve()
        } else {
          page = 0
          showPage() // failing answers loop back to the instructions
        }
      })
      form.appendChild(submit)
      root.appendChild(form)
    }

    showPage()
  })
}

export function renderChoiceScreen(root: HTMLElement, driver: SessionDriver): () => void {
  const doc = root.ownerDocument
  root.innerHTML = ''

  const counters = el(doc, 'div', 'counters')
  const routeCounter = el(doc, 'span', 'counter route-counter')
  const flightCounter = el(doc, 'span', 'counter flight-counter')
  const pointsCounter = el(doc, 'span', 'counter points-counter')
  counters.append(routeCounter, flightCounter, pointsCounter)

  const feedback = el(doc, 'div', 'feedback')
  const buttons = el(doc, 'div', 'airline-buttons')
  const banner = el(doc, 'div', 'error-banner')
  banner.style.display = 'none'

  const choose = async (airline: number) => {
    if (driver.current.phase !== 'choosing') return
    try {
      banner.style.display = 'none'
      await driver.choose(airline)
    } catch {
      banner.textContent = 'Connection problem — please try again.'
      banner.style.display = 'block'
    }
  }

  driver.current.airlineNames.forEach((name, idx) => {
    const btn = el(doc, 'button', 'airline-button', `${name} (${AIRLINE_KEYS[idx]})`)
    btn.addEventListener('click', () => { void choose(idx) })
    buttons.appendChild(btn)
  })
  const unbindKeys = bindAirlineKeys(
    doc,
    driver.current.airlineNames.length,
    (airline) => { void choose(airline) },
  )

  const update = (v: SessionView) => {
    routeCounter.textContent = `Route ${v.route} / ${v.routeCount}`
    flightCounter.textContent = `Flight ${v.flight} / ${v.flightCount}`
    pointsCounter.textContent = `Points: ${v.points}`
    if (v.phase === 'feedback') {
      feedback.textContent = v.lastOutcome === 1 ? 'ON TIME' : 'DELAYED'
      feedback.className = `feedback ${v.lastOutcome === 1 ? 'on-time' : 'delayed'}`
    } else {
      feedback.textContent = ''
    }
    buttons.querySelectorAll('button').forEach((b) => {
      ;(b as HTMLButtonElement).disabled = v.phase !== 'choosing'
    })
  }

  driver.onChange(update)
  update(driver.current)
  root.append(counters, feedback, buttons, banner)
  return unbindKeys
}

export function renderCompletion(root: HTMLElement, view: SessionView): void {
  const doc = root.ownerDocument
  root.innerHTML = ''
  const box = el(doc, 'div', 'completion')
  box.appendChild(el(doc, 'h2', undefined, 'All routes complete!'))
  box.appendChild(el(doc, 'p', 'final-points', `Total points: ${view.points}`))
  box.appendChild(el(doc, 'p', 'final-on-time', `On-time flights: ${view.onTime}`))
  const bonus = (view.onTime * BONUS_PER_ON_TIME).toFixed(2)
  box.appendChild(el(doc, 'p', 'final-bonus', `Bonus: $${bonus}`))
  root.appendChild(box)
}
