// Instruction and comprehension-check content. Loaded from a static JSON
// file so the copy can be edited without rebuilding the app.

export interface QuizQuestion {
  prompt: string
  options: string[]
  answer: number
}

export interface InstructionContent {
  pages: string[]
  quiz: QuizQuestion[]
}

export async function loadContent(url = 'content/instructions.json'): Promise<InstructionContent> {
  const res = await fetch(url)
  if (!res.ok) throw new Error(`failed to load instructions: ${res.status}`)
  return res.json() as Promise<InstructionContent>
}

// Returns true when every answer index matches its question's answer key;
// a failed check sends the participant back to the instructions.
export function quizPassed(content: InstructionContent, answers: number[]): boolean {
  if (answers.length !== content.quiz.length) return false
  return content.quiz.every((q, i) => answers[i] === q.answer)
}
