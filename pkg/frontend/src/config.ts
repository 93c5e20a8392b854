/**
 * Label strings shown to evaluators. Swap this file (or its values) to run
 * the study in another language; nothing else in the client carries prose.
 */

export const LIKERT_LABELS: ReadonlyMap<number, string> = new Map([
  [5, "Excellent"],
  [4, "Good"],
  [3, "Fair or OK"],
  [2, "Poor"],
  [1, "Bad"],
]);

export const STRINGS = {
  title: "Listening test",
  enrollPrompt: "Enter your evaluator ID to begin.",
  enrollPlaceholder: "evaluator ID",
  enrollButton: "Start",
  enrollEmpty: "Please enter a non-empty ID.",
  naturalnessQuestion: "Is this sample human speech or synthesized?",
  naturalnessReal: "Real",
  naturalnessArtificial: "Artificial",
  likertQuestion: "Rate the overall quality:",
  playFirst: "Play the sample at least once before submitting.",
  submit: "Submit",
  retry: "Retry",
  doneThanks: "All done, thank you for participating!",
  progressLabel: "Progress",
  networkError: "Could not reach the server.",
} as const;
