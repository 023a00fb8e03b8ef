/** Error taxonomy mirroring the reference extractor's classification. */

export type ErrorKind = "syntax" | "unsupported" | "elaboration";

export class ExtractorError extends Error {
  readonly kind: ErrorKind;
  readonly line: number;
  readonly col: number;

  constructor(kind: ErrorKind, message: string, line = 0, col = 0) {
    super(line > 0 ? `${message} (line ${line}, col ${col})` : message);
    this.kind = kind;
    this.line = line;
    this.col = col;
  }
}

export function syntaxError(message: string, line = 0, col = 0): ExtractorError {
  return new ExtractorError("syntax", message, line, col);
}

export function unsupported(construct: string, line = 0, col = 0): ExtractorError {
  return new ExtractorError(
    "unsupported",
    `unsupported construct: ${construct}`,
    line,
    col,
  );
}

export function elaborationError(message: string): ExtractorError {
  return new ExtractorError("elaboration", message);
}
