/** Prompt template for open-vocabulary queries. */

export const DEFAULT_TEMPLATE = "a photo of a {obj}.";

export function applyTemplate(template: string, label: string): string {
  if (!template.includes("{obj}")) {
    throw new Error(`template ${JSON.stringify(template)} has no {obj} slot`);
  }
  return template.replaceAll("{obj}", label);
}
