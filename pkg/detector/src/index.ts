export { DetectorBackend, DecodedImage, HttpBackend, Query, RawDetection, RectBackend, decodePng, loadPalette } from "./backends";
export { AdapterJob, JobResult, detectAll } from "./detect";
export { readCaptions } from "./manifest";
export { readJsonl, writeJsonlAtomic } from "./jsonl";
export { CaptionLineSchema, DetectionsLineSchema, DetectionSchema, PROVENANCE_KEY } from "./schema";
export { DEFAULT_TEMPLATE, applyTemplate } from "./template";
