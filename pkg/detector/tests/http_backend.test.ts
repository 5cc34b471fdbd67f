import * as path from "path";
import { describe, expect, it } from "vitest";

import { HttpBackend, decodePng } from "../src/backends";

const IMAGE = path.join(__dirname, "fixtures", "images", "c000000_0.png");

function stubFetch(detections: unknown[]) {
  const calls: { url: string; body: any }[] = [];
  const impl = (async (url: any, init: any) => {
    calls.push({ url: String(url), body: JSON.parse(init.body) });
    return {
      ok: true,
      status: 200,
      json: async () => ({ detections }),
    } as Response;
  }) as typeof fetch;
  return { impl, calls };
}

describe("http backend", () => {
  it("posts base64 image and prompt queries", async () => {
    const { impl, calls } = stubFetch([]);
    const backend = new HttpBackend("http://detector.local/detect", 8, impl);
    const image = decodePng(IMAGE);
    await backend.detect(image, [
      { label: "dog", prompt: "a photo of a dog." },
      { label: "cat", prompt: "a photo of a cat." },
    ]);
    expect(calls.length).toBe(1);
    expect(calls[0].url).toBe("http://detector.local/detect");
    expect(calls[0].body.queries).toEqual(["a photo of a dog.", "a photo of a cat."]);
    expect(typeof calls[0].body.image).toBe("string");
    expect(calls[0].body.image.length).toBeGreaterThan(100);
  });

  it("splits queries into batches and reindexes", async () => {
    const { impl, calls } = stubFetch([
      { query_index: 0, score: 0.5, box: [0, 0, 10, 10] },
    ]);
    const backend = new HttpBackend("http://detector.local/detect", 1, impl);
    const image = decodePng(IMAGE);
    const out = await backend.detect(image, [
      { label: "dog", prompt: "p0" },
      { label: "cat", prompt: "p1" },
    ]);
    expect(calls.length).toBe(2);
    expect(out.map((d) => d.queryIndex)).toEqual([0, 1]);
  });

  it("converts normalized boxes to pixel coordinates", async () => {
    const { impl } = stubFetch([
      { query_index: 0, score: 0.9, box: [0.25, 0.5, 0.75, 1.0], normalized: true },
    ]);
    const backend = new HttpBackend("http://detector.local/detect", 8, impl);
    const image = decodePng(IMAGE); // 128 x 96
    const out = await backend.detect(image, [{ label: "dog", prompt: "p" }]);
    expect(out[0].box).toEqual([32, 48, 96, 96]);
  });

  it("surfaces endpoint failures", async () => {
    const impl = (async () => ({ ok: false, status: 503 }) as Response) as typeof fetch;
    const backend = new HttpBackend("http://detector.local/detect", 8, impl);
    const image = decodePng(IMAGE);
    await expect(backend.detect(image, [{ label: "dog", prompt: "p" }])).rejects.toThrow(/503/);
  });
});
