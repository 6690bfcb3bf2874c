/** Thin typed client over the annotation service's JSON API. */
export class ApiClient {
    constructor(fetchFn) {
        this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    }
    async getJson(url) {
        const response = await this.fetchFn(url);
        if (!response.ok) {
            throw new Error(`GET ${url} failed with ${response.status}`);
        }
        return (await response.json());
    }
    listFrames(offset = 0, limit = 200) {
        return this.getJson(`/api/frames?offset=${offset}&limit=${limit}`);
    }
    getFrame(frameId) {
        return this.getJson(`/api/frames/${encodeURIComponent(frameId)}`);
    }
    getStats() {
        return this.getJson("/api/stats");
    }
    async saveAnnotation(frameId, update) {
        const response = await this.fetchFn(`/api/frames/${encodeURIComponent(frameId)}/annotation`, {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(update),
        });
        const body = await response.json();
        if (response.ok) {
            return { ok: true, record: body };
        }
        return {
            ok: false,
            status: response.status,
            error: typeof body?.error === "string" ? body.error : `save failed (${response.status})`,
            violations: Array.isArray(body?.violations) ? body.violations : [],
        };
    }
}
