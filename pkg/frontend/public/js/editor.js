/**
 * Annotation editor for one frame: six category pickers, the LiDAR-derived
 * intensity pre-fill (marked Auto until a human overrides it), client-side
 * constraint checks, and inline rendering of server-side violations.
 *
 * Only fields the user actually touched are sent on save, so an untouched
 * auto suggestion keeps its Auto provenance on the server.
 */
import { FIELD_LABELS, FIELD_VALUES } from "./types.js";
import { emptyDraft, isComplete, violations } from "./validate.js";
const FIELD_ORDER = [
    "daytime",
    "precipitation_kind",
    "precipitation_intensity",
    "fog",
    "road",
    "roadside",
    "infrastructure",
];
function draftFromRecord(record) {
    const draft = emptyDraft();
    if (record) {
        for (const field of FIELD_ORDER) {
            draft[field] = record[field];
        }
    }
    return draft;
}
export class AnnotationEditor {
    constructor(client, frame, options = {}) {
        this.client = client;
        this.frame = frame;
        this.options = options;
        this.touched = new Set();
        this.intensityIsAuto = false;
        this.focusIndex = 0;
        this.saving = false;
        this.draft = draftFromRecord(frame.annotation);
        const provenance = frame.annotation?.provenance.precipitation ?? "Unset";
        if (this.draft.precipitation_intensity !== null) {
            this.intensityIsAuto = provenance === "Auto";
        }
        else if (frame.auto_suggestion !== null &&
            provenance !== "Human" &&
            this.draft.precipitation_kind !== "None") {
            // Pre-fill from the live suggestion; stays Auto until overridden.
            this.draft.precipitation_intensity = frame.auto_suggestion.intensity;
            this.intensityIsAuto = true;
        }
        this.element = document.createElement("div");
        this.element.className = "editor";
        this.render();
    }
    isDirty() {
        return this.touched.size > 0;
    }
    focusedField() {
        const field = FIELD_ORDER[this.focusIndex];
        return field ?? "daytime";
    }
    moveFocus(delta) {
        const n = FIELD_ORDER.length;
        this.focusIndex = (this.focusIndex + delta + n) % n;
        this.render();
    }
    /** Number-key selection: 1..k pick a value in the focused row, 0 clears. */
    chooseDigit(digit) {
        const field = this.focusedField();
        if (digit === 0) {
            this.setValue(field, null);
            return;
        }
        const value = FIELD_VALUES[field][digit - 1];
        if (value !== undefined) {
            this.setValue(field, value);
        }
    }
    setValue(field, value) {
        if (field === "precipitation_intensity" && this.draft.precipitation_kind === "None") {
            return; // picker is disabled; ignore stray input
        }
        this.draft[field] = value;
        this.touched.add(field);
        if (field === "precipitation_intensity") {
            this.intensityIsAuto = false;
        }
        if (field === "precipitation_kind" && value === "None") {
            // Constraint mirror: "no precipitation" clears the intensity.
            if (this.draft.precipitation_intensity !== null) {
                this.draft.precipitation_intensity = null;
                if (!this.intensityIsAuto) {
                    this.touched.add("precipitation_intensity");
                }
                else {
                    this.touched.delete("precipitation_intensity");
                }
                this.intensityIsAuto = false;
            }
        }
        this.options.onDirtyChange?.(this.isDirty());
        this.render();
    }
    async save() {
        if (this.saving)
            return;
        const clientViolations = violations(this.draft);
        if (clientViolations.length > 0) {
            this.renderViolations(clientViolations, "rejected locally");
            return;
        }
        const update = {};
        for (const field of this.touched) {
            update[field] = this.draft[field];
        }
        if (Object.keys(update).length === 0) {
            return;
        }
        this.saving = true;
        try {
            const result = await this.client.saveAnnotation(this.frame.frame_id, update);
            if (result.ok) {
                this.frame = { ...this.frame, annotation: result.record };
                this.draft = draftFromRecord(result.record);
                this.touched.clear();
                this.intensityIsAuto =
                    result.record.provenance.precipitation === "Auto" &&
                        result.record.precipitation_intensity !== null;
                this.options.onDirtyChange?.(false);
                this.render();
                this.setStatusLine("saved");
                this.options.onSaved?.(result.record);
            }
            else {
                this.render();
                this.renderViolations(result.violations, result.error);
            }
        }
        finally {
            this.saving = false;
        }
    }
    setStatusLine(text) {
        const line = this.element.querySelector(".save-state");
        if (line)
            line.textContent = text;
    }
    renderViolations(items, heading) {
        const list = this.element.querySelector(".violations");
        if (!list)
            return;
        list.textContent = "";
        const title = document.createElement("li");
        title.className = "violations-heading";
        title.textContent = heading;
        list.appendChild(title);
        for (const item of items) {
            const li = document.createElement("li");
            li.className = "violation";
            li.textContent = `${item.category}: ${item.message}`;
            list.appendChild(li);
        }
    }
    render() {
        this.element.textContent = "";
        const image = document.createElement("div");
        image.className = "editor-image";
        const img = document.createElement("img");
        img.src = this.frame.image_url;
        img.alt = this.frame.frame_id;
        image.appendChild(img);
        this.element.appendChild(image);
        const form = document.createElement("div");
        form.className = "editor-form";
        const suggestion = document.createElement("div");
        suggestion.className = "suggestion";
        if (this.frame.auto_suggestion) {
            const pct = (this.frame.auto_suggestion.clutter_fraction * 100).toFixed(1);
            suggestion.textContent =
                `Auto suggestion: ${this.frame.auto_suggestion.intensity} intensity ` +
                    `(clutter ${pct}%)`;
        }
        else {
            suggestion.textContent = "Auto suggestion: none (no point cloud)";
        }
        form.appendChild(suggestion);
        FIELD_ORDER.forEach((field, index) => {
            form.appendChild(this.renderRow(field, index));
        });
        const actions = document.createElement("div");
        actions.className = "editor-actions";
        const save = document.createElement("button");
        save.className = "save";
        save.textContent = "Save";
        save.disabled = !this.isDirty() || violations(this.draft).length > 0;
        save.addEventListener("click", () => void this.save());
        actions.appendChild(save);
        const state = document.createElement("span");
        state.className = "save-state";
        state.textContent = this.isDirty() ? "unsaved changes" : "";
        actions.appendChild(state);
        const completion = document.createElement("span");
        completion.className = "completion";
        completion.textContent = isComplete(this.draft) ? "complete" : "incomplete";
        actions.appendChild(completion);
        form.appendChild(actions);
        const list = document.createElement("ul");
        list.className = "violations";
        form.appendChild(list);
        this.element.appendChild(form);
    }
    renderRow(field, index) {
        const row = document.createElement("div");
        row.className = "category-row";
        row.dataset.field = field;
        if (index === this.focusIndex) {
            row.dataset.focused = "true";
        }
        row.addEventListener("click", () => {
            if (this.focusIndex !== index) {
                this.focusIndex = index;
                this.render();
            }
        });
        const label = document.createElement("span");
        label.className = "category-label";
        label.textContent = FIELD_LABELS[field];
        row.appendChild(label);
        const intensityDisabled = field === "precipitation_intensity" && this.draft.precipitation_kind === "None";
        if (field === "precipitation_intensity" && this.intensityIsAuto) {
            const badge = document.createElement("span");
            badge.className = "auto-badge";
            badge.textContent = "Auto";
            row.appendChild(badge);
        }
        const choices = document.createElement("div");
        choices.className = "choices";
        FIELD_VALUES[field].forEach((value, valueIndex) => {
            const button = document.createElement("button");
            button.className = "choice";
            button.dataset.value = value;
            button.textContent = `${valueIndex + 1} ${value}`;
            button.disabled = intensityDisabled;
            if (this.draft[field] === value) {
                button.dataset.selected = "true";
            }
            button.addEventListener("click", (event) => {
                event.stopPropagation();
                this.focusIndex = index;
                this.setValue(field, value);
            });
            choices.appendChild(button);
        });
        const clear = document.createElement("button");
        clear.className = "choice choice-clear";
        clear.textContent = "0 clear";
        clear.disabled = intensityDisabled;
        clear.addEventListener("click", (event) => {
            event.stopPropagation();
            this.focusIndex = index;
            this.setValue(field, null);
        });
        choices.appendChild(clear);
        row.appendChild(choices);
        return row;
    }
}
