/**
 * Single-page wiring: hash routing between the frame browser, the per-frame
 * editor, and the stats view. All state shown comes from API responses; the
 * app only holds navigation context (current page, filter, nav order).
 */
import { AnnotationEditor } from "./editor.js";
import { renderHistogram } from "./charts.js";
import { applyFilter, renderFrameList } from "./frameList.js";
import { installKeyboard, SHORTCUT_LEGEND } from "./keyboard.js";
const WRAP_KEY = "envlabel.wrapNavigation";
export class App {
    constructor(root, client, options = {}) {
        this.root = root;
        this.client = client;
        this.editor = null;
        this.page = null;
        this.filter = "all";
        this.conflicts = null;
        this.navOrder = [];
        this.currentFrameId = null;
        this.currentHash = "";
        this.uninstallKeyboard = null;
        this.confirmFn = options.confirmFn ?? ((message) => window.confirm(message));
        this.storage = options.storage ?? window.localStorage;
        this.root.textContent = "";
        this.root.appendChild(this.buildHeader());
        this.helpPanel = this.buildHelpPanel();
        this.root.appendChild(this.helpPanel);
        this.view = document.createElement("main");
        this.view.className = "view";
        this.root.appendChild(this.view);
    }
    async start() {
        this.uninstallKeyboard = installKeyboard({
            onPrev: () => void this.step(-1),
            onNext: () => void this.step(1),
            onRowUp: () => this.editor?.moveFocus(-1),
            onRowDown: () => this.editor?.moveFocus(1),
            onDigit: (digit) => this.editor?.chooseDigit(digit),
            onSave: () => void this.editor?.save(),
            onToggleHelp: () => this.toggleHelp(),
        });
        window.addEventListener("hashchange", () => void this.onHashChange());
        await this.route(window.location.hash || "#/frames");
    }
    stop() {
        this.uninstallKeyboard?.();
    }
    wrapEnabled() {
        return (this.storage.getItem(WRAP_KEY) ?? "1") === "1";
    }
    // ----- navigation ------------------------------------------------------
    async onHashChange() {
        const hash = window.location.hash;
        if (hash === this.currentHash) {
            return; // a cancelled navigation restored the hash
        }
        if (this.editor?.isDirty() && !this.confirmFn("Discard unsaved changes?")) {
            window.location.hash = this.currentHash;
            return;
        }
        await this.route(hash);
    }
    navigate(hash) {
        if (window.location.hash === hash) {
            void this.route(hash);
        }
        else {
            window.location.hash = hash; // routing continues in onHashChange
        }
    }
    async route(hash) {
        this.currentHash = hash;
        if (window.location.hash !== hash) {
            window.location.hash = hash;
        }
        this.editor = null;
        const frameMatch = /^#\/frame\/(.+)$/.exec(hash);
        if (frameMatch) {
            await this.showFrame(decodeURIComponent(frameMatch[1] ?? ""));
        }
        else if (hash === "#/stats") {
            await this.showStats();
        }
        else {
            await this.showFrames();
        }
    }
    /** Move to the adjacent frame in the filtered order. */
    async step(delta) {
        if (this.currentFrameId === null || this.navOrder.length === 0) {
            return;
        }
        if (this.editor?.isDirty() && !this.confirmFn("Discard unsaved changes?")) {
            return;
        }
        const index = this.navOrder.indexOf(this.currentFrameId);
        if (index < 0)
            return;
        let next = index + delta;
        if (next < 0 || next >= this.navOrder.length) {
            if (!this.wrapEnabled()) {
                return; // stop at the edge per setting
            }
            next = (next + this.navOrder.length) % this.navOrder.length;
        }
        const frameId = this.navOrder[next];
        if (frameId !== undefined) {
            this.editor = null; // guard already passed
            this.navigate(`#/frame/${encodeURIComponent(frameId)}`);
        }
    }
    // ----- views ------------------------------------------------------------
    async refreshPage() {
        this.page = await this.client.listFrames(0, 500);
    }
    async showFrames() {
        await this.refreshPage();
        if (this.filter === "conflicting" && this.conflicts === null) {
            await this.computeConflicts();
        }
        this.currentFrameId = null;
        this.renderFrameListView();
    }
    renderFrameListView() {
        if (!this.page)
            return;
        this.navOrder = applyFilter(this.page.frames, this.filter, this.conflicts).map((f) => f.frame_id);
        this.view.textContent = "";
        const container = document.createElement("div");
        container.className = "frames-view";
        renderFrameList(container, this.page, {
            filter: this.filter,
            conflicts: this.conflicts,
            onOpen: (frameId) => this.navigate(`#/frame/${encodeURIComponent(frameId)}`),
            onFilterChange: (filter) => void this.changeFilter(filter),
        });
        this.view.appendChild(container);
    }
    async changeFilter(filter) {
        this.filter = filter;
        if (filter === "conflicting" && this.conflicts === null) {
            await this.computeConflicts();
        }
        this.renderFrameListView();
    }
    /** A frame conflicts when a human-set intensity contradicts the live suggestion. */
    async computeConflicts() {
        const conflicts = new Set();
        for (const frame of this.page?.frames ?? []) {
            const detail = await this.client.getFrame(frame.frame_id);
            const annotation = detail.annotation;
            if (annotation !== null &&
                detail.auto_suggestion !== null &&
                annotation.provenance.precipitation === "Human" &&
                annotation.precipitation_intensity !== null &&
                annotation.precipitation_intensity !== detail.auto_suggestion.intensity) {
                conflicts.add(frame.frame_id);
            }
        }
        this.conflicts = conflicts;
    }
    async showFrame(frameId) {
        if (this.page === null) {
            await this.refreshPage();
            this.navOrder = applyFilter(this.page.frames, this.filter, this.conflicts).map((f) => f.frame_id);
        }
        const detail = await this.client.getFrame(frameId);
        this.currentFrameId = frameId;
        this.view.textContent = "";
        const bar = document.createElement("div");
        bar.className = "frame-nav";
        const back = document.createElement("a");
        back.href = "#/frames";
        back.textContent = "back to frames";
        bar.appendChild(back);
        const title = document.createElement("span");
        title.className = "frame-title";
        title.textContent = frameId;
        bar.appendChild(title);
        const position = document.createElement("span");
        position.className = "frame-position";
        const index = this.navOrder.indexOf(frameId);
        if (index >= 0) {
            position.textContent = `${index + 1} / ${this.navOrder.length}`;
        }
        bar.appendChild(position);
        this.view.appendChild(bar);
        this.editor = new AnnotationEditor(this.client, detail, {
            onSaved: () => {
                this.conflicts = null; // suggestions vs labels may have changed
            },
        });
        this.view.appendChild(this.editor.element);
    }
    async showStats() {
        this.currentFrameId = null;
        const histogram = await this.client.getStats();
        this.view.textContent = "";
        const container = document.createElement("div");
        container.className = "stats-view";
        renderHistogram(container, histogram);
        this.view.appendChild(container);
    }
    // ----- chrome -----------------------------------------------------------
    buildHeader() {
        const header = document.createElement("header");
        const title = document.createElement("h1");
        title.textContent = "envlabel review";
        header.appendChild(title);
        const nav = document.createElement("nav");
        for (const [hash, label] of [
            ["#/frames", "Frames"],
            ["#/stats", "Stats"],
        ]) {
            const link = document.createElement("a");
            link.href = hash ?? "#/frames";
            link.textContent = label ?? "";
            nav.appendChild(link);
        }
        const exportLink = document.createElement("a");
        exportLink.href = "/api/export";
        exportLink.textContent = "Export";
        nav.appendChild(exportLink);
        header.appendChild(nav);
        const wrap = document.createElement("label");
        wrap.className = "wrap-setting";
        const checkbox = document.createElement("input");
        checkbox.type = "checkbox";
        checkbox.checked = this.wrapEnabled();
        checkbox.addEventListener("change", () => {
            this.storage.setItem(WRAP_KEY, checkbox.checked ? "1" : "0");
        });
        wrap.appendChild(checkbox);
        wrap.appendChild(document.createTextNode(" wrap at ends"));
        header.appendChild(wrap);
        const help = document.createElement("button");
        help.className = "help-toggle";
        help.textContent = "? shortcuts";
        help.addEventListener("click", () => this.toggleHelp());
        header.appendChild(help);
        return header;
    }
    buildHelpPanel() {
        const panel = document.createElement("div");
        panel.className = "help-legend";
        panel.hidden = true;
        const list = document.createElement("dl");
        for (const [keys, what] of SHORTCUT_LEGEND) {
            const dt = document.createElement("dt");
            dt.textContent = keys;
            const dd = document.createElement("dd");
            dd.textContent = what;
            list.appendChild(dt);
            list.appendChild(dd);
        }
        panel.appendChild(list);
        return panel;
    }
    toggleHelp() {
        this.helpPanel.hidden = !this.helpPanel.hidden;
    }
}
