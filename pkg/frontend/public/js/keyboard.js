/** Global shortcuts for high-throughput labeling. */
function isTypingTarget(target) {
    return (target instanceof HTMLInputElement ||
        target instanceof HTMLTextAreaElement ||
        target instanceof HTMLSelectElement);
}
/** Returns the uninstall function. */
export function installKeyboard(actions, isEnabled = () => true) {
    const handler = (event) => {
        if (!isEnabled() || isTypingTarget(event.target) || event.ctrlKey || event.metaKey) {
            return;
        }
        switch (event.key) {
            case "ArrowLeft":
            case "j":
                event.preventDefault();
                actions.onPrev();
                break;
            case "ArrowRight":
            case "l":
                event.preventDefault();
                actions.onNext();
                break;
            case "ArrowUp":
                event.preventDefault();
                actions.onRowUp();
                break;
            case "ArrowDown":
                event.preventDefault();
                actions.onRowDown();
                break;
            case "s":
                event.preventDefault();
                actions.onSave();
                break;
            case "?":
                event.preventDefault();
                actions.onToggleHelp();
                break;
            default:
                if (/^[0-9]$/.test(event.key)) {
                    event.preventDefault();
                    actions.onDigit(Number(event.key));
                }
        }
    };
    window.addEventListener("keydown", handler);
    return () => window.removeEventListener("keydown", handler);
}
export const SHORTCUT_LEGEND = [
    ["← / j", "previous frame"],
    ["→ / l", "next frame"],
    ["↑ / ↓", "move between categories"],
    ["1-9", "pick a value in the focused category"],
    ["0", "clear the focused category"],
    ["s", "save"],
    ["?", "toggle this legend"],
];
