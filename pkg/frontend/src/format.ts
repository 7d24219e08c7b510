/** Formatting helpers — the only arithmetic the client performs. */

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;')
        .replace(/'/g, '&#39;');
}

export function pct(value: number, digits = 1): string {
    return `${(value * 100).toFixed(digits)}%`;
}

/** Bar width relative to the largest value in the list, as a CSS percent. */
export function relativeWidth(value: number, max: number): string {
    if (max <= 0) {
        return '0%';
    }
    return `${((value / max) * 100).toFixed(1)}%`;
}

export function meterWidth(phi: number): string {
    const clamped = Math.max(0, Math.min(1, phi));
    return `${(clamped * 100).toFixed(0)}%`;
}
