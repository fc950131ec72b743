"""Static SVG/HTML report emission.

Maps are SVG 1.1: one circle per topic with area proportional to its corpus
weight, positioned at its PCoA coordinates. The alignment report puts the two
maps side by side, draws a line per selected cross-corpus pair, and thickens
the border of echo-flagged topics. All HTML is self-contained (inline styles,
no external fetches) and well-formed XML so it can be machine-checked.
"""
from __future__ import annotations

import html
from pathlib import Path

import numpy as np

from .align import AlignmentResult, write_cross_matrix_tsv
from .errors import NumericError
from .geometry import Layout
from .ioutil import write_text

_PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]
_MAP_W = 640
_MAP_H = 520
_MARGIN = 70
_R_MAX = 34.0


def _esc(text: str) -> str:
    return html.escape(str(text), quote=True)


def _positions(layout: Layout, offset_x: float = 0.0) -> list[tuple[float, float, float]]:
    """Pixel (cx, cy, r) per topic; a shared scale keeps the aspect ratio."""
    coords = np.asarray(layout.coords, dtype=np.float64)
    sizes = np.asarray(layout.sizes, dtype=np.float64)
    xs, ys = coords[:, 0], coords[:, 1]
    span = max(float(xs.max() - xs.min()), float(ys.max() - ys.min()), 1e-9)
    scale = (min(_MAP_W, _MAP_H) - 2 * _MARGIN) / span
    mid_x, mid_y = (xs.max() + xs.min()) / 2, (ys.max() + ys.min()) / 2
    r_unit = _R_MAX / np.sqrt(sizes.max())
    out = []
    for i in range(len(sizes)):
        cx = offset_x + _MAP_W / 2 + (xs[i] - mid_x) * scale
        cy = _MAP_H / 2 - (ys[i] - mid_y) * scale
        out.append((cx, cy, float(r_unit * np.sqrt(sizes[i]))))
    return out


def _color_for(key: str | None, key_order: dict[str, int]) -> str:
    if key is None:
        return _PALETTE[0]
    return _PALETTE[key_order[key] % len(_PALETTE)]


def _map_elements(
    layout: Layout,
    labels: list[str],
    cluster_colors: list[str] | None,
    echo: list[bool] | None,
    offset_x: float = 0.0,
) -> tuple[list[str], list[tuple[float, float, float]]]:
    if len(labels) != len(layout.sizes):
        raise NumericError("labels do not match the layout's topic count")
    key_order: dict[str, int] = {}
    if cluster_colors is not None:
        for key in sorted(set(cluster_colors)):
            key_order[key] = len(key_order)
    positions = _positions(layout, offset_x)
    elements = []
    for i, (cx, cy, r) in enumerate(positions):
        fill = _color_for(cluster_colors[i] if cluster_colors else None, key_order)
        heavy = bool(echo[i]) if echo is not None else False
        stroke = "#111111" if heavy else "#555555"
        width = "3" if heavy else "1"
        elements.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.3f}" fill="{fill}" '
            f'fill-opacity="0.55" stroke="{stroke}" stroke-width="{width}"/>'
        )
    for i, (cx, cy, r) in enumerate(positions):
        elements.append(
            f'<text x="{cx + r + 4:.2f}" y="{cy + 4:.2f}" font-family="sans-serif" '
            f'font-size="12" fill="#222222">{_esc(labels[i])}</text>'
        )
    return elements, positions


def _svg_document(elements: list[str], width: int, height: int) -> str:
    body = "\n  ".join(elements)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'  <rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
        f"  {body}\n"
        "</svg>\n"
    )


def _term_tables_html(labels: list[str], term_tables: list[list[tuple[str, float]]]) -> str:
    blocks = []
    for label, ranked in zip(labels, term_tables):
        rows = "\n".join(
            f"<tr><td>{rank}</td><td>{_esc(term)}</td><td>{score:.4f}</td></tr>"
            for rank, (term, score) in enumerate(ranked, start=1)
        )
        blocks.append(
            f"<h3>{_esc(label)}</h3>\n"
            '<table><thead><tr><th>rank</th><th>term</th><th>relevance</th></tr></thead>\n'
            f"<tbody>\n{rows}\n</tbody></table>"
        )
    return "\n".join(blocks)


_HTML_STYLE = (
    "body{font-family:sans-serif;margin:2em;max-width:75em}"
    "table{border-collapse:collapse;margin:0.5em 0}"
    "td,th{border:1px solid #999;padding:2px 8px;font-size:0.85em}"
    "h1{font-size:1.4em}h2{font-size:1.15em}h3{font-size:1em}"
    "p.note{color:#444;font-size:0.9em}"
)


def _html_document(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>\n"
        '<html xmlns="http://www.w3.org/1999/xhtml"><head><meta charset="utf-8"/>'
        f"<title>{_esc(title)}</title><style>{_HTML_STYLE}</style></head>\n"
        f"<body>\n{body}\n</body></html>\n"
    )


def emit_map(
    layout: Layout,
    labels: list[str],
    svg_path: Path | str,
    html_path: Path | str,
    term_tables: list[list[tuple[str, float]]] | None = None,
    cluster_colors: list[str] | None = None,
    title: str = "Topic map",
) -> list[Path]:
    """Write a topic-map SVG and an HTML wrapper with per-topic term tables."""
    elements, _ = _map_elements(layout, labels, cluster_colors, echo=None)
    svg = _svg_document(elements, _MAP_W, _MAP_H)
    write_text(svg_path, svg)

    svg_inline = svg.split("?>\n", 1)[1]
    parts = [f"<h1>{_esc(title)}</h1>", svg_inline]
    if term_tables is not None:
        parts.append("<h2>Topic terms (relevance-ranked)</h2>")
        parts.append(_term_tables_html(labels, term_tables))
    write_text(html_path, _html_document(title, "\n".join(parts)))
    return [Path(svg_path), Path(html_path)]


def emit_alignment_report(
    result: AlignmentResult,
    layout_a: Layout,
    layout_b: Layout,
    labels_a: list[str],
    labels_b: list[str],
    html_path: Path | str,
    tsv_path: Path | str,
    svg_path: Path | str | None = None,
    title: str = "Cross-corpus topic alignment",
) -> list[Path]:
    """Side-by-side maps with one line per selected pair; echo topics get thick
    borders. Also writes the cross matrix TSV with marginal means appended."""
    if len(labels_a) != result.cross.rows or len(labels_b) != result.cross.cols:
        raise NumericError("labels do not match the alignment result shape")
    gap = 120
    total_w = 2 * _MAP_W + gap
    left, pos_a = _map_elements(layout_a, labels_a, None, echo=result.echo_a)
    right, pos_b = _map_elements(
        layout_b, labels_b, None, echo=result.echo_b, offset_x=_MAP_W + gap
    )
    lines = [
        f'<line x1="{pos_a[i][0]:.2f}" y1="{pos_a[i][1]:.2f}" '
        f'x2="{pos_b[j][0]:.2f}" y2="{pos_b[j][1]:.2f}" '
        'stroke="#888888" stroke-width="1.5" stroke-opacity="0.8"/>'
        for i, j, _ in result.pairs
    ]
    svg = _svg_document(lines + left + right, total_w, _MAP_H)

    selection = (
        f"top {result.top_n} closest pairs"
        if result.top_n is not None
        else f"pairs with distance &lt; {result.threshold:g}"
    )
    body = "\n".join(
        [
            f"<h1>{_esc(title)}</h1>",
            '<p class="note">Cross-corpus distances summarize vocabulary overlap '
            "between two independently fitted topic models. Similarity (or its "
            "absence) between topics is descriptive only and supports no causal "
            "reading in either direction.</p>",
            f"<p>Selected edges: {selection}; {len(result.pairs)} pair(s) shown. "
            f"Grand mean distance: {result.grand_mean:.4f}. Thick borders mark "
            "topics closer than average to the whole opposite topic set.</p>",
            svg.split("?>\n", 1)[1],
        ]
    )
    write_text(html_path, _html_document(title, body))
    write_cross_matrix_tsv(result, labels_a, labels_b, tsv_path)
    written = [Path(html_path), Path(tsv_path)]
    if svg_path is not None:
        write_text(svg_path, svg)
        written.append(Path(svg_path))
    return written
