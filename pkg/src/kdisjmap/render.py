"""Text and SVG maps of a trained grid.

A cell lists the modalities classified in that unit, then the number of
individuals.  With a split variable the count is followed by the per-level
breakdown, e.g. ``13(12,1)``.  Empty units show ``0``.  When super classes
are given, each cell also carries its class number (1-based) in brackets.
"""

from html import escape

import numpy as np

from .grid import GridSpec

# fixed palette so renders are reproducible; cycles past 12 classes
PALETTE = [
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99",
    "#8dd3c7", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69",
]


def cell_contents(spec: GridSpec, individual_units, modality_units, modality_labels,
                  split=None, split_levels=None, superclasses=None) -> list[str]:
    """Text of every cell, in unit order.

    Parameters
    ----------
    individual_units : array of int
        Unit of every individual.
    modality_units : array of int
        Unit of every modality, aligned with ``modality_labels``.
    split : sequence of str, optional
        Level of the split variable for every individual.
    split_levels : sequence of str, optional
        Order in which the split counts are printed.
    superclasses : array of int, optional
        Super class of every unit (0-based; printed 1-based).
    """
    U = spec.n_units
    individual_units = np.asarray(individual_units, dtype=int)
    counts = np.bincount(individual_units, minlength=U)
    labels_at = [[] for _ in range(U)]
    for label, u in zip(modality_labels, modality_units):
        labels_at[int(u)].append(label)

    split_counts = None
    if split is not None:
        index = {lvl: c for c, lvl in enumerate(split_levels)}
        codes = np.array([index[s] for s in split], dtype=int)
        split_counts = np.zeros((U, len(split_levels)), dtype=int)
        np.add.at(split_counts, (individual_units, codes), 1)
        assert np.array_equal(split_counts.sum(axis=1), counts), "split counts must add up to cell counts"

    cells = []
    for u in range(U):
        parts = list(labels_at[u])
        if superclasses is not None:
            parts.append(f"[{int(superclasses[u]) + 1}]")
        if counts[u] and split_counts is not None:
            parts.append(f"{counts[u]}({','.join(str(c) for c in split_counts[u])})")
        else:
            parts.append(str(counts[u]))
        cells.append(" ".join(parts))
    return cells


def render_text(spec: GridSpec, cells) -> str:
    """Lay cells out on the grid with one fixed column width."""
    width = max(len(c) for c in cells)
    sep = "+" + "+".join("-" * (width + 2) for _ in range(spec.cols)) + "+"
    lines = [sep]
    for r in range(spec.rows):
        row = cells[r * spec.cols:(r + 1) * spec.cols]
        lines.append("| " + " | ".join(c.ljust(width) for c in row) + " |")
        lines.append(sep)
    return "\n".join(lines) + "\n"


def render_map(spec: GridSpec, individual_units, modality_units, modality_labels,
               split=None, split_levels=None, superclasses=None) -> str:
    cells = cell_contents(spec, individual_units, modality_units, modality_labels,
                          split, split_levels, superclasses)
    return render_text(spec, cells)


def render_svg(spec: GridSpec, cells, superclasses=None, cell_size=120, comment=None) -> str:
    """A self-contained SVG: one square per unit, coloured by super class."""
    w, h = spec.cols * cell_size, spec.rows * cell_size
    out = []
    if comment:
        out.append(f"<!-- {escape(comment)} -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
               f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="10">')
    for u, text in enumerate(cells):
        r, c = divmod(u, spec.cols)
        x, y = c * cell_size, r * cell_size
        fill = "#ffffff" if superclasses is None else PALETTE[int(superclasses[u]) % len(PALETTE)]
        out.append(f'<rect x="{x}" y="{y}" width="{cell_size}" height="{cell_size}" '
                   f'fill="{fill}" stroke="#333333"/>')
        words = text.split(" ")
        lines, current = [], ""
        for word in words:
            if current and len(current) + 1 + len(word) > cell_size // 7:
                lines.append(current)
                current = word
            else:
                current = f"{current} {word}".strip()
        lines.append(current)
        for k, line in enumerate(lines):
            out.append(f'<text x="{x + 4}" y="{y + 14 + 12 * k}">{escape(line)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
