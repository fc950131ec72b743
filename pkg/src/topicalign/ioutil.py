"""Shared helpers for deterministic artifact output."""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterable


def fmt(x: float) -> str:
    """Format a float with 9 significant digits (artifact-wide convention)."""
    return f"{x:.9g}"


def sha256_file(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_lines(lines: Iterable[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def write_tsv(path: Path | str, header: list[str], rows: Iterable[Iterable[str]]) -> None:
    """Write a tab-delimited UTF-8 file with a header row and LF newlines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def read_tsv(path: Path | str) -> tuple[list[str], list[list[str]]]:
    """Read a tab-delimited file written by :func:`write_tsv`."""
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return [], []
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:]]


def write_text(path: Path | str, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
