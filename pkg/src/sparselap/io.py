"""Plain-text file formats.

Edge lists are tab-separated, one edge per line as ``i<TAB>j<TAB>weight``
with 1-based ``i > j`` and 17 significant digits, under a header line
``# p=<p> s=<s> format=1``. Matrix files start with a ``p n`` line followed
by whitespace-separated rows. Run records are JSON.
"""

import json
import re
from dataclasses import dataclass

import numpy as np

from .laplacian_ops import edge_index, num_edges, num_vertices, vertex_pairs
from .metrics import DEFAULT_THRESHOLD, EdgeSet

EDGE_LIST_FORMAT = 1
RUN_RECORD_FORMAT = 1

_HEADER = re.compile(r"#\s*p=(\d+)\s+s=(\d+)\s+format=(\d+)\s*$")


class FormatError(ValueError):
    """A file does not follow the expected layout."""


@dataclass(frozen=True)
class EdgeList:
    p: int
    s: int
    weights: np.ndarray

    @property
    def edge_set(self):
        rows, cols = vertex_pairs(self.p)
        keep = np.flatnonzero(self.weights > 0)
        return EdgeSet(self.p, frozenset(zip((rows[keep] + 1).tolist(), (cols[keep] + 1).tolist())))


def _fmt(value):
    return f"{value:.17g}"


def format_edge_list(x, s=None, threshold=DEFAULT_THRESHOLD):
    """Render the edges of ``x`` with weight above ``threshold``."""
    x = np.asarray(x, dtype=float)
    p = num_vertices(x.size)
    rows, cols = vertex_pairs(p)
    keep = np.flatnonzero(x > threshold)
    s = len(keep) if s is None else int(s)
    lines = [f"# p={p} s={s} format={EDGE_LIST_FORMAT}"]
    for k in keep:
        lines.append(f"{rows[k] + 1}\t{cols[k] + 1}\t{_fmt(x[k])}")
    return "\n".join(lines) + "\n"


def write_edge_list(path, x, s=None, threshold=DEFAULT_THRESHOLD):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(x, s=s, threshold=threshold))


def read_edge_list(path):
    """Parse an edge-list file back into a dense weight vector."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines:
        raise FormatError(f"{path}: empty edge list")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise FormatError(f"{path}: first line must be '# p=<p> s=<s> format=1'")
    p, s, version = map(int, m.groups())
    if version != EDGE_LIST_FORMAT:
        raise FormatError(f"{path}: unsupported edge-list format {version}")
    if p < 2:
        raise FormatError(f"{path}: p must be >= 2")

    x = np.zeros(num_edges(p))
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"{path}: line {lineno}: expected 'i<TAB>j<TAB>weight'")
        try:
            i, j, w = int(fields[0]), int(fields[1]), float(fields[2])
            k = edge_index(i, j, p)
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from None
        if x[k - 1] != 0:
            raise FormatError(f"{path}: line {lineno}: duplicate edge ({i}, {j})")
        x[k - 1] = w
    return EdgeList(p, s, x)


def write_matrix(path, M, n=0):
    """Write a 2-D array under a ``<cols> <n>`` header line."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{M.shape[1]} {int(n)}\n")
        for row in M:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_matrix(path):
    """Return ``(array, n)`` from a file written by :func:`write_matrix`."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.split() for line in fh if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty matrix file")
    try:
        header = [int(v) for v in lines[0]]
    except ValueError:
        raise FormatError(f"{path}: first line must be 'p n'") from None
    if len(header) not in (1, 2):
        raise FormatError(f"{path}: first line must be 'p n'")
    p = header[0]
    n = header[1] if len(header) == 2 else 0
    try:
        M = np.array([[float(v) for v in row] for row in lines[1:]], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if M.size == 0:
        M = M.reshape(0, p)
    if M.ndim != 2 or M.shape[1] != p:
        raise FormatError(f"{path}: rows do not all have {p} columns")
    return M, n


def write_run_record(path, record):
    doc = {"format_version": RUN_RECORD_FORMAT, **record}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_run_record(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != RUN_RECORD_FORMAT:
        raise FormatError(f"{path}: unsupported run-record format {doc.get('format_version')!r}")
    return doc
