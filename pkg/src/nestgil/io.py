"""PGM images and plain CSV matrices.

CSV dialect: comma separated, '.' decimal point, '#'-prefixed comment lines,
LF line endings. Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import numpy as np

from .image import Image


class PGMError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def read_pgm(path) -> Image:
    """Read a P2 or P5 PGM; intensities are scaled to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w, h, maxval), pos = _tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError(f"bad PGM header in {path}") from exc
    if not 0 < maxval < 65536:
        raise PGMError(f"invalid maxval {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = width * height * dtype.itemsize
        raw = data[pos:pos + need]
        if len(raw) != need:
            raise PGMError("truncated PGM raster")
        pix = np.frombuffer(raw, dtype=dtype).astype(float)
    elif magic == b"P2":
        vals, _ = _tokens(data, width * height, pos)
        pix = np.array([int(v) for v in vals], dtype=float)
    else:
        raise PGMError(f"unsupported PGM magic {magic!r}")
    return Image(pix.reshape(height, width) / maxval, data_range=1.0)


def write_pgm(path, img, maxval: int = 255, binary: bool = True):
    """Write an image, mapping [0, data_range] linearly onto [0, maxval]."""
    if isinstance(img, Image):
        arr, rng = img.values, img.data_range
    else:
        arr, rng = np.asarray(img, dtype=float), 1.0
    q = np.rint(np.clip(arr / rng, 0.0, 1.0) * maxval).astype(np.int64)
    h, w = q.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
            dtype = ">u2" if maxval > 255 else "u1"
            fh.write(q.astype(dtype).tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n{maxval}\n".encode("ascii"))
            for row in q:
                fh.write((" ".join(str(v) for v in row) + "\n").encode("ascii"))


def format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_csv_matrix(path, matrix, comments=()):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        for row in matrix:
            fh.write(format_row(row) + "\n")


def read_csv_matrix(path):
    """Return ``(matrix, comments)``; comment lines lose their leading '# '."""
    comments, rows = [], []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                rows.append([float(v) for v in line.split(",")])
    return np.array(rows, dtype=float), comments
