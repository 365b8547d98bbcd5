"""Matrix Market exchange files.

Dense matrices are written as ``%%MatrixMarket matrix array complex general``
(column-major, shortest round-trip float repr so that reads are bitwise
exact).  Reading delegates to :func:`scipy.io.mmread`, which also accepts
coordinate files; those are densified.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .errors import ManifestError

HEADER = "%%MatrixMarket matrix array complex general"


def write_matrix(path, M: np.ndarray, comment: str | None = None) -> Path:
    path = Path(path)
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    rows, cols = M.shape
    lines = [HEADER]
    if comment:
        lines.extend("%" + c for c in comment.splitlines())
    lines.append(f"{rows} {cols}")
    for z in M.T.ravel():
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ManifestError("matrix file not found", path=path)
    try:
        M = scipy.io.mmread(str(path))
    except Exception as exc:  # scipy raises ValueError/IndexError on malformed files
        raise ManifestError(f"cannot parse Matrix Market data ({exc})", path=path) from exc
    if scipy.sparse.issparse(M):
        M = M.toarray()
    return np.asarray(M, dtype=complex)
