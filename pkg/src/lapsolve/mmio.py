"""Matrix Market coordinate reader/writer with line-numbered errors."""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .graph import SymmetricMatrix, components, is_symmetric

log = logging.getLogger("lapsolve")


class MatrixMarketError(ValueError):
    code = "malformed-input"

    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = str(path)
        self.line = line


def read_matrix_market(path, rhs_path=None, seed=0):
    """Read a real coordinate Matrix Market file as a symmetric matrix.

    Returns ``(matrix, rhs, rhs_source)``.  The right-hand side comes from
    ``rhs_path``, else from a companion file with suffix ``.rhs``, else it is
    a seeded random vector with per-component means removed.
    """
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")
    banner = lines[0].strip().split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise MatrixMarketError(path, 1, "missing %%MatrixMarket banner")
    obj, fmt, field_, sym = (t.lower() for t in banner[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(path, 1, "only 'matrix coordinate' files are supported")
    if field_ not in ("real", "integer", "double"):
        raise MatrixMarketError(path, 1, f"unsupported field '{field_}'")
    if sym not in ("symmetric", "general"):
        raise MatrixMarketError(path, 1, f"unsupported symmetry '{sym}'")
    k = 1
    while k < len(lines) and (not lines[k].strip() or lines[k].lstrip().startswith("%")):
        k += 1
    if k == len(lines):
        raise MatrixMarketError(path, k, "missing size line")
    try:
        nr, nc, nnz = (int(t) for t in lines[k].split())
    except ValueError:
        raise MatrixMarketError(path, k + 1, "size line must hold three integers") from None
    if nr != nc:
        raise MatrixMarketError(path, k + 1, f"matrix is not square ({nr} x {nc})")
    rows, cols, vals = [], [], []
    seen = {}
    dup = 0
    for ln in range(k + 1, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if len(parts) != 3:
            raise MatrixMarketError(path, ln + 1, "entry must be 'row col value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(path, ln + 1, "unparsable entry") from None
        if not (1 <= i <= nr and 1 <= j <= nc):
            raise MatrixMarketError(path, ln + 1, f"index ({i}, {j}) out of bounds for {nr} x {nc}")
        if not np.isfinite(v):
            raise MatrixMarketError(path, ln + 1, "non-finite value")
        if sym == "symmetric" and j > i:
            raise MatrixMarketError(path, ln + 1, "symmetric files store the lower triangle only")
        key = (i, j)
        if key in seen:
            dup += 1
        seen[key] = ln + 1
        if v == 0.0:
            continue
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if len(seen) + dup != nnz:
        raise MatrixMarketError(path, len(lines), f"expected {nnz} entries, found {len(seen) + dup}")
    if dup:
        log.warning("%s: %d duplicate entries summed", path, dup)
    a = sp.coo_matrix((vals, (rows, cols)), shape=(nr, nc)).tocsr()
    if sym == "symmetric":
        a = a + sp.triu(a.T, k=1)
    a.sum_duplicates()
    if not is_symmetric(a):
        diff = abs(a - a.T).tocoo()
        idx = int(np.argmax(diff.data))
        i, j = int(diff.row[idx]) + 1, int(diff.col[idx]) + 1
        line = seen.get((i, j), seen.get((j, i), len(lines)))
        raise MatrixMarketError(path, line, f"asymmetric entries at ({i}, {j})")
    m = SymmetricMatrix(a, check=False)
    m.duplicates = dup

    source = "random"
    rhs_file = Path(rhs_path) if rhs_path else path.with_suffix(".rhs")
    if rhs_path or rhs_file.exists():
        rhs = read_rhs(rhs_file, nr)
        source = str(rhs_file)
    else:
        rhs = random_rhs(m, seed)
    return m, rhs, source


def read_rhs(path, n) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("%"):
                continue
            try:
                vals.append(float(text))
            except ValueError:
                raise MatrixMarketError(path, ln, "rhs lines must hold one number") from None
    if len(vals) != n:
        raise MatrixMarketError(path, ln if vals else 1, f"rhs has {len(vals)} values, expected {n}")
    return np.asarray(vals)


def random_rhs(a: SymmetricMatrix, seed=0) -> np.ndarray:
    """Seeded normal vector projected onto the range of ``a``."""
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(a.n)
    for v in null_vectors(a):
        b -= v * (v @ b)
    return b


def null_vectors(a: SymmetricMatrix) -> list:
    """Orthonormal null vectors of a PSDDD matrix, one per singular component.

    A component is singular when it has zero excess and its signs are
    consistent: negative entries join equal signs, positive entries opposite
    signs.  The null vector is then that sign pattern.
    """
    csr = a.csr
    n = csr.shape[0]
    rows = np.asarray(abs(csr).sum(axis=1)).ravel()
    diag = csr.diagonal()
    excess = 2 * diag - rows
    scale = np.maximum(np.abs(diag), 1e-300)
    out = []
    indptr, indices, data = csr.indptr, csr.indices, csr.data
    for comp in components(csr):
        if np.any(excess[comp] > 1e-9 * scale[comp]):
            continue
        sign = {int(comp[0]): 1.0}
        stack = [int(comp[0])]
        ok = True
        while stack and ok:
            i = stack.pop()
            for p in range(indptr[i], indptr[i + 1]):
                j = int(indices[p])
                if j == i:
                    continue
                want = sign[i] if data[p] < 0 else -sign[i]
                if j not in sign:
                    sign[j] = want
                    stack.append(j)
                elif sign[j] != want:
                    ok = False
                    break
        if ok:
            v = np.zeros(n)
            for i, sg in sign.items():
                v[i] = sg
            out.append(v / np.sqrt(len(comp)))
    return out


def write_matrix_market(path, a, comment=None):
    """Write the lower triangle of a symmetric matrix."""
    csr = a.csr if isinstance(a, SymmetricMatrix) else sp.csr_matrix(a)
    low = sp.tril(csr).tocoo()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{csr.shape[0]} {csr.shape[1]} {low.nnz}\n")
        order = np.lexsort((low.row, low.col))
        for i, j, v in zip(low.row[order], low.col[order], low.data[order]):
            fh.write(f"{int(i) + 1} {int(j) + 1} {float(v)!r}\n")


def write_rhs(path, b):
    with open(path, "w") as fh:
        for v in np.asarray(b, dtype=float).tolist():
            fh.write(f"{v!r}\n")
