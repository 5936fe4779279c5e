"""Pure-numpy symmetric-matrix kernels.

Drop-in twin of the compiled ``sqsdp._kernel_c`` extension; ``symkernel``
picks whichever backend is available at import time.  All functions take and
return float64 arrays and assume exactly symmetric square input (callers
symmetrize at construction, see ``symkernel.symmetrize``).
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)
_SQRT1_2 = 1.0 / np.sqrt(2.0)

# svec index cache per dimension: (rows i, cols j, off-diagonal mask) in
# column-major lower-triangle order (j outer, i = j..d-1 inner).
_IDX_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _tri_indices(d):
    try:
        return _IDX_CACHE[d]
    except KeyError:
        j, i = np.triu_indices(d)  # (j, i) with i >= j, ordered by j then i
        off = i != j
        _IDX_CACHE[d] = (i, j, off)
        return _IDX_CACHE[d]


def svec(a):
    """Isometric vectorization: lower triangle by columns, off-diagonals * sqrt(2)."""
    i, j, off = _tri_indices(a.shape[0])
    v = a[i, j].astype(float, copy=True)
    v[off] *= _SQRT2
    return v


def smat(v, d):
    """Inverse of svec for a d x d symmetric matrix."""
    i, j, off = _tri_indices(d)
    w = np.asarray(v, dtype=float).copy()
    w[off] *= _SQRT1_2
    a = np.zeros((d, d))
    a[i, j] = w
    a[j, i] = w
    return a


def eig_sym(a):
    """Full eigendecomposition, eigenvalues ascending, eigenvectors as columns."""
    return np.linalg.eigh(a)


def psd_from_eig(w, p):
    """Recompose P diag([w]_+) P^T with bit-exact symmetry."""
    m = (p * np.maximum(w, 0.0)) @ p.T
    return 0.5 * (m + m.T)


def psd_project(a):
    """Frobenius projection onto the PSD cone."""
    w, p = np.linalg.eigh(a)
    return psd_from_eig(w, p)


def box_project_spectral(a, zmax):
    """Frobenius projection onto {O <= Z <= zmax I}: clamp eigenvalues to [0, zmax]."""
    w, p = np.linalg.eigh(a)
    m = (p * np.clip(w, 0.0, zmax)) @ p.T
    return 0.5 * (m + m.T)


def jordan_product(a, b):
    """(AB + BA)/2; for symmetric inputs BA = (AB)^T so one product suffices."""
    m = a @ b
    return 0.5 * (m + m.T)


def _omega(w):
    """First divided differences of r -> max(r, 0) on the spectrum w.

    Off the diagonal blocks: ([w_i]_+ - [w_j]_+)/(w_i - w_j).  Pairs with
    |w_i - w_j| <= 1e-12 max(1, |w_i|, |w_j|) are treated as equal and get the
    symmetric tie value 1 if w_i + w_j > 0 else 0 (any element of the
    generalized Jacobian is acceptable; symmetry keeps downstream Gram
    matrices symmetric).
    """
    wp = np.maximum(w, 0.0)
    den = w[:, None] - w[None, :]
    absw = np.abs(w)
    tol = 1e-12 * np.maximum(1.0, np.maximum(absw[:, None], absw[None, :]))
    equal = np.abs(den) <= tol
    safe = np.where(equal, 1.0, den)
    omega = (wp[:, None] - wp[None, :]) / safe
    tie = ((w[:, None] + w[None, :]) > 0.0).astype(float)
    return np.where(equal, tie, omega)


def dpsd_apply(w, p, h):
    """Directional derivative of the PSD projection at eig (w, p) applied to h."""
    ht = p.T @ h @ p
    m = p @ (_omega(w) * ht) @ p.T
    return 0.5 * (m + m.T)


def loewner_gram(w, p, a_stack):
    """Gram matrix K[i, j] = <A_i, DPi(w, p)[A_j]> over a stack of symmetric A_i.

    DPi is the projection derivative used by dpsd_apply; K is PSD because the
    divided-difference weights are nonnegative.
    """
    n = a_stack.shape[0]
    d = w.shape[0]
    at = np.einsum("ji,njk,kl->nil", p, a_stack, p, optimize=True).reshape(n, d * d)
    k = (at * _omega(w).reshape(d * d)) @ at.T
    return 0.5 * (k + k.T)
