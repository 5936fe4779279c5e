# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled symmetric-matrix kernels (LAPACK dsyev core).

Same contract as sqsdp._kernel_ref; selected by sqsdp.symkernel when built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, fabs
from scipy.linalg.cython_lapack cimport dsyev

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)
cdef double SQRT1_2 = 1.0 / sqrt(2.0)


def svec(double[:, ::1] a):
    """Isometric vectorization: lower triangle by columns, off-diagonals * sqrt(2)."""
    cdef int d = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(d * (d + 1) // 2)
    cdef double[::1] v = out
    cdef int i, j, pos = 0
    for j in range(d):
        v[pos] = a[j, j]
        pos += 1
        for i in range(j + 1, d):
            v[pos] = SQRT2 * a[i, j]
            pos += 1
    return out


def smat(double[::1] v, int d):
    """Inverse of svec for a d x d symmetric matrix."""
    cdef cnp.ndarray[double, ndim=2] out = np.empty((d, d))
    cdef double[:, ::1] a = out
    cdef int i, j, pos = 0
    cdef double x
    for j in range(d):
        a[j, j] = v[pos]
        pos += 1
        for i in range(j + 1, d):
            x = SQRT1_2 * v[pos]
            a[i, j] = x
            a[j, i] = x
            pos += 1
    return out


cdef int _eig(double[:, ::1] a, double[::1] w, double[::1, :] pf) except? -1:
    # dsyev on a column-major copy; eigenvalues ascending, vectors in columns.
    cdef int d = a.shape[0]
    cdef int info = 0, lwork = -1
    cdef int i, j
    cdef double wkopt
    cdef char jobz = b'V', uplo = b'L'
    for j in range(d):
        for i in range(d):
            pf[i, j] = a[i, j]
    dsyev(&jobz, &uplo, &d, &pf[0, 0], &d, &w[0], &wkopt, &lwork, &info)
    if info != 0:
        return info
    lwork = <int> wkopt
    cdef cnp.ndarray[double, ndim=1] work = np.empty(lwork)
    cdef double[::1] workv = work
    dsyev(&jobz, &uplo, &d, &pf[0, 0], &d, &w[0], &workv[0], &lwork, &info)
    return info


def eig_sym(double[:, ::1] a):
    """Full eigendecomposition, eigenvalues ascending, eigenvectors as columns."""
    cdef int d = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d)
    cdef cnp.ndarray pf = np.empty((d, d), order="F")
    cdef double[::1, :] pfv = pf
    cdef int info = _eig(a, w, pfv)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return w, np.ascontiguousarray(pf)


cdef _recompose(double[:, :] p, double[::1] f):
    # P diag(f) P^T with bit-exact symmetry (upper triangle mirrored).
    cdef int d = p.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((d, d))
    cdef double[:, ::1] o = out
    cdef int i, j, k
    cdef double acc
    for i in range(d):
        for j in range(i, d):
            acc = 0.0
            for k in range(d):
                acc += p[i, k] * f[k] * p[j, k]
            o[i, j] = acc
            o[j, i] = acc
    return out


def psd_from_eig(double[::1] w, double[:, :] p):
    """Recompose P diag([w]_+) P^T with bit-exact symmetry."""
    cdef int d = w.shape[0]
    cdef cnp.ndarray[double, ndim=1] f = np.empty(d)
    cdef int k
    for k in range(d):
        f[k] = w[k] if w[k] > 0.0 else 0.0
    return _recompose(p, f)


def psd_project(double[:, ::1] a):
    """Frobenius projection onto the PSD cone."""
    cdef int d = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d)
    cdef cnp.ndarray pf = np.empty((d, d), order="F")
    cdef double[::1, :] pfv = pf
    cdef int info = _eig(a, w, pfv)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    cdef cnp.ndarray[double, ndim=1] f = np.empty(d)
    cdef int k
    for k in range(d):
        f[k] = w[k] if w[k] > 0.0 else 0.0
    return _recompose(pfv, f)


def box_project_spectral(double[:, ::1] a, double zmax):
    """Frobenius projection onto {O <= Z <= zmax I}: clamp eigenvalues to [0, zmax]."""
    cdef int d = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d)
    cdef cnp.ndarray pf = np.empty((d, d), order="F")
    cdef double[::1, :] pfv = pf
    cdef int info = _eig(a, w, pfv)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    cdef cnp.ndarray[double, ndim=1] f = np.empty(d)
    cdef int k
    for k in range(d):
        f[k] = w[k]
        if f[k] < 0.0:
            f[k] = 0.0
        elif f[k] > zmax:
            f[k] = zmax
    return _recompose(pfv, f)


def jordan_product(double[:, ::1] a, double[:, ::1] b):
    """(AB + BA)/2 for symmetric inputs."""
    cdef int d = a.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((d, d))
    cdef double[:, ::1] o = out
    cdef int i, j, k
    cdef double ab, ba
    for i in range(d):
        for j in range(i, d):
            ab = 0.0
            ba = 0.0
            for k in range(d):
                ab += a[i, k] * b[k, j]
                ba += b[i, k] * a[k, j]
            o[i, j] = 0.5 * (ab + ba)
            o[j, i] = o[i, j]
    return out


cdef _omega(double[::1] w):
    # First divided differences of max(r, 0) on the spectrum; pairs within
    # 1e-12 max(1, |w_i|, |w_j|) are treated as equal with the symmetric tie
    # value 1 if w_i + w_j > 0 else 0.
    cdef int d = w.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((d, d))
    cdef double[:, ::1] om = out
    cdef int i, j
    cdef double wi, wj, wpi, wpj, den, tol, m
    for i in range(d):
        wi = w[i]
        wpi = wi if wi > 0.0 else 0.0
        for j in range(i, d):
            wj = w[j]
            wpj = wj if wj > 0.0 else 0.0
            den = wi - wj
            m = fabs(wi) if fabs(wi) > fabs(wj) else fabs(wj)
            tol = 1e-12 * (m if m > 1.0 else 1.0)
            if fabs(den) <= tol:
                om[i, j] = 1.0 if wi + wj > 0.0 else 0.0
            else:
                om[i, j] = (wpi - wpj) / den
            om[j, i] = om[i, j]
    return out


cdef _rotate_in(double[:, :] p, double[:, :] h, double[:, ::1] tmp, double[:, ::1] ht):
    # ht = P^T h P using tmp = h P.
    cdef int d = p.shape[0]
    cdef int i, j, k
    cdef double acc
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += h[i, k] * p[k, j]
            tmp[i, j] = acc
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += p[k, i] * tmp[k, j]
            ht[i, j] = acc


def dpsd_apply(double[::1] w, double[:, :] p, double[:, ::1] h):
    """Directional derivative of the PSD projection at eig (w, p) applied to h."""
    cdef int d = w.shape[0]
    cdef cnp.ndarray[double, ndim=2] tmp = np.empty((d, d))
    cdef cnp.ndarray[double, ndim=2] ht = np.empty((d, d))
    cdef double[:, ::1] tmpv = tmp
    cdef double[:, ::1] htv = ht
    _rotate_in(p, h, tmpv, htv)
    cdef cnp.ndarray[double, ndim=2] om = _omega(w)
    cdef double[:, ::1] omv = om
    cdef int i, j, k
    cdef double acc
    for i in range(d):
        for j in range(d):
            htv[i, j] *= omv[i, j]
    # rotate back: P (omega . ht) P^T, then mirror for exact symmetry
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += htv[i, k] * p[j, k]
            tmpv[i, j] = acc
    cdef cnp.ndarray[double, ndim=2] res = np.empty((d, d))
    cdef double[:, ::1] r = res
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += p[i, k] * tmpv[k, j]
            r[i, j] = acc
    for i in range(d):
        for j in range(i + 1, d):
            acc = 0.5 * (r[i, j] + r[j, i])
            r[i, j] = acc
            r[j, i] = acc
    return res


def loewner_gram(double[::1] w, double[:, :] p, double[:, :, ::1] a_stack):
    """Gram matrix K[i, j] = <A_i, DPi(w, p)[A_j]> over a stack of symmetric A_i."""
    cdef int n = a_stack.shape[0]
    cdef int d = w.shape[0]
    cdef cnp.ndarray[double, ndim=2] om = _omega(w)
    cdef double[:, ::1] omv = om
    cdef cnp.ndarray[double, ndim=3] at = np.empty((n, d, d))
    cdef double[:, :, ::1] atv = at
    cdef cnp.ndarray[double, ndim=2] tmp = np.empty((d, d))
    cdef double[:, ::1] tmpv = tmp
    cdef int t, i, j, k
    cdef double acc
    for t in range(n):
        _rotate_in(p, a_stack[t], tmpv, atv[t])
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, n))
    cdef double[:, ::1] o = out
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for k in range(d):
                for t in range(d):
                    acc += omv[k, t] * atv[i, k, t] * atv[j, k, t]
            o[i, j] = acc
            o[j, i] = acc
    return out
