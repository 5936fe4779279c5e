"""Symmetric-matrix kernel: svec/smat, eigendecomposition, cone projections.

Symmetric matrices are plain float64 numpy arrays.  Symmetry is established
once, at construction, via :func:`symmetrize` (bit-exact: ``(A + A.T)/2``);
every operation below assumes exactly symmetric input and preserves the
property exactly.  Values are never mutated in place, so they are safe to
share between threads.

Two interchangeable backends implement the numeric core:

* ``sqsdp._kernel_c`` - Cython + LAPACK ``dsyev``, built by setup.py;
* ``sqsdp._kernel_ref`` - pure numpy twin.

The compiled backend is preferred when importable.  Set ``SQSDP_KERNEL`` to
``c`` or ``python`` to force one (useful for the benchmark in
``benchmarks/bench_kernels.py``).  Both are deterministic: identical input
bits give identical output bits within a backend.
"""

import math
import os
from typing import NamedTuple

import numpy as np

from . import _kernel_ref
from .exceptions import DimensionError, EigenError

try:
    from . import _kernel_c
except ImportError:
    _kernel_c = None

_BACKENDS = {"python": _kernel_ref}
if _kernel_c is not None:
    _BACKENDS["c"] = _kernel_c


def _select_backend():
    forced = os.environ.get("SQSDP_KERNEL", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"SQSDP_KERNEL={forced!r} unavailable; built backends: {sorted(_BACKENDS)}"
            )
        return forced
    return "c" if "c" in _BACKENDS else "python"


_ACTIVE = _select_backend()
_impl = _BACKENDS[_ACTIVE]


def backend_name() -> str:
    """Name of the kernel backend selected at import ('c' or 'python')."""
    return _ACTIVE


def available_backends() -> dict:
    """Mapping of backend name to its implementation module."""
    return dict(_BACKENDS)


def get_backend(name: str):
    return _BACKENDS[name]


class EigenDecomposition(NamedTuple):
    """Eigenvalues in ascending order; eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square(a, op: str) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{op}: expected a square matrix, got shape {a.shape}")
    return a


def symmetrize(a) -> np.ndarray:
    """Construct a symmetric matrix as (A + A.T)/2; bit-exact symmetry."""
    a = _as_square(a, "symmetrize")
    return 0.5 * (a + a.T)


def svec(a) -> np.ndarray:
    """Vectorize: (A11, sqrt2 A21, ..., sqrt2 Ad1, A22, ..., Add).

    Isometric: <Y, Z> = svec(Y) . svec(Z) and ||Z||_F = ||svec(Z)||.
    """
    return _impl.svec(_as_square(a, "svec"))


def smat(v) -> np.ndarray:
    """Inverse of svec; the length must be a triangular number d(d+1)/2."""
    v = np.ascontiguousarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"smat: expected a vector, got shape {v.shape}")
    q = v.shape[0]
    d = int((math.isqrt(8 * q + 1) - 1) // 2)
    if d * (d + 1) // 2 != q or d < 1:
        raise DimensionError(f"smat: length {q} is not of the form d(d+1)/2")
    return _impl.smat(v, d)


def eig_sym(a) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    a = _as_square(a, "eig_sym")
    try:
        w, p = _impl.eig_sym(a)
    except np.linalg.LinAlgError as exc:
        norm = float(np.linalg.norm(a))
        raise EigenError(
            f"symmetric eigendecomposition failed (||A||_F = {norm:.6e}): {exc}"
        ) from exc
    return EigenDecomposition(w, p)


def psd_project(a) -> np.ndarray:
    """Frobenius projection onto the PSD cone: clamp negative eigenvalues."""
    a = _as_square(a, "psd_project")
    try:
        return _impl.psd_project(a)
    except np.linalg.LinAlgError as exc:
        norm = float(np.linalg.norm(a))
        raise EigenError(
            f"psd_project eigendecomposition failed (||A||_F = {norm:.6e}): {exc}"
        ) from exc


def psd_from_eig(w, p) -> np.ndarray:
    """PSD projection recomposed from a precomputed eigendecomposition."""
    return _impl.psd_from_eig(np.ascontiguousarray(w, float), p)


def box_project_spectral(a, zmax: float) -> np.ndarray:
    """Frobenius projection onto {Z : O <= Z <= zmax I}."""
    if not zmax > 0.0:
        raise ValueError(f"box_project_spectral: zmax must be positive, got {zmax}")
    a = _as_square(a, "box_project_spectral")
    try:
        return _impl.box_project_spectral(a, float(zmax))
    except np.linalg.LinAlgError as exc:
        norm = float(np.linalg.norm(a))
        raise EigenError(
            f"box_project_spectral eigendecomposition failed (||A||_F = {norm:.6e}): {exc}"
        ) from exc


def jordan_product(a, b) -> np.ndarray:
    """Jordan product (AB + BA)/2 of two symmetric matrices."""
    a = _as_square(a, "jordan_product")
    b = _as_square(b, "jordan_product")
    if a.shape != b.shape:
        raise DimensionError(f"jordan_product: shapes {a.shape} and {b.shape} differ")
    return _impl.jordan_product(a, b)


def dpsd_apply(w, p, h) -> np.ndarray:
    """Projection derivative at eigendecomposition (w, p) applied to h."""
    return _impl.dpsd_apply(np.ascontiguousarray(w, float), p, _as_square(h, "dpsd_apply"))


def dpsd_project(a, h) -> np.ndarray:
    """Directional derivative of psd_project at a, applied to h.

    In a's eigenbasis the image of h is scaled entrywise by the first divided
    differences of max(r, 0); coincident eigenvalues use the value
    1 if positive else 0 (generalized Jacobian convention).
    """
    a = _as_square(a, "dpsd_project")
    h = _as_square(h, "dpsd_project")
    if a.shape != h.shape:
        raise DimensionError(f"dpsd_project: shapes {a.shape} and {h.shape} differ")
    w, p = eig_sym(a)
    return _impl.dpsd_apply(w, p, h)


def loewner_gram(w, p, a_stack) -> np.ndarray:
    """Gram matrix <A_i, DPi[A_j]> of the projection derivative over a stack."""
    a_stack = np.ascontiguousarray(a_stack, dtype=float)
    return _impl.loewner_gram(np.ascontiguousarray(w, float), p, a_stack)
