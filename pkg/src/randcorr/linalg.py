"""Dense real matrix primitives: SVD, the three norms, CSV round-trip.

Matrices are plain float64 numpy arrays throughout the package; `as_matrix`
is the single entry point that enforces the carrier contract (2-d, finite).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

TOL_ORTH = 1e-9
TOL_RECON = 1e-9


def as_matrix(a, square: bool = False) -> np.ndarray:
    """Validate and convert to a float64 2-d array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains NaN or Inf entries")
    if square and m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class SvdTriple:
    """Singular value decomposition a = u @ diag(sigma) @ v.T.

    sigma is sorted descending and non-negative; u and v are orthogonal
    within `tol_orth`.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T

    def orthogonality_residual(self) -> float:
        n = self.u.shape[0]
        eye = np.eye(n)
        ru = np.linalg.norm(self.u @ self.u.T - eye)
        rv = np.linalg.norm(self.v @ self.v.T - eye)
        return max(ru, rv)

    def reconstruction_residual(self, a: np.ndarray) -> float:
        denom = np.linalg.norm(a)
        if denom == 0.0:
            return np.linalg.norm(self.reconstruct())
        return np.linalg.norm(self.reconstruct() - a) / denom


def svd(a, tol_orth: float = TOL_ORTH, tol_recon: float = TOL_RECON) -> SvdTriple:
    """Full SVD of a square matrix, validated against its invariants."""
    m = as_matrix(a, square=True)
    try:
        u, s, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    triple = SvdTriple(u=u, sigma=s, v=vt.T)
    r_orth = triple.orthogonality_residual()
    r_recon = triple.reconstruction_residual(m)
    if r_orth > tol_orth or r_recon > tol_recon:
        raise NumericalError(
            "SVD result violates tolerances",
            detail={"orth_residual": r_orth, "recon_residual": r_recon},
        )
    return triple


def singular_values(a) -> np.ndarray:
    m = as_matrix(a, square=True)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def trace_norm(a) -> float:
    """Sum of singular values."""
    return float(singular_values(a).sum())


def operator_norm(a) -> float:
    """Largest singular value."""
    return float(singular_values(a)[0])


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a)))


def flatness_ratio(a) -> float:
    """Spectral flatness n * ||a||_op / ||a||_tr; 1 iff all singular values equal."""
    m = as_matrix(a, square=True)
    s = singular_values(m)
    total = s.sum()
    if total == 0.0:
        raise ValidationError("flatness_ratio is undefined for the zero matrix")
    return float(m.shape[0] * s[0] / total)


def is_orthogonal(a, tol: float = TOL_ORTH) -> bool:
    m = as_matrix(a, square=True)
    return bool(np.linalg.norm(m @ m.T - np.eye(m.shape[0])) <= tol)


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless CSV matrix (rows of comma-separated decimals)."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValidationError(f"empty matrix file: {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError(f"ragged rows in matrix file: {path}")
    return as_matrix(np.array(rows, dtype=float))


def write_matrix_csv(path, a) -> None:
    """Write a matrix as headerless CSV with 17-significant-digit round-trip."""
    m = as_matrix(a)
    with open(path, "w", encoding="ascii") as fh:
        for row in m:
            fh.write(",".join(format(x, ".17g") for x in row))
            fh.write("\n")
