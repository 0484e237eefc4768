"""Dense block-encodings of Hermitian operators and polynomial transforms.

Everything here is explicit matrix arithmetic on small operators: unitary
dilations, spectral shifts, and the Chebyshev recurrence that applies a
bounded polynomial to an encoded operator's eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
ENCODING_TOL = 1e-10
TRANSFORM_HERMITIAN_TOL = 1e-10
RADIUS_TOL = 1e-9
STATE_NORM_TOL = 1e-10

# Dense constructions only; guard against accidentally huge inputs.
DEFAULT_DIM_CAP = 64


class MatrixFormatError(ValueError):
    """Raised when a matrix file does not parse."""


def _as_matrix(m):
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix")
    return arr


@dataclass(frozen=True)
class HermitianOp:
    """A validated Hermitian matrix with its dimension."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        arr = _as_matrix(self.matrix)
        if arr.shape[0] != self.dim:
            raise ValueError("dim does not match matrix shape")
        if self.dim < 1 or self.dim > DEFAULT_DIM_CAP:
            raise ValueError(f"dimension must be in [1, {DEFAULT_DIM_CAP}]")
        if np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def from_matrix(cls, m):
        arr = _as_matrix(m)
        return cls(matrix=arr, dim=arr.shape[0])

    def spectral_norm(self):
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))


@dataclass(frozen=True)
class BlockEncoding:
    """Unitary whose top-left block equals encoded/gamma.

    The ancilla register is the leading tensor factor, so the selected
    block is simply the first dim-by-dim corner.
    """

    unitary: np.ndarray
    gamma: float
    ancillas: int
    encoded: HermitianOp

    def __post_init__(self):
        u = _as_matrix(self.unitary)
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.ancillas < 1:
            raise ValueError("need at least one ancilla dimension")
        n = self.encoded.dim
        if u.shape[0] % n != 0 or u.shape[0] <= n:
            raise ValueError("unitary dimension incompatible with encoded operator")
        eye = np.eye(u.shape[0])
        if np.max(np.abs(u.conj().T @ u - eye)) > UNITARY_TOL:
            raise ValueError("block-encoding matrix is not unitary within tolerance")
        block = self.gamma * u[:n, :n]
        if np.max(np.abs(block - self.encoded.matrix)) > ENCODING_TOL:
            raise ValueError("top-left block does not reproduce the encoded operator")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)


@dataclass(frozen=True)
class TransformedOp:
    """P(H') together with the number of encoding queries it cost."""

    matrix: np.ndarray
    query_count: int

    def __post_init__(self):
        arr = _as_matrix(self.matrix)
        if self.query_count < 0:
            raise ValueError("query_count must be nonnegative")
        if np.max(np.abs(arr - arr.conj().T)) > TRANSFORM_HERMITIAN_TOL:
            raise ValueError("transformed operator is not Hermitian within tolerance")
        if np.max(np.abs(np.linalg.eigvalsh(arr))) > 1.0 + RADIUS_TOL:
            raise ValueError("transformed operator has spectral radius above 1")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)


def dilate(h, gamma):
    """Standard unitary dilation of H/gamma using sqrt(I - (H/gamma)^2).

    The square root is taken in H's own eigenbasis so both blocks commute
    and the dilation is exactly unitary up to rounding.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if h.spectral_norm() > gamma * (1.0 + 1e-12):
        raise ValueError("spectral norm exceeds gamma")
    a = h.matrix / gamma
    w, v = np.linalg.eigh(a)
    s2 = 1.0 - w * w
    if np.min(s2) < -1e-12:
        raise ValueError("eigenvalue outside [-1, 1] after normalisation")
    s = (v * np.sqrt(np.clip(s2, 0.0, None))) @ v.conj().T
    u = np.block([[a, s], [s, -a]])
    return BlockEncoding(unitary=u, gamma=float(gamma), ancillas=1, encoded=h)


def shift_and_scale(h, mu0, gamma):
    """Return (H - mu0 I) / (gamma + |mu0|), spectrum mapped into [-1, 1]."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if abs(mu0) > gamma:
        raise ValueError("|mu0| must not exceed gamma")
    if h.spectral_norm() > gamma * (1.0 + 1e-12):
        raise ValueError("spectral norm exceeds gamma")
    shifted = (h.matrix - mu0 * np.eye(h.dim)) / (gamma + abs(mu0))
    return HermitianOp.from_matrix(shifted)


def apply_poly(hp, poly):
    """Apply the polynomial to hp's eigenvalues via the Chebyshev recurrence.

    Builds T_k(Hp) iteratively (T_{k+1} = 2 Hp T_k - T_{k-1}) and sums with
    the coefficients; the query count equals the polynomial degree.
    """
    if hp.spectral_norm() > 1.0 + RADIUS_TOL:
        raise ValueError("operator spectral radius exceeds 1 beyond tolerance")
    m = hp.matrix
    n = hp.dim
    acc = poly.coeffs[0] * np.eye(n, dtype=complex)
    if poly.degree >= 1:
        t_prev = np.eye(n, dtype=complex)
        t_cur = m.astype(complex)
        acc = acc + poly.coeffs[1] * t_cur
        for k in range(2, poly.degree + 1):
            t_next = 2.0 * (m @ t_cur) - t_prev
            t_prev, t_cur = t_cur, t_next
            acc = acc + poly.coeffs[k] * t_cur
    acc = 0.5 * (acc + acc.conj().T)  # discard rounding skew
    return TransformedOp(matrix=acc, query_count=poly.degree)


def right_probability(top, psi):
    """Probability ||P(H') psi||^2 of the post-transform success outcome."""
    vec = np.asarray(psi, dtype=complex).reshape(-1)
    if vec.shape[0] != top.matrix.shape[0]:
        raise ValueError("state dimension does not match operator")
    if abs(np.linalg.norm(vec) - 1.0) > STATE_NORM_TOL:
        raise ValueError("state is not normalised within tolerance")
    out = top.matrix @ vec
    p = float(np.real(np.vdot(out, out)))
    return min(max(p, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Matrix file format: "dim n" header, then n rows of n entries like 0.5-0.25j.


def _fmt_complex(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


def write_matrix(path, h):
    with open(path, "w", newline="") as fh:
        fh.write(f"dim {h.dim}\n")
        for row in h.matrix:
            fh.write(" ".join(_fmt_complex(z) for z in row) + "\n")


def read_matrix(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim":
        raise MatrixFormatError("first line must be 'dim n'")
    try:
        n = int(head[1])
    except ValueError as exc:
        raise MatrixFormatError("dimension is not an integer") from exc
    if n < 1 or len(lines) != n + 1:
        raise MatrixFormatError("row count does not match declared dimension")
    rows = []
    for ln in lines[1:]:
        fields = ln.split()
        if len(fields) != n:
            raise MatrixFormatError("column count does not match declared dimension")
        try:
            rows.append([complex(f) for f in fields])
        except ValueError as exc:
            raise MatrixFormatError(f"unparseable entry in row {len(rows)}") from exc
    return HermitianOp.from_matrix(np.array(rows))
