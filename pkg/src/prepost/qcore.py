"""Finite-dimensional state and operator algebra.

States and operators are thin immutable wrappers over dense numpy arrays.
Time evolution uses U(t) = exp(-iHt) with hbar = 1, built from the
eigendecomposition of H.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, ZeroVector

CONSTRUCTION_TOL = 1e-10
HERMITIAN_TOL = 1e-8


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class State:
    """Unit-norm pure state. Build through :func:`normalize` or :meth:`from_amplitudes`."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = _frozen(self.amplitudes)
        if v.ndim != 1 or v.size == 0:
            raise DimensionMismatch(f"state must be a non-empty vector, got shape {v.shape}")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > CONSTRUCTION_TOL:
            raise ValueError(f"state norm {norm!r} is not 1; use normalize()")
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def from_amplitudes(cls, v):
        return normalize(v)

    @property
    def dim(self):
        return self.amplitudes.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"State({np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        _check_square(m)
        err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if err > HERMITIAN_TOL:
            raise NotHermitian(f"operator deviates from its adjoint by {err:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other):
        return HermitianOperator(self.entries + as_matrix(other))


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        _check_square(m)
        err = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))
        if err > CONSTRUCTION_TOL:
            raise ValueError(f"operator is not unitary (max |UU^dag - I| = {err:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, k):
        v = self.eigenvectors[:, k]
        return np.outer(v, v.conj())


def _check_square(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"operator must be a non-empty square matrix, got {m.shape}")


def as_matrix(op):
    """Return the dense matrix behind an operator wrapper or array-like."""
    if isinstance(op, (HermitianOperator, UnitaryOperator)):
        return op.entries
    if hasattr(op, "matrix"):
        return np.asarray(op.matrix)
    return np.asarray(op, dtype=complex)


def as_vector(s):
    if isinstance(s, State):
        return s.amplitudes
    return np.asarray(s, dtype=complex)


def normalize(v):
    """Scale ``v`` to unit norm, keeping its global phase.

    Raises :class:`ZeroVector` when ``||v|| < 1e-14``.
    """
    v = np.asarray(v, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm < 1e-14:
        raise ZeroVector("cannot normalize a zero vector")
    return State(v / norm)


def _same_dim(a, b):
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"dimension {a.shape[0]} does not match {b.shape[0]}")


def inner(a, b):
    """<a|b>, conjugate-linear in the first argument."""
    va, vb = as_vector(a), as_vector(b)
    _same_dim(va, vb)
    return complex(np.vdot(va, vb))


def state_fidelity(a, b):
    """|<a|b>|^2 for unit states; symmetric and blind to global phase."""
    f = abs(inner(a, b)) ** 2
    return float(min(max(f, 0.0), 1.0))


def eigh(H):
    """Eigendecomposition of a Hermitian operator, eigenvalues ascending."""
    if not isinstance(H, HermitianOperator):
        H = HermitianOperator(H)
    m = H.entries
    # symmetrize away the sub-tolerance asymmetry before LAPACK sees it
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(w, v)


def unitary_from_hamiltonian(H, t):
    """U(t) = V diag(exp(-i lambda t)) V^dagger."""
    spec = H if isinstance(H, Spectrum) else eigh(H)
    v = spec.eigenvectors
    phases = np.exp(-1j * spec.eigenvalues * t)
    return UnitaryOperator((v * phases) @ v.conj().T)


def apply(op, s):
    """Matrix-vector product. Returns ``(vector, norm)``; the vector is not renormalized."""
    m = as_matrix(op)
    v = as_vector(s)
    if m.ndim != 2 or m.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"operator {m.shape} cannot act on vector of length {v.shape[0]}")
    out = m @ v
    return out, float(np.linalg.norm(out))


# Pauli matrices and named operators used by scenarios and tests.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

NAMED_OPERATORS = {
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "identity": np.eye(2, dtype=complex),
}


def named_operator(name):
    try:
        return HermitianOperator(NAMED_OPERATORS[name])
    except KeyError:
        raise KeyError(f"unknown operator {name!r}; known: {sorted(NAMED_OPERATORS)}") from None


def random_hermitian(d, rng, scale=1.0):
    """GUE-like random Hermitian matrix of dimension ``d``."""
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return HermitianOperator(scale * 0.5 * (x + x.conj().T))


def random_state(d, rng):
    return normalize(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_unitary(d, rng):
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def to_pairs(a):
    """Complex array -> nested lists of [re, im] pairs (row-major for matrices)."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def from_pairs(pairs):
    a = np.asarray(pairs, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError("expected trailing [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]
