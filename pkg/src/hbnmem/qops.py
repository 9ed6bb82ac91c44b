"""Dense operator core for a three-level emitter coupled to one cavity mode.

The composite space is ``atom (g, e, s) x Fock(0..n_max)``. Basis states are
ordered atomic-major, photon-minor::

    index = atomic_index * (n_max + 1) + photon_number

so for ``n_max = 1`` the basis is ``|g,0>, |g,1>, |e,0>, |e,1>, |s,0>, |s,1>``.

Operators are plain ``numpy`` complex arrays. Dimensions are small (tens),
so everything is dense.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEVELS = ("g", "e", "s")


class DimensionError(ValueError):
    """Raised when operand shapes do not agree."""


def _check_square(mat: np.ndarray, dim: int, what: str = "operator") -> None:
    if mat.shape != (dim, dim):
        raise DimensionError(f"{what} has shape {mat.shape}, expected ({dim}, {dim})")


@dataclass(frozen=True)
class HilbertSpace:
    """Atom x cavity space with photon cutoff ``n_max``."""

    n_max: int = 1
    levels: tuple[str, ...] = LEVELS

    def __post_init__(self):
        if int(self.n_max) < 1:
            raise ValueError(f"photon cutoff must be >= 1, got {self.n_max}")
        if tuple(self.levels) != LEVELS:
            raise ValueError(f"atomic levels must be {LEVELS}, got {self.levels}")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return len(self.levels) * self.n_fock

    def level_index(self, label: str) -> int:
        try:
            return self.levels.index(label)
        except ValueError:
            raise KeyError(f"unknown level label {label!r}; expected one of {self.levels}") from None

    def index(self, level: str, photons: int) -> int:
        if not 0 <= photons <= self.n_max:
            raise ValueError(f"photon number {photons} outside 0..{self.n_max}")
        return self.level_index(level) * self.n_fock + photons

    def basis(self, level: str, photons: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(level, photons)] = 1.0
        return v

    def labels(self) -> list[str]:
        return [f"{lv},{n}" for lv in self.levels for n in range(self.n_fock)]

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


@dataclass(frozen=True)
class StateVector:
    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (self.space.dim,):
            raise DimensionError(f"state has length {amp.size}, expected {self.space.dim}")
        norm = np.linalg.norm(amp)
        if norm == 0:
            raise ValueError("cannot normalise the zero vector")
        amp = amp / norm
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density operator.

    Construction checks Hermiticity (1e-10), unit trace (1e-9) and
    positivity (smallest eigenvalue >= -1e-8).
    """

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    HERMITIAN_TOL = 1e-10
    TRACE_TOL = 1e-9
    EIG_TOL = 1e-8

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        _check_square(rho, self.space.dim, "density matrix")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > self.HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if lam[0] < -self.EIG_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def pure(cls, space: HilbertSpace, level: str, photons: int) -> "DensityMatrix":
        v = space.basis(level, photons)
        return cls(space, np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        return cls(space, space.identity() / space.dim)

    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise DimensionError(f"cannot commute {a.shape} with {b.shape}")
    return a @ b - b @ a


def matmul(*ops: np.ndarray) -> np.ndarray:
    """Multiply a chain of operators left to right, checking inner dimensions."""
    out = ops[0]
    for op in ops[1:]:
        if out.shape[1] != op.shape[0]:
            raise DimensionError(f"cannot multiply {out.shape} by {op.shape}")
        out = out @ op
    return out


def hermitian_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix."""
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got {h.shape}")
    return np.linalg.eigh(h)


def atomic_operator(i: str, j: str, space: HilbertSpace) -> np.ndarray:
    """``|i><j|`` on the atom, identity on the cavity."""
    proj = np.zeros((len(space.levels), len(space.levels)), dtype=complex)
    proj[space.level_index(i), space.level_index(j)] = 1.0
    return np.kron(proj, np.eye(space.n_fock))


def annihilation_operator(space: HilbertSpace) -> np.ndarray:
    """Cavity lowering operator, identity on the atom."""
    a = np.diag(np.sqrt(np.arange(1, space.n_fock)), k=1).astype(complex)
    return np.kron(np.eye(len(space.levels)), a)


def number_operator(space: HilbertSpace) -> np.ndarray:
    a = annihilation_operator(space)
    return dag(a) @ a


def excitation_number(space: HilbertSpace) -> np.ndarray:
    """Photon number plus one quantum for the atom in ``|e>``.

    ``|g,1>``, ``|e,0>`` and ``|s,0>`` all carry one excitation under this
    count, which is what the Raman write Hamiltonian conserves.
    """
    return number_operator(space) + atomic_operator("e", "e", space) + atomic_operator("s", "s", space)


def expectation(state: DensityMatrix, observable: np.ndarray) -> complex:
    """``Tr(rho O)``."""
    rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    obs = np.asarray(observable)
    if obs.shape != rho.shape:
        raise DimensionError(f"observable shape {obs.shape} does not match state {rho.shape}")
    return complex(np.einsum("ij,ji->", rho, obs))
