"""Multi-qudit index arithmetic and the dense linear algebra every other module uses.

Sites are numbered 1..n, flat basis indices 0..d^n-1 with the digit of site 1
most significant. Matrices are plain numpy arrays; `DensityMatrix` and
`PureState` freeze their arrays so values can be shared across workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .. import config
from ..errors import (
    ConvergenceFailure,
    DimensionMismatch,
    EmptySubset,
    InvalidShape,
    LevelOutOfRange,
    NotHermitian,
    NotNormalized,
    NotPSD,
    SiteOutOfRange,
    TraceNotOne,
)

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

MAX_DIM = 2**20


@dataclass(frozen=True)
class SystemShape:
    """n constituents of uniform local dimension d."""

    n: int
    d: int = 2

    def __post_init__(self):
        if self.n < 1 or self.d < 2:
            raise InvalidShape(f"need n >= 1 and d >= 2, got n={self.n}, d={self.d}")
        if self.d**self.n > MAX_DIM:
            raise InvalidShape(f"d^n = {self.d}^{self.n} exceeds the supported {MAX_DIM}")

    @property
    def total_dim(self) -> int:
        return self.d**self.n

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * self.n

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))


@dataclass(frozen=True)
class BasisLabel:
    digits: tuple[int, ...]
    flat_index: int

    @classmethod
    def from_flat(cls, shape: SystemShape, flat_index: int) -> "BasisLabel":
        return cls(digits_of(shape, flat_index), int(flat_index))

    def __str__(self) -> str:
        return "".join(str(x) for x in self.digits)


def digits_of(shape: SystemShape, flat_index: int) -> tuple[int, ...]:
    if not 0 <= flat_index < shape.total_dim:
        raise LevelOutOfRange(f"flat index {flat_index} outside [0, {shape.total_dim})")
    return tuple(int(x) for x in np.unravel_index(flat_index, shape.dims))


def flat_of(shape: SystemShape, digits: Sequence[int]) -> int:
    if len(digits) != shape.n:
        raise DimensionMismatch(f"expected {shape.n} digits, got {len(digits)}")
    if any(not 0 <= x < shape.d for x in digits):
        raise LevelOutOfRange(f"digits {tuple(digits)} outside 0..{shape.d - 1}")
    return int(np.ravel_multi_index(tuple(digits), shape.dims))


def _frozen(arr: ArrayLike) -> NDArray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD trace-one operator. Build through `validate_density` for untrusted input."""

    shape: SystemShape
    mat: ComplexMatrix

    def __post_init__(self):
        object.__setattr__(self, "mat", _frozen(self.mat))
        dim = self.shape.total_dim
        if self.mat.shape != (dim, dim):
            raise DimensionMismatch(f"matrix {self.mat.shape} does not fit {self.shape.n} sites of d={self.shape.d}")

    @property
    def dim(self) -> int:
        return self.shape.total_dim


@dataclass(frozen=True)
class PureState:
    shape: SystemShape
    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes).ravel())
        if self.amplitudes.size != self.shape.total_dim:
            raise DimensionMismatch(f"{self.amplitudes.size} amplitudes for dimension {self.shape.total_dim}")

    def conj(self) -> NDArray[np.complex128]:
        """Entrywise conjugate in the computational basis."""
        return self.amplitudes.conj()

    def projector(self) -> DensityMatrix:
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))


# --- Validation ---

def validate_density(mat: ArrayLike, shape: SystemShape) -> DensityMatrix:
    """Checks the density-matrix invariants and symmetrizes away sub-tolerance asymmetry."""
    mat = np.asarray(mat, dtype=np.complex128)
    dim = shape.total_dim
    if mat.ndim != 2 or mat.shape != (dim, dim):
        raise DimensionMismatch(f"expected a {dim}x{dim} matrix, got {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NotHermitian("matrix has non-finite entries")

    deviation = float(np.max(np.abs(mat - mat.conj().T)))
    if deviation >= config.TOL_HERM:
        raise NotHermitian(f"Hermiticity deviation {deviation:.3e} >= {config.TOL_HERM:.1e}")
    mat = (mat + mat.conj().T) / 2

    trace = float(np.real(np.trace(mat)))
    if abs(trace - 1.0) > config.TOL_TRACE:
        raise TraceNotOne(f"trace {trace:.12g} != 1")

    smallest = float(scipy.linalg.eigvalsh(mat)[0])
    if smallest < -config.tol_psd(dim):
        raise NotPSD(f"eigenvalue {smallest:.3e} below -{config.tol_psd(dim):.1e}")

    return DensityMatrix(shape, mat)


def validate_pure(amplitudes: ArrayLike, shape: SystemShape) -> PureState:
    amplitudes = np.asarray(amplitudes, dtype=np.complex128).ravel()
    if amplitudes.size != shape.total_dim:
        raise DimensionMismatch(f"expected {shape.total_dim} amplitudes, got {amplitudes.size}")
    norm2 = float(np.real(np.vdot(amplitudes, amplitudes)))
    if abs(norm2 - 1.0) > config.TOL_NORM:
        raise NotNormalized(f"squared norm {norm2:.12g} != 1")
    return PureState(shape, amplitudes)


# --- Reductions ---

def _check_sites(shape: SystemShape, sites: Iterable[int]) -> tuple[int, ...]:
    sites = tuple(sorted(set(int(i) for i in sites)))
    if not sites:
        raise EmptySubset("site subset is empty")
    bad = [i for i in sites if not 1 <= i <= shape.n]
    if bad:
        raise SiteOutOfRange(f"sites {bad} outside 1..{shape.n}")
    return sites


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the kept sites (listed in increasing order)."""
    shape = rho.shape
    keep = _check_sites(shape, keep)
    if len(keep) == shape.n:
        return rho

    n, d = shape.n, shape.d
    keep_axes = [i - 1 for i in keep]
    drop_axes = [a for a in range(n) if a not in keep_axes]
    dk, dt = d ** len(keep_axes), d ** len(drop_axes)

    t = rho.mat.reshape((d,) * (2 * n))
    t = t.transpose(keep_axes + drop_axes + [n + a for a in keep_axes] + [n + a for a in drop_axes])
    reduced = np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))
    return DensityMatrix(SystemShape(len(keep), d), reduced)


def partial_trace_pure(psi: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Same as `partial_trace(psi.projector(), keep)` without forming the projector."""
    shape = psi.shape
    keep = _check_sites(shape, keep)
    n, d = shape.n, shape.d
    keep_axes = [i - 1 for i in keep]
    drop_axes = [a for a in range(n) if a not in keep_axes]

    m = psi.amplitudes.reshape(shape.dims).transpose(keep_axes + drop_axes)
    m = m.reshape(d ** len(keep_axes), -1)
    return DensityMatrix(SystemShape(len(keep), d), m @ m.conj().T)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2)."""
    return float(np.real(np.einsum("ij,ji->", rho.mat, rho.mat)))


# --- Spectral primitives ---

def herm_eig(mat: ArrayLike) -> tuple[NDArray[np.float64], ComplexMatrix]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order."""
    mat = np.asarray(mat, dtype=np.complex128)
    deviation = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if deviation >= config.TOL_HERM:
        raise NotHermitian(f"Hermiticity deviation {deviation:.3e}")
    mat = (mat + mat.conj().T) / 2

    try:
        evals, evecs = scipy.linalg.eigh(mat)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigh failed: {exc}") from exc
    evals, evecs = evals[::-1], evecs[:, ::-1]

    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    error = float(np.max(np.abs(mat - (evecs * evals) @ evecs.conj().T))) if mat.size else 0.0
    if error >= config.TOL_EIG * scale:
        raise ConvergenceFailure(f"reconstruction error {error:.3e}")
    return evals, evecs


def sqrt_psd(mat: ArrayLike) -> ComplexMatrix:
    """Principal square root; eigenvalues in [-tol_psd, 0) are clamped to zero."""
    mat = np.asarray(mat, dtype=np.complex128)
    evals, evecs = herm_eig(mat)
    if evals.size and evals[-1] < -config.tol_psd(mat.shape[0]):
        raise NotPSD(f"eigenvalue {evals[-1]:.3e} below -{config.tol_psd(mat.shape[0]):.1e}")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return (evecs * roots) @ evecs.conj().T


# --- Site relabeling and product construction ---

def _axis_order(images: Sequence[int]) -> list[int]:
    n = len(images)
    if sorted(images) != list(range(1, n + 1)):
        raise SiteOutOfRange(f"{tuple(images)} is not a permutation of 1..{n}")
    inverse = [0] * n
    for i, image in enumerate(images, start=1):
        inverse[image - 1] = i
    # new axis k holds the old axis of the site mapped onto k+1
    return [inverse[k] - 1 for k in range(n)]


def permute_sites(rho: DensityMatrix, images: Sequence[int]) -> DensityMatrix:
    """Moves the content of site i onto site images[i-1]."""
    shape = rho.shape
    if len(images) != shape.n:
        raise DimensionMismatch(f"permutation of {len(images)} sites for {shape.n} sites")
    order = _axis_order(images)
    n = shape.n
    t = rho.mat.reshape((shape.d,) * (2 * n)).transpose(order + [n + a for a in order])
    return DensityMatrix(shape, t.reshape(shape.total_dim, shape.total_dim))


def product_on_sites(shape: SystemShape, factors: Sequence[tuple[Sequence[int], ArrayLike]]) -> PureState:
    """Tensor product of vectors, each living on its own (disjoint) group of sites."""
    placed: list[int] = []
    vec = np.ones(1, dtype=np.complex128)
    for sites, factor in factors:
        sites = list(sites)
        factor = np.asarray(factor, dtype=np.complex128).ravel()
        if factor.size != shape.d ** len(sites):
            raise DimensionMismatch(f"factor of size {factor.size} on {len(sites)} sites")
        placed.extend(sites)
        vec = np.kron(vec, factor)
    if sorted(placed) != list(shape.sites):
        raise SiteOutOfRange(f"factors cover sites {sorted(placed)}, expected 1..{shape.n}")

    axes = [placed.index(i) for i in shape.sites]
    vec = vec.reshape((shape.d,) * shape.n).transpose(axes)
    return PureState(shape, vec.ravel())


# --- JSON ---

def _encode(values: NDArray[np.float64], exact: bool) -> list:
    if exact:
        return [repr(float(x)) for x in values]
    return [float(f"{x:.12g}") for x in values]


def state_to_dict(state: DensityMatrix | PureState, exact: bool = False) -> dict:
    """Row-major real/imaginary parts; decimal strings when `exact`."""
    data = state.mat if isinstance(state, DensityMatrix) else state.amplitudes
    flat = np.asarray(data).ravel()
    return {
        "n": state.shape.n,
        "d": state.shape.d,
        "re": _encode(flat.real, exact),
        "im": _encode(flat.imag, exact),
    }


def state_from_dict(payload: dict) -> DensityMatrix | PureState:
    shape = SystemShape(int(payload["n"]), int(payload["d"]))
    re = np.array([float(x) for x in payload["re"]])
    im = np.array([float(x) for x in payload["im"]])
    if re.shape != im.shape:
        raise DimensionMismatch("re and im lengths differ")
    values = re + 1j * im
    if values.size == shape.total_dim:
        return validate_pure(values, shape)
    if values.size == shape.total_dim**2:
        return validate_density(values.reshape(shape.total_dim, shape.total_dim), shape)
    raise DimensionMismatch(f"{values.size} entries fit neither a state nor a density matrix of {shape}")
