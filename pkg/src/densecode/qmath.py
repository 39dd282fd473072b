"""Finite-dimensional quantum states, entropies and distances.

Density matrices carry their tensor-factor dimensions explicitly, so that
multi-register bookkeeping (permuting, merging, tracing factors) is index
arithmetic rather than ad-hoc reshapes.  All entropic quantities are in bits
(logarithms base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvariantError

# Structural tolerances for state validation.
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12

# Eigenvalues below this cutoff are treated as zero in 0*log(0) limits and in
# support detection for the relative entropy.
EIG_CUTOFF = 1e-12

LOG2E = 1.0 / math.log(2.0)


def _as_complex(matrix) -> np.ndarray:
    return np.asarray(matrix, dtype=complex)


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """(M + M†)/2, used before eigendecompositions to suppress drift."""
    return 0.5 * (matrix + matrix.conj().T)


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector with explicit tensor-factor dimensions."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = _as_complex(self.amplitudes).reshape(-1)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)
        if any(d <= 0 for d in dims):
            raise InvariantError(f"factor dimensions must be positive, got {dims}")
        side = int(np.prod(dims))
        if amps.shape != (side,):
            raise DimensionMismatchError(
                f"amplitude vector of length {amps.shape[0]} does not match dims {dims}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvariantError(f"state vector squared norm {norm2} is not 1")

    @property
    def side(self) -> int:
        return self.amplitudes.shape[0]

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace operator with explicit factor dimensions."""

    dims: tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        mat = _as_complex(self.entries)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", mat)
        if any(d <= 0 for d in dims):
            raise InvariantError(f"factor dimensions must be positive, got {dims}")
        side = int(np.prod(dims))
        if mat.shape != (side, side):
            raise DimensionMismatchError(
                f"matrix of shape {mat.shape} does not match dims {dims} (side {side})"
            )
        herm_defect = float(np.max(np.abs(mat - mat.conj().T))) if side else 0.0
        if herm_defect > HERMITICITY_TOL:
            raise InvariantError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
        eigs = np.linalg.eigvalsh(hermitize(mat))
        if eigs.min() < -POSITIVITY_TOL:
            raise InvariantError(f"matrix has negative eigenvalue {eigs.min():.3e}")
        tr = float(mat.trace().real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantError(f"trace {tr} is not 1")

    @property
    def side(self) -> int:
        return self.entries.shape[0]

    @property
    def n_factors(self) -> int:
        return len(self.dims)


def basis_state(d: int, index: int, dims: Sequence[int] | None = None) -> PureState:
    """Computational basis vector |index> on C^d (or on the given factors)."""
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return PureState(tuple(dims) if dims is not None else (d,), amps)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    side = int(np.prod(list(dims)))
    return DensityMatrix(tuple(dims), np.eye(side, dtype=complex) / side)


def maximally_entangled(d: int) -> PureState:
    """(1/sqrt(d)) sum_i |ii> on C^d x C^d."""
    amps = np.zeros(d * d, dtype=complex)
    for i in range(d):
        amps[i * d + i] = 1.0
    return PureState((d, d), amps / math.sqrt(d))


def singlet() -> PureState:
    """(|01> - |10>)/sqrt(2)."""
    amps = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
    return PureState((2, 2), amps)


def bell_state(which: int) -> PureState:
    """The four Bell vectors; 0..3 = Phi+, Psi+, Psi-, Phi-."""
    phi = maximally_entangled(2).amplitudes
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    ops = [np.eye(2, dtype=complex), x, x @ z, z]
    amps = np.kron(ops[which], np.eye(2)) @ phi
    return PureState((2, 2), amps)


def binary_entropy(p: float) -> float:
    """H2(p) in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product; factor lists concatenate."""
    return DensityMatrix(a.dims + b.dims, np.kron(a.entries, b.entries))


def tensor_pure(a: PureState, b: PureState) -> PureState:
    return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def _check_factors(dims: Sequence[int], factors: Iterable[int]) -> tuple[int, ...]:
    factors = tuple(int(f) for f in factors)
    for f in factors:
        if f < 0 or f >= len(dims):
            raise DimensionMismatchError(f"factor index {f} out of range for dims {dims}")
    if len(set(factors)) != len(factors):
        raise DimensionMismatchError(f"repeated factor indices in {factors}")
    return factors


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``.

    The kept factors appear in ascending original order.
    """
    keep = tuple(sorted(_check_factors(rho.dims, keep)))
    if not keep:
        raise DimensionMismatchError("keep must name at least one factor")
    n = rho.n_factors
    dims = list(rho.dims)
    tensor_view = rho.entries.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for idx in sorted(drop, reverse=True):
        tensor_view = np.trace(tensor_view, axis1=idx, axis2=idx + len(dims))
        dims.pop(idx)
    side = int(np.prod(dims))
    return DensityMatrix(tuple(dims), tensor_view.reshape(side, side))


def permute_factors(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder the tensor factors of a density matrix."""
    order = _check_factors(rho.dims, order)
    if len(order) != rho.n_factors:
        raise DimensionMismatchError("order must be a permutation of all factors")
    n = rho.n_factors
    dims = list(rho.dims)
    perm = list(order) + [n + i for i in order]
    tens = rho.entries.reshape(dims + dims).transpose(perm)
    new_dims = tuple(rho.dims[i] for i in order)
    side = rho.side
    return DensityMatrix(new_dims, tens.reshape(side, side))


def permute_factors_pure(psi: PureState, order: Sequence[int]) -> PureState:
    order = _check_factors(psi.dims, order)
    if len(order) != len(psi.dims):
        raise DimensionMismatchError("order must be a permutation of all factors")
    tens = psi.amplitudes.reshape(psi.dims).transpose(order)
    return PureState(tuple(psi.dims[i] for i in order), tens.reshape(-1))


def merge_factors(rho: DensityMatrix, groups: Sequence[Sequence[int]]) -> DensityMatrix:
    """Permute factors into the given groups and fuse each group into one factor.

    Every factor must appear in exactly one group.  Useful for reducing a
    multi-register problem to a bipartite one.
    """
    flat = [f for g in groups for f in g]
    permuted = permute_factors(rho, flat)
    new_dims = tuple(int(np.prod([rho.dims[f] for f in g])) for g in groups)
    return DensityMatrix(new_dims, permuted.entries)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum lambda log2 lambda over the spectrum, with the zero-eigenvalue limit."""
    return entropy_of_spectrum(np.linalg.eigvalsh(hermitize(rho.entries)))


def entropy_of_spectrum(eigs: np.ndarray) -> float:
    lam = np.asarray(eigs, dtype=float)
    lam = lam[lam > EIG_CUTOFF]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log2(lam)))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr rho (log2 rho - log2 sigma); +inf when supp(rho) leaks out of supp(sigma)."""
    if rho.dims != sigma.dims:
        raise DimensionMismatchError(f"dims {rho.dims} vs {sigma.dims}")
    lam_r, vec_r = np.linalg.eigh(hermitize(rho.entries))
    lam_s, vec_s = np.linalg.eigh(hermitize(sigma.entries))
    kernel = vec_s[:, lam_s <= EIG_CUTOFF]
    if kernel.shape[1]:
        leak = float(np.sum(np.abs(kernel.conj().T @ rho.entries @ kernel).diagonal().real))
        if leak > EIG_CUTOFF:
            return math.inf
    term_rho = float(np.sum(lam_r[lam_r > EIG_CUTOFF] * np.log2(lam_r[lam_r > EIG_CUTOFF])))
    support = lam_s > EIG_CUTOFF
    weights = np.einsum("ij,jk,ki->i", vec_s.conj().T, rho.entries, vec_s).real
    term_sigma = float(np.sum(weights[support] * np.log2(lam_s[support])))
    return term_rho - term_sigma


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Trace norm ||a - b||_1 (sum of singular values); 2 for orthogonal pure states."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims {a.dims} vs {b.dims}")
    return trace_norm(a.entries - b.entries)


def trace_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.svd(matrix, compute_uv=False).sum())


def partial_transpose(rho: DensityMatrix, factor: int) -> np.ndarray:
    """Transpose one tensor factor; the result is Hermitian but maybe not PSD."""
    (factor,) = _check_factors(rho.dims, (factor,))
    return partial_transpose_raw(rho.entries, rho.dims, factor)


class PPTResult(NamedTuple):
    ppt: bool
    min_eigenvalue: float


def is_ppt(rho: DensityMatrix, cut: Iterable[int]) -> PPTResult:
    """Transpose the factors in ``cut`` and report the minimal eigenvalue.

    A nonnegative spectrum certifies non-distillability across that cut.
    """
    cut = _check_factors(rho.dims, cut)
    if not cut or len(cut) == rho.n_factors:
        raise DimensionMismatchError("cut must be a proper nonempty subset of factors")
    out = rho.entries
    for f in cut:
        out = partial_transpose_raw(out, rho.dims, f)
    min_eig = float(np.linalg.eigvalsh(hermitize(out)).min())
    return PPTResult(min_eig >= -POSITIVITY_TOL, min_eig)


def partial_transpose_raw(matrix: np.ndarray, dims: Sequence[int], factor: int) -> np.ndarray:
    n = len(dims)
    dims = list(dims)
    tens = matrix.reshape(dims + dims)
    perm = list(range(2 * n))
    perm[factor], perm[n + factor] = perm[n + factor], perm[factor]
    side = int(np.prod(dims))
    return tens.transpose(perm).reshape(side, side)


class SchmidtDecomposition(NamedTuple):
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray


def schmidt(psi: PureState, cut: Iterable[int]) -> SchmidtDecomposition:
    """Schmidt decomposition across the bipartition (cut | rest).

    Returns descending nonnegative coefficients and the matching orthonormal
    vectors as columns, so that after moving the ``cut`` factors to the front
    psi = sum_i c_i left[:, i] (x) right[:, i].
    """
    cut = tuple(sorted(_check_factors(psi.dims, cut)))
    rest = tuple(i for i in range(len(psi.dims)) if i not in cut)
    if not cut or not rest:
        raise DimensionMismatchError("cut must be a proper nonempty subset of factors")
    reordered = permute_factors_pure(psi, cut + rest)
    d_left = int(np.prod([psi.dims[i] for i in cut]))
    d_right = reordered.side // d_left
    mat = reordered.amplitudes.reshape(d_left, d_right)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return SchmidtDecomposition(s, u, vh.T)
