"""Quantum operations: Kraus families, Choi matrices, Stinespring isometries.

Conventions fixed here (they make file interchange unambiguous):

* A channel maps d_in x d_in density matrices to d_out x d_out ones via
  rho -> sum_k K_k rho K_k^dag with sum_k K_k^dag K_k = I.
* The Choi operator is C(T) = sum_ij T(|i><j|) (x) |i><j| on the factor pair
  [d_out, d_in]; it is unnormalized, so tracing out the output factor gives
  the d_in identity.  Two channels are equal iff their Choi operators are.
* Stinespring isometries map C^{d_in} into C^{d_out} (x) C^{d_env} with the
  environment as the *second* factor, V[(out, env), in].
* Every sampling routine takes an explicit seed (or Generator); the contract
  is "same seed, bit-identical stream" within one build.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qmath
from .errors import DimensionMismatchError, InvariantError
from .qmath import DensityMatrix, hermitize

COMPLETENESS_TOL = 1e-10
ISOMETRY_TOL = 1e-10
CHOI_EQUALITY_TOL = 1e-8
# Choi eigenvalues below this are dropped when canonicalizing a Kraus family.
KRAUS_CUTOFF = 1e-12


def as_rng(seed) -> np.random.Generator:
    """Accept either an integer seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by a Kraus family of d_out x d_in matrices."""

    d_in: int
    d_out: int
    kraus: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        object.__setattr__(self, "kraus", kraus)
        if not kraus:
            raise InvariantError("a channel needs at least one Kraus operator")
        for k in kraus:
            if k.shape != (self.d_out, self.d_in):
                raise DimensionMismatchError(
                    f"Kraus operator of shape {k.shape}, expected {(self.d_out, self.d_in)}"
                )
        total = sum(k.conj().T @ k for k in kraus)
        defect = float(np.max(np.abs(total - np.eye(self.d_in))))
        if defect > COMPLETENESS_TOL:
            raise InvariantError(f"Kraus completeness defect {defect:.3e}")

    @classmethod
    def identity(cls, d: int) -> "QuantumChannel":
        return cls(d, d, (np.eye(d, dtype=complex),))

    @classmethod
    def from_unitary(cls, u) -> "QuantumChannel":
        u = np.asarray(u, dtype=complex)
        return cls(u.shape[1], u.shape[0], (u,))

    @classmethod
    def constant_replacement(cls, d_in: int, output: DensityMatrix) -> "QuantumChannel":
        """The map rho -> output (e.g. the constant map onto I/2)."""
        lam, vec = np.linalg.eigh(hermitize(output.entries))
        ops = []
        for i in range(lam.size):
            if lam[i] <= KRAUS_CUTOFF:
                continue
            col = np.sqrt(lam[i]) * vec[:, i]
            for j in range(d_in):
                k = np.zeros((output.side, d_in), dtype=complex)
                k[:, j] = col
                ops.append(k)
        return cls(d_in, output.side, tuple(ops))

    @classmethod
    def projection_onto(cls, d_in: int, d_out: int, index: int = 0) -> "QuantumChannel":
        """rho -> |index><index|, discarding all input information."""
        ops = []
        for j in range(d_in):
            k = np.zeros((d_out, d_in), dtype=complex)
            k[index, j] = 1.0
            ops.append(k)
        return cls(d_in, d_out, tuple(ops))

    @classmethod
    def embedding(cls, d_in: int, d_out: int) -> "QuantumChannel":
        """Isometric embedding of C^{d_in} into the first d_in levels of C^{d_out}."""
        if d_out < d_in:
            raise DimensionMismatchError("embedding needs d_out >= d_in")
        k = np.zeros((d_out, d_in), dtype=complex)
        k[:d_in, :] = np.eye(d_in)
        return cls(d_in, d_out, (k,))

    @classmethod
    def depolarizing(cls, lam: float = 1.0) -> "QuantumChannel":
        """Qubit map rho -> (1-lam) rho + lam I/2."""
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        z = np.diag([1.0, -1.0]).astype(complex)
        i = np.eye(2, dtype=complex)
        p = lam / 4.0
        ops = (np.sqrt(1 - 3 * p) * i, np.sqrt(p) * x, np.sqrt(p) * y, np.sqrt(p) * z)
        return cls(2, 2, ops)

    @classmethod
    def trace_out_factor(cls, dims: Sequence[int], drop: Sequence[int]) -> "QuantumChannel":
        """Partial trace over the ``drop`` factors of an input with the given dims."""
        dims = tuple(int(d) for d in dims)
        drop = tuple(sorted(int(i) for i in drop))
        keep = tuple(i for i in range(len(dims)) if i not in drop)
        if not keep or not drop:
            raise DimensionMismatchError("drop must be a proper nonempty subset")
        d_in = int(np.prod(dims))
        d_keep = int(np.prod([dims[i] for i in keep]))
        d_drop = d_in // d_keep
        # <j|_drop acting after the permutation that sorts kept factors first.
        perm = _permutation_matrix(dims, list(keep) + list(drop))
        eye_keep = np.eye(d_keep, dtype=complex)
        ops = []
        for j in range(d_drop):
            bra = np.zeros((1, d_drop), dtype=complex)
            bra[0, j] = 1.0
            ops.append(np.kron(eye_keep, bra) @ perm)
        return cls(d_in, d_keep, tuple(ops))


def _permutation_matrix(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary that reorders tensor factors of C^{prod dims} into ``order``."""
    dims = list(dims)
    side = int(np.prod(dims))
    perm = np.zeros((side, side), dtype=complex)
    src = np.arange(side).reshape(dims)
    dst = src.transpose(order).reshape(-1)
    perm[np.arange(side), dst] = 1.0
    return perm


@dataclass(frozen=True, eq=False)
class StinespringIsometry:
    """V: C^{d_in} -> C^{d_out} (x) C^{d_env} with V^dag V = I."""

    d_in: int
    d_out: int
    d_env: int
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        object.__setattr__(self, "v", v)
        if v.shape != (self.d_out * self.d_env, self.d_in):
            raise DimensionMismatchError(
                f"isometry of shape {v.shape}, expected {(self.d_out * self.d_env, self.d_in)}"
            )
        defect = float(np.max(np.abs(v.conj().T @ v - np.eye(self.d_in))))
        if defect > ISOMETRY_TOL:
            raise InvariantError(f"isometry defect {defect:.3e}")


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Unnormalized Choi operator on factors [d_out, d_in]."""

    d_in: int
    d_out: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        side = self.d_in * self.d_out
        if mat.shape != (side, side):
            raise DimensionMismatchError(f"Choi matrix of shape {mat.shape}, side {side} expected")

    def as_state(self) -> DensityMatrix:
        """The normalized Choi state (matrix / d_in) with dims [d_out, d_in]."""
        return DensityMatrix((self.d_out, self.d_in), self.matrix / self.d_in)


def apply(channel: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """sum_k K rho K^dag, as a density matrix on a single output factor."""
    if rho.side != channel.d_in:
        raise DimensionMismatchError(f"state side {rho.side} vs channel input {channel.d_in}")
    out = np.zeros((channel.d_out, channel.d_out), dtype=complex)
    for k in channel.kraus:
        out += k @ rho.entries @ k.conj().T
    return DensityMatrix((channel.d_out,), hermitize(out))


def apply_local(channel: QuantumChannel, rho: DensityMatrix, factor: int) -> DensityMatrix:
    """Act with the channel on one tensor factor, identity on the rest."""
    if factor < 0 or factor >= rho.n_factors:
        raise DimensionMismatchError(f"factor {factor} out of range for dims {rho.dims}")
    if rho.dims[factor] != channel.d_in:
        raise DimensionMismatchError(
            f"factor dimension {rho.dims[factor]} vs channel input {channel.d_in}"
        )
    d_before = int(np.prod(rho.dims[:factor])) if factor else 1
    d_after = int(np.prod(rho.dims[factor + 1:])) if factor + 1 < rho.n_factors else 1
    eye_b = np.eye(d_before, dtype=complex)
    eye_a = np.eye(d_after, dtype=complex)
    side_out = d_before * channel.d_out * d_after
    out = np.zeros((side_out, side_out), dtype=complex)
    for k in channel.kraus:
        lifted = np.kron(eye_b, np.kron(k, eye_a))
        out += lifted @ rho.entries @ lifted.conj().T
    new_dims = rho.dims[:factor] + (channel.d_out,) + rho.dims[factor + 1:]
    return DensityMatrix(new_dims, hermitize(out))


def choi(channel: QuantumChannel) -> ChoiMatrix:
    """C(T) = sum_k w_k w_k^dag with w_k the row-major flattening of K_k."""
    side = channel.d_in * channel.d_out
    mat = np.zeros((side, side), dtype=complex)
    for k in channel.kraus:
        w = k.reshape(-1)
        mat += np.outer(w, w.conj())
    return ChoiMatrix(channel.d_in, channel.d_out, mat)


def channels_equal(a: QuantumChannel, b: QuantumChannel, tol: float = CHOI_EQUALITY_TOL) -> bool:
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise DimensionMismatchError("cannot compare channels of different shapes")
    return float(np.max(np.abs(choi(a).matrix - choi(b).matrix))) <= tol


def dilate(channel: QuantumChannel) -> StinespringIsometry:
    """Canonical Stinespring isometry with minimal environment.

    Kraus operators are re-extracted from the Choi eigendecomposition, so the
    environment dimension is the Choi rank (at most d_in * d_out).
    """
    ops = canonical_kraus(channel)
    d_env = len(ops)
    v = np.zeros((channel.d_out * d_env, channel.d_in), dtype=complex)
    for e, k in enumerate(ops):
        # row (out, env) = out * d_env + e
        v[e::d_env, :] = k
    return StinespringIsometry(channel.d_in, channel.d_out, d_env, v)


def canonical_kraus(channel: QuantumChannel) -> tuple[np.ndarray, ...]:
    c = choi(channel)
    lam, vec = np.linalg.eigh(hermitize(c.matrix))
    ops = []
    for i in range(lam.size - 1, -1, -1):
        if lam[i] <= KRAUS_CUTOFF:
            break
        ops.append(np.sqrt(lam[i]) * vec[:, i].reshape(channel.d_out, channel.d_in))
    if not ops:
        raise InvariantError("channel has numerically vanishing Choi matrix")
    return tuple(ops)


def undilate(iso: StinespringIsometry) -> QuantumChannel:
    """Recover the Kraus family K_e = (I (x) <e|) V."""
    v = iso.v.reshape(iso.d_out, iso.d_env, iso.d_in)
    ops = tuple(v[:, e, :] for e in range(iso.d_env))
    return QuantumChannel(iso.d_in, iso.d_out, ops)


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with R-phase correction."""
    rng = as_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) < 1e-300] = 1.0
    return q * (diag / np.abs(diag))


def random_isometry(d_rows: int, d_cols: int, seed) -> np.ndarray:
    """Haar-distributed isometry (first d_cols columns of a Haar unitary)."""
    if d_rows < d_cols:
        raise DimensionMismatchError(f"no isometry with {d_rows} rows and {d_cols} columns")
    rng = as_rng(seed)
    z = (rng.standard_normal((d_rows, d_cols)) + 1j * rng.standard_normal((d_rows, d_cols)))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) < 1e-300] = 1.0
    return q * (diag / np.abs(diag))


def random_state(dims: Sequence[int], rank: int, seed) -> DensityMatrix:
    """Normalized Wishart state of the given rank."""
    rng = as_rng(seed)
    dims = tuple(int(d) for d in dims)
    side = int(np.prod(dims))
    g = rng.standard_normal((side, rank)) + 1j * rng.standard_normal((side, rank))
    mat = g @ g.conj().T
    return DensityMatrix(dims, hermitize(mat / mat.trace().real))


def random_pure(dims: Sequence[int], seed) -> qmath.PureState:
    rng = as_rng(seed)
    dims = tuple(int(d) for d in dims)
    side = int(np.prod(dims))
    amps = rng.standard_normal(side) + 1j * rng.standard_normal(side)
    return qmath.PureState(dims, amps / np.linalg.norm(amps))


def random_channel(d_in: int, d_out: int, d_env: int, seed) -> QuantumChannel:
    """Channel induced by a Haar isometry into out (x) env."""
    if d_out * d_env < d_in:
        raise DimensionMismatchError(
            f"no isometry from {d_in} into {d_out}*{d_env}; need d_out*d_env >= d_in"
        )
    v = random_isometry(d_out * d_env, d_in, seed)
    return undilate(StinespringIsometry(d_in, d_out, d_env, v))


def weyl_basis(d: int) -> list[np.ndarray]:
    """The d^2 shift-and-clock unitaries W_{a,b} = X^a Z^b.

    They are pairwise orthogonal in the Hilbert-Schmidt inner product,
    Tr(W_i^dag W_j) = d delta_ij, and averaging W rho W^dag over all of them
    exactly depolarizes: (1/d^2) sum W rho W^dag = I/d.
    """
    if d < 2:
        raise DimensionMismatchError("weyl_basis needs d >= 2")
    omega = np.exp(2j * np.pi / d)
    shift = np.zeros((d, d), dtype=complex)
    for j in range(d):
        shift[(j + 1) % d, j] = 1.0
    clock = np.diag(omega ** np.arange(d))
    basis = []
    xa = np.eye(d, dtype=complex)
    for _a in range(d):
        zb = np.eye(d, dtype=complex)
        for _b in range(d):
            basis.append(xa @ zb)
            zb = zb @ clock
        xa = xa @ shift
    return basis


def weyl_twirl(rho: DensityMatrix, factor: int) -> DensityMatrix:
    """Average (W (x) I) rho (W (x) I)^dag over the Weyl basis of the factor."""
    d = rho.dims[factor]
    acc = np.zeros_like(rho.entries)
    for w in weyl_basis(d):
        acc += apply_local(QuantumChannel.from_unitary(w), rho, factor).entries
    return DensityMatrix(rho.dims, hermitize(acc / (d * d)))


def compose(after: QuantumChannel, before: QuantumChannel) -> QuantumChannel:
    """The channel rho -> after(before(rho))."""
    if before.d_out != after.d_in:
        raise DimensionMismatchError(
            f"cannot compose: inner output {before.d_out} vs outer input {after.d_in}"
        )
    ops = tuple(a @ b for a in after.kraus for b in before.kraus)
    chan = QuantumChannel(before.d_in, after.d_out, ops)
    if len(ops) > before.d_in * after.d_out:
        chan = QuantumChannel(before.d_in, after.d_out, canonical_kraus(chan))
    return chan


def tensor_channels(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """The product channel acting as a on the first factor and b on the second."""
    ops = tuple(np.kron(ka, kb) for ka in a.kraus for kb in b.kraus)
    chan = QuantumChannel(a.d_in * b.d_in, a.d_out * b.d_out, ops)
    if len(ops) > chan.d_in * chan.d_out:
        chan = QuantumChannel(chan.d_in, chan.d_out, canonical_kraus(chan))
    return chan
