"""Programmable quantum gates: programs, approximation, scalability witnesses.

A programmable gate is a fixed unitary on data (x) program registers; feeding
a program state and discarding the program register induces a channel on the
data.  For gates built from controlled unitary blocks the induced map of any
program is exactly the mixture of the blocks weighted by the program's
squared amplitudes, which this module exploits heavily: superposition
programs realize nearby-unitary mixtures whose first-order errors cancel, so
useful approximation nets stay far smaller than pure-atom coverings would.

All unitary comparisons are phase-quotiented (global phases are invisible in
the induced maps).  Suprema over inputs are *estimated* (Haar sampling plus
local ascent); the estimation method travels with every error value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from . import channels as ch
from . import qmath
from .channels import QuantumChannel
from .errors import (
    DimensionMismatchError,
    InvariantError,
    NotAProgramError,
    SizeGuardError,
)
from .qmath import PureState, hermitize

UNITARITY_TOL = 1e-10
PROGRAM_TOL = 1e-6
MAX_PROGRAM_DIM = 4096
# Dense gate matrices are only materialized up to this side.
MAX_DENSE_GATE_SIDE = 4096


@dataclass(frozen=True, eq=False)
class ProgrammableGate:
    """Unitary on data (x) program; ``blocks`` is set for controlled-unitary gates."""

    d_data: int
    d_program: int
    unitary: np.ndarray | None = field(repr=False, default=None)
    blocks: tuple[np.ndarray, ...] | None = field(repr=False, default=None)

    def __post_init__(self):
        if self.unitary is None and self.blocks is None:
            raise InvariantError("gate needs a unitary matrix or controlled blocks")
        if self.blocks is not None:
            blocks = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
            object.__setattr__(self, "blocks", blocks)
            if len(blocks) != self.d_program:
                raise DimensionMismatchError("number of blocks must equal d_program")
            for b in blocks:
                _check_unitary(b, self.d_data)
        if self.unitary is not None:
            u = np.asarray(self.unitary, dtype=complex)
            object.__setattr__(self, "unitary", u)
            _check_unitary(u, self.d_data * self.d_program)

    @property
    def matrix(self) -> np.ndarray:
        """Dense gate unitary (built from blocks on demand, size permitting)."""
        if self.unitary is not None:
            return self.unitary
        side = self.d_data * self.d_program
        if side > MAX_DENSE_GATE_SIDE:
            raise SizeGuardError(f"dense gate of side {side} exceeds {MAX_DENSE_GATE_SIDE}")
        u = np.zeros((side, side), dtype=complex)
        for q, b in enumerate(self.blocks):
            proj = np.zeros((self.d_program, self.d_program))
            proj[q, q] = 1.0
            u += np.kron(b, proj)
        return u


def _check_unitary(u: np.ndarray, side: int):
    if u.shape != (side, side):
        raise DimensionMismatchError(f"matrix of shape {u.shape}, expected side {side}")
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(side))))
    if defect > UNITARITY_TOL:
        raise InvariantError(f"matrix is not unitary (defect {defect:.3e})")


@dataclass(frozen=True, eq=False)
class UnitaryNet:
    """A finite set of unitaries with an estimated covering radius."""

    elements: tuple[np.ndarray, ...] = field(repr=False)
    covering_radius: float = math.nan
    method: str = "unset"
    metadata: dict = field(default_factory=dict)


class ErrorEstimate(NamedTuple):
    """An estimated supremum with the estimation method attached."""

    value: float
    method: str
    n_samples: int


@dataclass
class OrthogonalityVerdict:
    consistent: bool
    proportional: bool
    orthogonal: bool
    overlap: float
    choi_collinearity: float
    tol: float


@dataclass
class WitnessReport:
    """Best program found for a target on a tensor pair of gates."""

    best_error: float
    best_program: PureState | None
    program_weights: list[tuple[tuple[int, int], float]] | None
    sup_estimate: ErrorEstimate
    n_inputs: int
    seed: int
    method: str


@dataclass
class EmulationReport:
    program: PureState
    measured_error: float
    n_samples: int
    seed: int
    program_error: ErrorEstimate


@dataclass(frozen=True)
class WitnessConfig:
    n_inputs: int = 24
    seed: int = 0
    sup_samples: int = 200
    fw_iterations: int = 80
    pair_budget: int = 20000
    per_factor_top: int = 40
    general_dim_guard: int = 64
    general_restarts: int = 12


# ---------------------------------------------------------------------------
# Construction and induced maps
# ---------------------------------------------------------------------------


def control_gate(units: Sequence[np.ndarray]) -> ProgrammableGate:
    """sum_i U_i (x) |i><i|: each basis program implements its block exactly."""
    units = tuple(np.asarray(u, dtype=complex) for u in units)
    if not units:
        raise InvariantError("control_gate needs at least one unitary")
    d = units[0].shape[0]
    for u in units:
        _check_unitary(u, d)
    return ProgrammableGate(d, len(units), blocks=units)


def tensor_gates(a: ProgrammableGate, b: ProgrammableGate) -> ProgrammableGate:
    """Gate acting as a and b in parallel, reordered to data (x) program.

    The tensor product of controlled-block gates is again a controlled-block
    gate over block pairs (j, l) -> U_j (x) V_l with program index j * dP_b + l.
    """
    if a.blocks is not None and b.blocks is not None:
        blocks = tuple(np.kron(u, v) for u in a.blocks for v in b.blocks)
        return ProgrammableGate(a.d_data * b.d_data, a.d_program * b.d_program, blocks=blocks)
    side = a.d_data * b.d_data * a.d_program * b.d_program
    if side > MAX_DENSE_GATE_SIDE:
        raise SizeGuardError(f"tensored gate of side {side} exceeds {MAX_DENSE_GATE_SIDE}")
    big = np.kron(a.matrix, b.matrix)
    dims = [a.d_data, a.d_program, b.d_data, b.d_program]
    perm = _reorder_unitary(big, dims, [0, 2, 1, 3])
    return ProgrammableGate(a.d_data * b.d_data, a.d_program * b.d_program, unitary=perm)


def _reorder_unitary(u: np.ndarray, dims: list[int], order: list[int]) -> np.ndarray:
    side = int(np.prod(dims))
    tens = u.reshape(dims + dims)
    n = len(dims)
    perm = list(order) + [n + i for i in order]
    return tens.transpose(perm).reshape(side, side)


def induced_map(gate: ProgrammableGate, psi: PureState) -> QuantumChannel:
    """The channel the program state selects on the data register."""
    if psi.side != gate.d_program:
        raise DimensionMismatchError(
            f"program of dimension {psi.side}, gate expects {gate.d_program}"
        )
    if gate.blocks is not None:
        amps = psi.amplitudes
        ops = tuple(
            amps[q] * gate.blocks[q] for q in range(gate.d_program) if abs(amps[q]) > 1e-16
        )
        return QuantumChannel(gate.d_data, gate.d_data, ops)
    g4 = gate.matrix.reshape(gate.d_data, gate.d_program, gate.d_data, gate.d_program)
    kraus = np.einsum("akbq,q->kab", g4, psi.amplitudes)
    return QuantumChannel(gate.d_data, gate.d_data, tuple(kraus))


def mixture_program(gate: ProgrammableGate, weights: dict[int, float]) -> PureState:
    """Program whose induced map mixes the gate's blocks with the given weights."""
    if gate.blocks is None:
        raise InvariantError("mixture programs need a controlled-block gate")
    amps = np.zeros(gate.d_program, dtype=complex)
    for idx, w in weights.items():
        amps[idx] = math.sqrt(max(0.0, w))
    norm = np.linalg.norm(amps)
    if norm <= 0:
        raise InvariantError("mixture weights vanish")
    return PureState((gate.d_program,), amps / norm)


# ---------------------------------------------------------------------------
# Distances and error estimation
# ---------------------------------------------------------------------------


def unitary_map_distance(u: np.ndarray, v: np.ndarray) -> float:
    """sup over pure inputs of || u z u^dag - v z v^dag ||_1, phase-quotiented.

    Equals 2 sin(L/2) where L is the eigenphase spread of u^dag v (or 2 once
    the spread reaches pi).  For qubits this reduces to the trace formula
    2 sqrt(1 - |Tr(u^dag v)|^2 / 4).
    """
    if u.shape == (2, 2):
        overlap = abs(np.einsum("ab,ab->", u.conj(), v)) / 2.0
        return 2.0 * math.sqrt(max(0.0, 1.0 - min(1.0, overlap) ** 2))
    phases = np.sort(np.angle(np.linalg.eigvals(u.conj().T @ v)))
    if phases.size == 1:
        return 0.0
    gaps = np.diff(phases)
    wrap = 2.0 * math.pi - (phases[-1] - phases[0])
    span = 2.0 * math.pi - max(float(gaps.max()), float(wrap))
    if span >= math.pi:
        return 2.0
    return 2.0 * math.sin(span / 2.0)


def _channel_minus_unitary_td(kraus: Sequence[np.ndarray], target: np.ndarray, z: np.ndarray):
    zz = np.outer(z, z.conj())
    out = sum(k @ zz @ k.conj().T for k in kraus)
    delta = target @ zz @ target.conj().T - out
    lam, vec = np.linalg.eigh(hermitize(delta))
    td = float(np.abs(lam).sum())
    sign = (vec * np.sign(lam)) @ vec.conj().T
    return td, sign


def estimate_sup_error(
    kraus: Sequence[np.ndarray],
    target: np.ndarray,
    n_samples: int = 200,
    seed=0,
    ascent_steps: int = 50,
) -> ErrorEstimate:
    """Estimate sup over pure inputs of the trace distance to the target map.

    Haar-samples inputs, then follows a projected subgradient ascent from the
    best sample.  The result is a lower estimate of the true supremum; it
    never exceeds 2.
    """
    rng = ch.as_rng(seed)
    d = target.shape[0]
    best_td = 0.0
    best_z = None
    for _ in range(n_samples):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        z /= np.linalg.norm(z)
        td, _ = _channel_minus_unitary_td(kraus, target, z)
        if td > best_td:
            best_td, best_z = td, z
    if best_z is None:
        best_z = np.zeros(d, dtype=complex)
        best_z[0] = 1.0
    z = best_z
    step = 0.2
    td, sign = _channel_minus_unitary_td(kraus, target, z)
    for _ in range(ascent_steps):
        grad = 2.0 * (
            target.conj().T @ sign @ target @ z
            - sum(k.conj().T @ sign @ k @ z for k in kraus)
        )
        grad -= z * np.vdot(z, grad)
        gn = np.linalg.norm(grad)
        if gn < 1e-12:
            break
        cand = z + step * grad / gn
        cand /= np.linalg.norm(cand)
        td_c, sign_c = _channel_minus_unitary_td(kraus, target, cand)
        if td_c > td:
            z, td, sign = cand, td_c, sign_c
            step = min(0.5, step * 1.5)
        else:
            step *= 0.5
            if step < 1e-6:
                break
    return ErrorEstimate(min(2.0, td), "haar-sampling+ascent", n_samples)


def approximation_error(
    gate: ProgrammableGate,
    psi: PureState,
    target: np.ndarray,
    n_samples: int = 200,
    seed=0,
) -> ErrorEstimate:
    """Estimated worst-case trace distance of the induced map to a unitary target."""
    target = np.asarray(target, dtype=complex)
    if target.shape != (gate.d_data, gate.d_data):
        raise DimensionMismatchError(
            f"target of shape {target.shape}, expected side {gate.d_data}"
        )
    chan = induced_map(gate, psi)
    if len(chan.kraus) == 1:
        # Unitary-vs-unitary distances have a closed form; tag accordingly.
        k = chan.kraus[0]
        scale = np.linalg.norm(k) / math.sqrt(gate.d_data)
        return ErrorEstimate(unitary_map_distance(k / scale, target), "exact-unitary", 0)
    return estimate_sup_error(chan.kraus, target, n_samples, seed)


# ---------------------------------------------------------------------------
# Programs for targets: nearest atoms and optimized mixtures
# ---------------------------------------------------------------------------


def _bloch_rotation(u: np.ndarray) -> np.ndarray:
    """SO(3) action of a qubit unitary on the Bloch vector."""
    paulis = (
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.diag([1.0, -1.0]).astype(complex),
    )
    r = np.empty((3, 3))
    for j, pj in enumerate(paulis):
        conj = u @ pj @ u.conj().T
        for i, pi in enumerate(paulis):
            r[i, j] = 0.5 * np.trace(pi @ conj).real
    return r


def _qubit_mixture_sup(weights: np.ndarray, rotations: np.ndarray) -> float:
    """Exact sup-input trace distance of a qubit unitary mixture to the identity."""
    a = np.tensordot(weights, rotations, axes=1)
    return float(np.linalg.svd(np.eye(3) - a, compute_uv=False).max())


def optimize_mixture_weights(
    atoms: Sequence[np.ndarray], target: np.ndarray
) -> np.ndarray:
    """Simplex weights making the atom mixture approximate the target map.

    For qubits the exact worst-case Bloch distortion is minimized; otherwise a
    Choi-Frobenius proxy (a convex quadratic) is used.  Either way the caller
    should re-measure the resulting program error.
    """
    n = len(atoms)
    if n == 1:
        return np.ones(1)
    d = target.shape[0]
    rel = [target.conj().T @ a for a in atoms]
    x0 = np.full(n, 1.0 / n)
    constraints = [{"type": "eq", "fun": lambda w: w.sum() - 1.0}]
    bounds = [(0.0, 1.0)] * n
    if d == 2:
        rotations = np.stack([_bloch_rotation(m) for m in rel])
        fun = lambda w: _qubit_mixture_sup(w, rotations)
    else:
        vecs = np.stack([m.reshape(-1) / math.sqrt(d) for m in rel])
        ident = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)

        def fun(w):
            j = np.einsum("i,ia,ib->ab", w, vecs, vecs.conj())
            diff = j - np.outer(ident, ident.conj())
            return float(np.linalg.norm(diff) ** 2)

    res = minimize(fun, x0, method="SLSQP", bounds=bounds, constraints=constraints,
                   options={"maxiter": 200, "ftol": 1e-12})
    w = np.clip(res.x if res.success or res.x is not None else x0, 0.0, None)
    total = w.sum()
    return w / total if total > 0 else x0


def program_for_target(
    gate: ProgrammableGate,
    target: np.ndarray,
    n_nearest: int = 12,
    n_samples: int = 200,
    seed=0,
) -> tuple[PureState, ErrorEstimate]:
    """Best program found for a unitary target on a controlled-block gate.

    Compares the nearest single block with an optimized mixture of the
    nearest blocks and returns whichever measures better.
    """
    if gate.blocks is None:
        raise InvariantError("program_for_target needs a controlled-block gate")
    dists = np.array([unitary_map_distance(target, b) for b in gate.blocks])
    order = np.argsort(dists)
    best_idx = int(order[0])
    candidates: list[dict[int, float]] = [{best_idx: 1.0}]
    k = min(len(order), n_nearest)
    if k >= 2:
        chosen = [int(i) for i in order[:k]]
        weights = optimize_mixture_weights([gate.blocks[i] for i in chosen], target)
        candidates.append({i: float(w) for i, w in zip(chosen, weights) if w > 1e-9})
    best_prog, best_err = None, None
    for cand in candidates:
        prog = mixture_program(gate, cand)
        err = approximation_error(gate, prog, target, n_samples=n_samples, seed=seed)
        if best_err is None or err.value < best_err.value:
            best_prog, best_err = prog, err
    return best_prog, best_err


# ---------------------------------------------------------------------------
# Program orthogonality
# ---------------------------------------------------------------------------


def _unitary_from_program(gate: ProgrammableGate, psi: PureState, tol: float):
    """Top Choi component of the induced map; rejects non-programs."""
    chan = induced_map(gate, psi)
    c = ch.choi(chan).matrix
    lam, vec = np.linalg.eigh(hermitize(c))
    total = float(lam.sum())
    residual = (total - float(lam[-1])) / max(total, 1e-30)
    if residual > tol:
        raise NotAProgramError(
            f"induced map has Choi rank-1 residual {residual:.3e} beyond tolerance {tol}"
        )
    top = vec[:, -1]
    return top  # flattened unitary, up to phase and normalization


def program_orthogonality_check(
    gate: ProgrammableGate,
    psi1: PureState,
    psi2: PureState,
    tol: float = PROGRAM_TOL,
) -> OrthogonalityVerdict:
    """Check the dichotomy: essentially different programs must be orthogonal.

    Both states must be programs (unitary induced maps within ``tol``).  The
    verdict is consistent iff the induced unitaries are proportional (their
    Choi matrices collinear) or the programs are orthogonal.
    """
    w1 = _unitary_from_program(gate, psi1, tol)
    w2 = _unitary_from_program(gate, psi2, tol)
    collinearity = float(np.abs(np.vdot(w1, w2)))
    overlap = float(np.abs(np.vdot(psi1.amplitudes, psi2.amplitudes)))
    proportional = collinearity >= 1.0 - tol
    orthogonal = overlap <= tol
    return OrthogonalityVerdict(
        consistent=proportional or orthogonal,
        proportional=proportional,
        orthogonal=orthogonal,
        overlap=overlap,
        choi_collinearity=collinearity,
        tol=tol,
    )


def random_program_instance(seed) -> tuple[ProgrammableGate, PureState, PureState]:
    """A randomized gate with two genuine programs for dichotomy searches.

    Gates are controlled-block gates whose blocks may repeat up to phase;
    programs are drawn from basis states and superpositions within repeated
    groups, so non-orthogonal program pairs (with proportional unitaries)
    occur alongside orthogonal ones.
    """
    rng = ch.as_rng(seed)
    d_data = int(rng.integers(2, 4))
    n_groups = int(rng.integers(2, 4))
    group_units = [ch.random_unitary(d_data, rng) for _ in range(n_groups)]
    blocks = []
    group_of: list[int] = []
    for g, u in enumerate(group_units):
        copies = int(rng.integers(1, 3))
        for _ in range(copies):
            phase = np.exp(2j * np.pi * rng.random())
            blocks.append(phase * u)
            group_of.append(g)
    gate = control_gate(blocks)

    def random_program() -> PureState:
        # Any superposition inside a repeated-block group is an exact program:
        # the blocks differ only by phases, which fold into the program state.
        g = int(rng.integers(0, n_groups))
        members = [i for i, gi in enumerate(group_of) if gi == g]
        amps = np.zeros(len(blocks), dtype=complex)
        coeffs = rng.standard_normal(len(members)) + 1j * rng.standard_normal(len(members))
        for i, c in zip(members, coeffs):
            amps[i] = c
        amps /= np.linalg.norm(amps)
        return PureState((len(blocks),), amps)

    return gate, random_program(), random_program()


# ---------------------------------------------------------------------------
# Approximation nets
# ---------------------------------------------------------------------------


def _hopf_grid(spacing: float) -> list[np.ndarray]:
    """Euler-angle (Hopf-stratified) grid on SU(2) with given geodesic spacing."""
    atoms = []
    n_eta = max(1, math.ceil((math.pi / 2) / spacing))
    for k in range(n_eta):
        eta = (k + 0.5) * (math.pi / 2) / n_eta
        n1 = max(1, math.ceil(2.0 * math.pi * math.cos(eta) / spacing))
        n2 = max(1, math.ceil(2.0 * math.pi * math.sin(eta) / spacing))
        for i in range(n1):
            xi1 = 2.0 * math.pi * (i + 0.5 * (k % 2)) / n1
            for j in range(n2):
                xi2 = 2.0 * math.pi * (j + 0.5 * (i % 2)) / n2
                a = math.cos(eta) * np.exp(1j * xi1)
                b = math.sin(eta) * np.exp(1j * xi2)
                atoms.append(np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex))
    return atoms


def _measure_net(
    atoms: Sequence[np.ndarray],
    d: int,
    epsilon: float,
    n_targets: int,
    seed,
) -> tuple[float, float]:
    """(max program error, max atom distance) over Haar targets."""
    rng = np.random.default_rng(seed)
    gate = control_gate(atoms)
    max_prog = 0.0
    max_atom = 0.0
    for t in range(n_targets):
        target = ch.random_unitary(d, rng)
        _, err = program_for_target(gate, target, seed=seed + 7919 * t + 1)
        max_prog = max(max_prog, err.value)
        max_atom = max(max_atom, min(unitary_map_distance(target, a) for a in atoms))
        if max_prog > epsilon:
            break
    return max_prog, max_atom


def net_gate(epsilon: float, d: int, seed=0, n_targets: int = 100) -> tuple[ProgrammableGate, UnitaryNet]:
    """A gate whose programs reach every unitary on C^d within epsilon.

    For qubits the net is an Euler-angle grid whose spacing is calibrated
    until the measured certificate (best-program error on Haar targets)
    drops below epsilon; in higher dimensions random pools are grown with
    the covering only ever measured, never derived.  The program register is
    capped at 4096; requesting an epsilon that would need more trips the
    size guard.
    """
    if not (0.0 < epsilon <= 2.0):
        raise InvariantError("epsilon must lie in (0, 2]")
    if d < 2:
        raise DimensionMismatchError("net_gate needs d >= 2")
    rng = np.random.default_rng(seed)

    if d == 2:
        spacing = min(1.2, 1.35 * math.sqrt(epsilon))
        atoms = _hopf_grid(spacing)
        while True:
            if len(atoms) > MAX_PROGRAM_DIM:
                raise SizeGuardError(
                    f"net for epsilon={epsilon} needs {len(atoms)} programs (> {MAX_PROGRAM_DIM})"
                )
            max_prog, max_atom = _measure_net(atoms, d, epsilon, n_targets, seed)
            if max_prog <= epsilon:
                break
            spacing *= 0.8
            atoms = _hopf_grid(spacing)
        method = "euler-grid, program-certified"
    else:
        n = 4 * d * d
        while True:
            if n > MAX_PROGRAM_DIM:
                raise SizeGuardError(
                    f"net for epsilon={epsilon}, d={d} exceeds {MAX_PROGRAM_DIM} programs"
                )
            atoms = [ch.random_unitary(d, rng) for _ in range(n)]
            max_prog, max_atom = _measure_net(atoms, d, epsilon, n_targets, seed)
            if max_prog <= epsilon:
                break
            n = int(n * 1.6) + 1
        method = "random-pool, program-certified"

    gate = control_gate(atoms)
    net = UnitaryNet(
        elements=tuple(atoms),
        covering_radius=max_atom,
        method=method,
        metadata={
            "requested_epsilon": epsilon,
            "certificate_max_program_error": max_prog,
            "certificate_targets": n_targets,
            "seed": seed,
            "d": d,
            "size": len(atoms),
        },
    )
    return gate, net


def net_gate_around(
    targets: Sequence[np.ndarray],
    epsilon: float,
    seed=0,
    n_atoms_per_target: int = 24,
    n_decoys: int = 8,
) -> tuple[ProgrammableGate, UnitaryNet]:
    """A gate certified for specific targets instead of all of U(d).

    Full nets grow with the manifold dimension, so emulating encodings on
    composite registers uses pools of perturbed copies of each target (plus
    Haar decoys); the certificate measures the best-program error per target.
    """
    if not (0.0 < epsilon <= 2.0):
        raise InvariantError("epsilon must lie in (0, 2]")
    rng = np.random.default_rng(seed)
    targets = [np.asarray(t, dtype=complex) for t in targets]
    d = targets[0].shape[0]
    spread = 0.75 * math.sqrt(epsilon)
    max_err = math.inf
    gate = None
    atoms: list[np.ndarray] = []
    for _ in range(8):
        atoms = []
        for t in targets:
            for _ in range(n_atoms_per_target):
                h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                h = hermitize(h)
                h *= spread / max(1e-30, float(np.linalg.norm(np.linalg.eigvalsh(h), ord=np.inf)))
                lam, vec = np.linalg.eigh(h)
                atoms.append(t @ ((vec * np.exp(-1j * lam)) @ vec.conj().T))
        atoms.extend(ch.random_unitary(d, rng) for _ in range(n_decoys))
        if len(atoms) > MAX_PROGRAM_DIM:
            raise SizeGuardError("target-local net exceeds the program register guard")
        gate = control_gate(atoms)
        errors = []
        for i, t in enumerate(targets):
            _, err = program_for_target(gate, t, n_nearest=n_atoms_per_target, seed=seed + i)
            errors.append(err.value)
        max_err = max(errors)
        if max_err <= epsilon:
            break
        spread *= 0.7
    if max_err > epsilon:
        raise InvariantError(
            f"target-local certification failed: measured {max_err:.4f} > epsilon {epsilon}"
        )
    net = UnitaryNet(
        elements=tuple(atoms),
        covering_radius=math.nan,
        method="target-local pool, program-certified",
        metadata={
            "requested_epsilon": epsilon,
            "certificate_max_program_error": max_err,
            "certificate_targets": len(targets),
            "seed": seed,
            "d": d,
            "size": len(atoms),
        },
    )
    return gate, net


# ---------------------------------------------------------------------------
# Scalability witness
# ---------------------------------------------------------------------------


def operator_schmidt(u: np.ndarray, d1: int, d2: int):
    """Operator-Schmidt decomposition of a matrix on C^{d1} (x) C^{d2}."""
    m = u.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    w, s, vh = np.linalg.svd(m)
    lefts = [w[:, i].reshape(d1, d1) for i in range(s.size)]
    rights = [vh[i, :].reshape(d2, d2) for i in range(s.size)]
    return s, lefts, rights


def _avg_pure_pair_errors(
    pairs: np.ndarray,
    blocks1: Sequence[np.ndarray],
    blocks2: Sequence[np.ndarray],
    target: np.ndarray,
    inputs: np.ndarray,
) -> np.ndarray:
    """Average trace distance for block pairs acting as pure unitaries."""
    out = np.empty(len(pairs))
    tin = inputs @ target.T  # rows are (target z)
    for idx, (j, l) in enumerate(pairs):
        v = np.kron(blocks1[j], blocks2[l])
        ov = np.abs(np.einsum("sa,sa->s", tin.conj(), inputs @ v.T))
        out[idx] = float(np.mean(2.0 * np.sqrt(np.clip(1.0 - ov**2, 0.0, None))))
    return out


def _mixture_avg_error(
    weights: dict[tuple[int, int], float],
    blocks1: Sequence[np.ndarray],
    blocks2: Sequence[np.ndarray],
    target: np.ndarray,
    inputs: np.ndarray,
) -> float:
    total = 0.0
    for z in inputs:
        zz = np.outer(z, z.conj())
        out = np.zeros_like(zz)
        for (j, l), w in weights.items():
            v = np.kron(blocks1[j], blocks2[l])
            out += w * (v @ zz @ v.conj().T)
        total += qmath.trace_norm(target @ zz @ target.conj().T - out)
    return total / len(inputs)


def _frank_wolfe_polish(
    start: dict[tuple[int, int], float],
    candidate_pairs: list[tuple[int, int]],
    blocks1,
    blocks2,
    target,
    inputs,
    iterations: int,
) -> tuple[dict[tuple[int, int], float], float]:
    """Convex minimization of the average trace distance over pair mixtures."""
    s_count = len(inputs)
    pair_index = {pair: i for i, pair in enumerate(candidate_pairs)}
    # Y[p, s, :] = (V_j (x) V_l) z_s for candidate pair p.
    y = np.stack(
        [inputs @ np.kron(blocks1[j], blocks2[l]).T for (j, l) in candidate_pairs]
    )
    t_out = inputs @ target.T
    targets = np.einsum("sa,sb->sab", t_out, t_out.conj())

    w = np.zeros(len(candidate_pairs))
    for pair, weight in start.items():
        w[pair_index[pair]] = weight
    out = np.einsum("p,psa,psb->sab", w, y, y.conj())

    def value_of(out_states: np.ndarray) -> float:
        total = 0.0
        for s in range(s_count):
            total += qmath.trace_norm(targets[s] - out_states[s])
        return total / s_count

    value = value_of(out)
    for _ in range(iterations):
        signs = np.empty_like(targets)
        for s in range(s_count):
            lam, vec = np.linalg.eigh(hermitize(targets[s] - out[s]))
            signs[s] = (vec * np.sign(lam)) @ vec.conj().T
        grad = -np.mean(np.einsum("psa,sab,psb->ps", y.conj(), signs, y).real, axis=1)
        best = int(np.argmin(grad))
        vertex = np.einsum("sa,sb->sab", y[best], y[best].conj())
        improved = False
        for gamma in (1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.008):
            trial_out = (1.0 - gamma) * out + gamma * vertex
            trial_value = value_of(trial_out)
            if trial_value < value - 1e-12:
                w *= 1.0 - gamma
                w[best] += gamma
                out, value = trial_out, trial_value
                improved = True
                break
        if not improved:
            break
    weights = {
        candidate_pairs[i]: float(w[i]) for i in np.nonzero(w > 1e-10)[0]
    }
    if not weights:
        weights = dict(start)
    return weights, value


def _witness_control_path(g1, g2, target, cfg: WitnessConfig):
    blocks1, blocks2 = g1.blocks, g2.blocks
    n1, n2 = len(blocks1), len(blocks2)
    d = g1.d_data * g2.d_data
    rng = np.random.default_rng(cfg.seed)
    inputs = np.empty((cfg.n_inputs, d), dtype=complex)
    for s in range(cfg.n_inputs):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        inputs[s] = z / np.linalg.norm(z)

    # Candidate pair selection: everything when small, otherwise per-factor
    # shortlists around the target's operator-Schmidt factors plus a sample.
    if n1 * n2 <= cfg.pair_budget:
        pairs = [(j, l) for j in range(n1) for l in range(n2)]
        method = "pair-enumeration"
    else:
        s, lefts, rights = operator_schmidt(target, g1.d_data, g2.d_data)
        shortlist1: set[int] = set()
        shortlist2: set[int] = set()
        for comp in range(min(3, s.size)):
            if s[comp] < 1e-9:
                break
            lu, lsv, lvh = np.linalg.svd(lefts[comp])
            ru, rsv, rvh = np.linalg.svd(rights[comp])
            anchor1 = lu @ lvh
            anchor2 = ru @ rvh
            d1 = [unitary_map_distance(anchor1, b) for b in blocks1]
            d2 = [unitary_map_distance(anchor2, b) for b in blocks2]
            shortlist1.update(int(i) for i in np.argsort(d1)[: cfg.per_factor_top])
            shortlist2.update(int(i) for i in np.argsort(d2)[: cfg.per_factor_top])
        extra = max(0, cfg.pair_budget - len(shortlist1) * len(shortlist2))
        pairs = [(j, l) for j in shortlist1 for l in shortlist2]
        if extra:
            js = rng.integers(0, n1, size=extra)
            ls = rng.integers(0, n2, size=extra)
            pairs.extend({(int(j), int(l)) for j, l in zip(js, ls)} - set(pairs))
        method = "pair-shortlist"

    pair_arr = np.array(pairs)
    errors = _avg_pure_pair_errors(pair_arr, blocks1, blocks2, target, inputs)
    best_idx = int(np.argmin(errors))
    best_weights = {tuple(int(x) for x in pair_arr[best_idx]): 1.0}
    best_value = float(errors[best_idx])

    # Product-target candidate: compose per-factor mixture programs.
    s, lefts, rights = operator_schmidt(target, g1.d_data, g2.d_data)
    if s.size == 1 or (s.size > 1 and s[1] <= 1e-9 * s[0]):
        scale1 = np.linalg.norm(lefts[0]) / math.sqrt(g1.d_data)
        scale2 = np.linalg.norm(rights[0]) / math.sqrt(g2.d_data)
        u1 = lefts[0] / scale1
        u2 = rights[0] / scale2
        p1, _ = program_for_target(g1, u1, seed=cfg.seed + 11)
        p2, _ = program_for_target(g2, u2, seed=cfg.seed + 12)
        w1 = np.abs(p1.amplitudes) ** 2
        w2 = np.abs(p2.amplitudes) ** 2
        prod_weights = {
            (int(j), int(l)): float(w1[j] * w2[l])
            for j in np.nonzero(w1 > 1e-10)[0]
            for l in np.nonzero(w2 > 1e-10)[0]
        }
        val = _mixture_avg_error(prod_weights, blocks1, blocks2, target, inputs)
        if val < best_value:
            best_value, best_weights = val, prod_weights

    # Convex polish over the candidate pairs.
    polish_pairs = pairs if len(pairs) <= cfg.pair_budget else pairs[: cfg.pair_budget]
    for pair in best_weights:
        if pair not in polish_pairs:
            polish_pairs.append(pair)
    weights, value = _frank_wolfe_polish(
        best_weights, polish_pairs, blocks1, blocks2, target, inputs, cfg.fw_iterations
    )
    if value > best_value:
        weights, value = best_weights, best_value

    kraus = [
        math.sqrt(w) * np.kron(blocks1[j], blocks2[l]) for (j, l), w in weights.items()
    ]
    sup = estimate_sup_error(kraus, target, cfg.sup_samples, cfg.seed + 1)
    program = None
    if g1.d_program * g2.d_program <= 2**21:
        amps = np.zeros(g1.d_program * g2.d_program, dtype=complex)
        for (j, l), w in weights.items():
            amps[j * g2.d_program + l] = math.sqrt(w)
        amps /= np.linalg.norm(amps)
        program = PureState((g1.d_program, g2.d_program), amps)
    return WitnessReport(
        best_error=float(value),
        best_program=program,
        program_weights=sorted(((pair, float(w)) for pair, w in weights.items()),
                               key=lambda item: -item[1]),
        sup_estimate=sup,
        n_inputs=cfg.n_inputs,
        seed=cfg.seed,
        method=f"control-blocks/{method}+frank-wolfe",
    )


def _witness_general_path(g1, g2, target, cfg: WitnessConfig):
    from . import optimize as opt

    dp = g1.d_program * g2.d_program
    if dp > cfg.general_dim_guard:
        raise SizeGuardError(
            f"general program search over dimension {dp} exceeds {cfg.general_dim_guard}"
        )
    gate = tensor_gates(g1, g2)
    d = gate.d_data
    rng = np.random.default_rng(cfg.seed)
    inputs = np.empty((cfg.n_inputs, d), dtype=complex)
    for s in range(cfg.n_inputs):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        inputs[s] = z / np.linalg.norm(z)
    g4 = gate.matrix.reshape(d, dp, d, dp)

    def channel_of(psi_vec: np.ndarray):
        return np.einsum("akbq,q->kab", g4, psi_vec)

    def fun(v: np.ndarray) -> float:
        psi = v[:, 0]
        kraus = channel_of(psi)
        total = 0.0
        for z in inputs:
            zz = np.outer(z, z.conj())
            out = np.einsum("kab,bc,kdc->ad", kraus, zz, kraus.conj())
            total += qmath.trace_norm(target @ zz @ target.conj().T - out)
        return total / len(inputs)

    def grad(v: np.ndarray) -> np.ndarray:
        psi = v[:, 0]
        kraus = channel_of(psi)
        acc = np.zeros(dp, dtype=complex)
        for z in inputs:
            zz = np.outer(z, z.conj())
            out = np.einsum("kab,bc,kdc->ad", kraus, zz, kraus.conj())
            delta = target @ zz @ target.conj().T - out
            lam, vec = np.linalg.eigh(hermitize(delta))
            sign = (vec * np.sign(lam)) @ vec.conj().T
            t_k = np.einsum("bc,kdc,de->kbe", zz, kraus.conj(), sign)
            acc += -np.einsum("kba,akbq->q", t_k, g4)
        return (2.0 * acc / len(inputs)).reshape(dp, 1)

    report = opt.stiefel_minimize(
        fun,
        grad,
        dp,
        1,
        opt.OptConfig(restarts=cfg.general_restarts, seed=cfg.seed, max_iterations=200),
    )
    psi = report.point()[:, 0]
    psi /= np.linalg.norm(psi)
    kraus = list(channel_of(psi))
    sup = estimate_sup_error(kraus, target, cfg.sup_samples, cfg.seed + 1)
    return WitnessReport(
        best_error=float(report.value),
        best_program=PureState((g1.d_program, g2.d_program), psi),
        program_weights=None,
        sup_estimate=sup,
        n_inputs=cfg.n_inputs,
        seed=cfg.seed,
        method="general-sphere-descent",
    )


def scalability_witness(
    g1: ProgrammableGate,
    g2: ProgrammableGate,
    target: np.ndarray,
    cfg: WitnessConfig | None = None,
) -> WitnessReport:
    """Best joint program (entangled ones included) for a target on G1 (x) G2.

    Minimizes the average-over-inputs trace distance between the induced map
    of the tensored gate and the target conjugation; the worst-case estimate
    of the winning program is reported alongside.  Product targets compose
    per-factor programs; entangling targets stay bounded away from zero no
    matter the program, which is the no-go this witnesses.
    """
    cfg = cfg or WitnessConfig()
    target = np.asarray(target, dtype=complex)
    d = g1.d_data * g2.d_data
    if target.shape != (d, d):
        raise DimensionMismatchError(f"target of shape {target.shape}, expected side {d}")
    if g1.blocks is not None and g2.blocks is not None:
        return _witness_control_path(g1, g2, target, cfg)
    return _witness_general_path(g1, g2, target, cfg)


# ---------------------------------------------------------------------------
# Emulating encoding operations through a programmable gate
# ---------------------------------------------------------------------------


def dilation_unitary(channel: QuantumChannel) -> tuple[np.ndarray, int]:
    """Unitary on input (x) ancilla realizing the channel with ancilla in |0>.

    Returns (U, d_env) where U acts on C^{d_in * d_env}, the input-side
    ancilla holds d_env levels prepared in |0>, and discarding the output-side
    environment (the second factor of the output split d_out x d_env)
    reproduces the channel.  Requires d_out == d_in so the register sizes
    match on both sides.
    """
    if channel.d_in != channel.d_out:
        raise DimensionMismatchError("square channels only (d_out must equal d_in)")
    iso = ch.dilate(channel)
    d, e = channel.d_in, iso.d_env
    side = d * e
    u = np.zeros((side, side), dtype=complex)
    # Columns with the ancilla in |0> are fixed by the isometry; the rest is
    # an arbitrary orthonormal completion.
    for x in range(d):
        u[:, x * e] = iso.v[:, x]
    fixed = u[:, [x * e for x in range(d)]]
    q, _ = np.linalg.qr(np.concatenate([fixed, np.eye(side, dtype=complex)], axis=1))
    rest_cols = [c for c in range(side) if c % e != 0]
    u[:, rest_cols] = q[:, d : d + len(rest_cols)]
    _check_unitary(u, side)
    return u, e


def emulate_encoding(
    channel: QuantumChannel,
    gate: ProgrammableGate,
    epsilon: float,
    n_samples: int = 200,
    seed=0,
) -> EmulationReport:
    """Emulate an encoding channel by programming its dilation unitary.

    Picks the gate program whose induced map is nearest the dilation of the
    channel, then sweeps random inputs through "prepare ancilla in |0>, run
    the induced map, discard the environment" and reports the worst trace
    distance to the true channel output.  Monotonicity of the trace norm
    under partial traces keeps this below the program's certified error.
    """
    target, d_env = dilation_unitary(channel)
    if gate.d_data != channel.d_in * d_env:
        raise DimensionMismatchError(
            f"gate data register {gate.d_data} incompatible with dilation side "
            f"{channel.d_in * d_env}"
        )
    if gate.blocks is None:
        raise SizeGuardError("emulation requires a controlled-block gate")
    program, prog_err = program_for_target(
        gate, target, n_nearest=min(gate.d_program, 32), seed=seed
    )
    induced = induced_map(gate, program)

    rng = np.random.default_rng(seed)
    d_in = channel.d_in
    e0 = np.zeros(d_env, dtype=complex)
    e0[0] = 1.0
    worst = 0.0
    for _ in range(n_samples):
        z = rng.standard_normal(d_in) + 1j * rng.standard_normal(d_in)
        z /= np.linalg.norm(z)
        sigma = qmath.DensityMatrix((d_in,), np.outer(z, z.conj()))
        truth = ch.apply(channel, sigma)
        lifted = np.kron(z, e0)
        big = qmath.DensityMatrix((d_in, d_env), np.outer(lifted, lifted.conj()))
        routed = ch.apply(induced, qmath.DensityMatrix((big.side,), big.entries))
        routed = qmath.DensityMatrix((d_in, d_env), routed.entries)
        emulated = qmath.partial_trace(routed, {0})
        worst = max(worst, qmath.trace_distance(truth, emulated))
    return EmulationReport(
        program=program,
        measured_error=float(worst),
        n_samples=n_samples,
        seed=seed if isinstance(seed, int) else -1,
        program_error=prog_err,
    )
