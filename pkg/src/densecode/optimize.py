"""Minimization of output-entropy objectives over quantum channels.

Channels T from the acted register into C^{d_out} are parameterized by
Stinespring isometries V on the complex Stiefel manifold, and minimized by
multi-restart Riemannian gradient descent (tangent projection, Armijo
backtracking, QR retraction).  Global optimality is never certified -- the
reported value is the entropy of a feasible channel, hence always an upper
bound on the true minimum, and every caller-supplied probe channel is seeded
as a restart so the result can only improve on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import channels as ch
from . import qmath
from .channels import QuantumChannel, StinespringIsometry
from .errors import DimensionMismatchError
from .qmath import DensityMatrix, LOG2E, hermitize

# Eigenvalues are clamped at this floor inside logarithms so that entropy
# gradients stay finite at rank-deficient outputs.
LOG_CLAMP = 1e-18
FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class OptConfig:
    """Knobs for the Stiefel descent and the ensemble optimizer."""

    restarts: int = 20
    max_iterations: int = 500
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    d_env: int | None = None
    seed: int = 0
    init_step: float = 1.0
    min_step: float = 1e-14
    stop_at_floor: bool = True
    ensemble_sweeps: int = 40
    ensemble_inner_steps: int = 4
    blahut_steps: int = 8

    def __post_init__(self):
        if self.restarts < 0 or self.max_iterations <= 0:
            raise ValueError("restarts must be >= 0 and max_iterations positive")
        if self.d_env is not None and self.d_env < 1:
            raise ValueError("d_env must be >= 1")


@dataclass
class OptReport:
    """Outcome of a multi-restart minimization."""

    value: float
    isometry: StinespringIsometry | np.ndarray
    restart_values: list[float]
    converged: bool
    iterations: int
    best_restart: int
    skipped_restarts: int = 0
    floor: float | None = None

    def point(self) -> np.ndarray:
        if isinstance(self.isometry, StinespringIsometry):
            return self.isometry.v
        return self.isometry


def qr_retract(matrix: np.ndarray) -> np.ndarray:
    """QR-based retraction onto the Stiefel manifold (R-diagonal made positive)."""
    q, r = np.linalg.qr(matrix)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) < 1e-300] = 1.0
    return q * (diag / np.abs(diag))


def tangent_project(v: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space at an isometry."""
    a = v.conj().T @ grad
    return grad - v @ (0.5 * (a + a.conj().T))


def stiefel_minimize(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    d_rows: int,
    d_cols: int,
    cfg: OptConfig | None = None,
    initial_points: Sequence[np.ndarray] = (),
    floor: float | None = None,
) -> OptReport:
    """Multi-restart Riemannian descent of a smooth objective on isometries.

    ``initial_points`` are deterministic warm starts (probes) run before the
    ``cfg.restarts`` Haar-random restarts.  When ``floor`` is given and
    ``cfg.stop_at_floor`` is set, remaining restarts are skipped as soon as a
    restart reaches the floor (an analytic lower bound supplied by the
    caller); skipped restarts are counted in the report.
    """
    cfg = cfg or OptConfig()
    rng = np.random.default_rng(cfg.seed)
    starts: list[np.ndarray] = [np.asarray(p, dtype=complex) for p in initial_points]
    starts += [ch.random_isometry(d_rows, d_cols, rng) for _ in range(cfg.restarts)]
    if not starts:
        raise ValueError("need at least one restart or initial point")

    values: list[float] = []
    points: list[np.ndarray] = []
    converged_flags: list[bool] = []
    total_iterations = 0
    skipped = 0

    for idx, start in enumerate(starts):
        if (
            floor is not None
            and cfg.stop_at_floor
            and values
            and min(values) <= floor + FLOOR_SLACK
        ):
            skipped = len(starts) - idx
            break
        v = qr_retract(start)
        f = fun(v)
        step = cfg.init_step
        previous = None
        restart_converged = False
        for _ in range(cfg.max_iterations):
            total_iterations += 1
            g = tangent_project(v, grad(v))
            gn = float(np.linalg.norm(g))
            if gn <= cfg.grad_tol:
                restart_converged = True
                break
            if previous is not None:
                # Barzilai-Borwein initialization; exact on quadratic bowls.
                s = v - previous[0]
                y = g - previous[1]
                yy = float(np.real(np.vdot(y, y)))
                sy = abs(float(np.real(np.vdot(s, y))))
                if yy > 1e-300 and sy > 1e-300:
                    step = min(max(sy / yy, 1e-12), 1e6)
            t = step
            accepted = False
            while t >= cfg.min_step:
                cand = qr_retract(v - t * g)
                fc = fun(cand)
                if fc <= f - cfg.armijo * t * gn * gn:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            previous = (v, g)
            v, f = cand, fc
            step = 2.0 * t
            if floor is not None and f <= floor + FLOOR_SLACK:
                restart_converged = True
                break
        values.append(f)
        points.append(v)
        converged_flags.append(restart_converged)

    best = int(np.argmin(values))
    return OptReport(
        value=float(values[best]),
        isometry=points[best],
        restart_values=[float(x) for x in values],
        converged=bool(converged_flags[best]),
        iterations=total_iterations,
        best_restart=best,
        skipped_restarts=skipped,
        floor=floor,
    )


class _OutputEntropyProblem:
    """H((phi o T (x) id) rho) as a function of the Stinespring isometry of T.

    The acted factor of rho is moved to the front and the others merged, so
    the working state lives on [d_in, d_rest].  rho is eigen-factored once;
    the channel output never materializes the lifted isometry.
    """

    def __init__(
        self,
        rho: DensityMatrix,
        factor: int,
        d_out: int,
        d_env: int,
        post_channel: QuantumChannel | None = None,
    ):
        if factor < 0 or factor >= rho.n_factors:
            raise DimensionMismatchError(f"factor {factor} out of range for dims {rho.dims}")
        if post_channel is not None and post_channel.d_in != d_out:
            raise DimensionMismatchError(
                f"post channel input {post_channel.d_in} vs encoding output {d_out}"
            )
        rest = [i for i in range(rho.n_factors) if i != factor]
        if rest:
            work = qmath.merge_factors(rho, [[factor], rest])
        else:
            work = DensityMatrix((rho.dims[factor], 1), rho.entries)
        self.d_in = work.dims[0]
        self.d_rest = work.dims[1]
        self.d_out = d_out
        self.d_env = d_env
        self.post = post_channel
        lam, vec = np.linalg.eigh(hermitize(work.entries))
        keep = lam > 1e-14
        lam, vec = lam[keep], vec[:, keep]
        self.rank = int(lam.size)
        # F[a, s, r]: eigenvector r scaled by sqrt(lam), split into (acted, rest).
        self.factored = (vec * np.sqrt(lam)).reshape(self.d_in, self.d_rest, self.rank)
        self.marginal_entropy = qmath.entropy_of_spectrum(
            np.linalg.eigvalsh(hermitize(qmath.partial_trace(work, {1}).entries))
        )

    # -- forward pass ------------------------------------------------------

    def output_tensor(self, v: np.ndarray) -> np.ndarray:
        """Y[o, e, s, r] for the lifted isometry applied to the factored state."""
        y = np.einsum("pa,asr->psr", v, self.factored)
        return y.reshape(self.d_out, self.d_env, self.d_rest, self.rank)

    def pre_channel_state(self, y: np.ndarray) -> np.ndarray:
        """X = Tr_env (V (x) I) rho (V (x) I)^dag on [d_out, d_rest]."""
        x = np.einsum("oesr,petr->ospt", y, y.conj())
        side = self.d_out * self.d_rest
        return hermitize(x.reshape(side, side))

    def signal_state(self, v: np.ndarray) -> np.ndarray:
        x = self.pre_channel_state(self.output_tensor(v))
        if self.post is None:
            return x
        return self._apply_post(x)

    def _apply_post(self, x: np.ndarray) -> np.ndarray:
        eye = np.eye(self.d_rest, dtype=complex)
        out_side = self.post.d_out * self.d_rest
        s = np.zeros((out_side, out_side), dtype=complex)
        for k in self.post.kraus:
            lifted = np.kron(k, eye)
            s += lifted @ x @ lifted.conj().T
        return hermitize(s)

    def _adjoint_post(self, l_out: np.ndarray) -> np.ndarray:
        eye = np.eye(self.d_rest, dtype=complex)
        in_side = self.d_out * self.d_rest
        l_in = np.zeros((in_side, in_side), dtype=complex)
        for k in self.post.kraus:
            lifted = np.kron(k, eye)
            l_in += lifted.conj().T @ l_out @ lifted
        return l_in

    def value(self, v: np.ndarray) -> float:
        return qmath.entropy_of_spectrum(np.linalg.eigvalsh(self.signal_state(v)))

    # -- gradient ----------------------------------------------------------

    @staticmethod
    def _entropy_derivative(state: np.ndarray) -> np.ndarray:
        """dH(X)/dX = -(log2 X + log2 e), with eigenvalues clamped away from 0."""
        lam, vec = np.linalg.eigh(hermitize(state))
        lam = np.clip(lam, LOG_CLAMP, None)
        return -(vec * (np.log2(lam) + LOG2E)) @ vec.conj().T

    def gradient_for_weight(self, v: np.ndarray, l_signal: np.ndarray) -> np.ndarray:
        """Euclidean gradient of Tr[l_signal * signal(V)] (for Hermitian l_signal)."""
        y = self.output_tensor(v)
        l_x = self._adjoint_post(l_signal) if self.post is not None else l_signal
        l4 = l_x.reshape(self.d_out, self.d_rest, self.d_out, self.d_rest)
        t1 = np.einsum("osqt,qetr->oesr", l4, y)
        t1 = t1.reshape(self.d_out * self.d_env, self.d_rest, self.rank)
        return 2.0 * np.einsum("psr,asr->pa", t1, self.factored.conj())

    def gradient(self, v: np.ndarray) -> np.ndarray:
        """Euclidean gradient of H(signal(V)); df = Re <grad, dV>."""
        l_signal = self._entropy_derivative(self.signal_state(v))
        return self.gradient_for_weight(v, l_signal)

    # -- probe embedding ----------------------------------------------------

    def isometry_from_channel(self, channel: QuantumChannel) -> np.ndarray | None:
        """Embed a probe channel's canonical isometry into the working d_env."""
        if (channel.d_in, channel.d_out) != (self.d_in, self.d_out):
            return None
        ops = ch.canonical_kraus(channel)
        if len(ops) > self.d_env:
            return None
        v = np.zeros((self.d_out * self.d_env, self.d_in), dtype=complex)
        for e, k in enumerate(ops):
            v[e::self.d_env, :] = k
        return v


def default_probes(d_in: int, d_out: int) -> list[QuantumChannel]:
    """Always-feasible encodings: forget everything, and embed when possible."""
    probes = [QuantumChannel.projection_onto(d_in, d_out)]
    if d_out >= d_in:
        probes.append(QuantumChannel.embedding(d_in, d_out))
    return probes


def min_local_output_entropy(
    rho: DensityMatrix,
    factor: int,
    d_out: int,
    cfg: OptConfig | None = None,
    probes: Sequence[QuantumChannel] = (),
    post_channel: QuantumChannel | None = None,
) -> OptReport:
    """Minimize H((phi o T (x) id) rho) over channels T out of one factor.

    The reported value is an upper bound on the true minimum (it is attained
    by the returned isometry) and never exceeds the value of any probe.  A
    ``post_channel`` phi, when given, is applied after the encoding.
    """
    cfg = cfg or OptConfig()
    d_in = rho.dims[factor]
    d_env = cfg.d_env or d_in * d_out
    problem = _OutputEntropyProblem(rho, factor, d_out, d_env, post_channel)

    starts = []
    for probe in list(default_probes(d_in, d_out)) + list(probes):
        v = problem.isometry_from_channel(probe)
        if v is not None:
            starts.append(v)

    d_acted_out = post_channel.d_out if post_channel is not None else d_out
    floor = max(0.0, problem.marginal_entropy - math.log2(d_acted_out))

    report = stiefel_minimize(
        problem.value,
        problem.gradient,
        d_out * d_env,
        d_in,
        cfg,
        initial_points=starts,
        floor=floor,
    )
    report.isometry = StinespringIsometry(d_in, d_out, d_env, qr_retract(report.point()))
    return report


def entropy_gradient(
    iso: StinespringIsometry, rho: DensityMatrix, factor: int
) -> np.ndarray:
    """Euclidean gradient of V -> H(Tr_env (V (x) I) rho (V (x) I)^dag).

    Returned with the convention df = Re <grad, dV>; it agrees with central
    finite differences and is orthogonal to the global-phase direction iV.
    """
    problem = _OutputEntropyProblem(rho, factor, iso.d_out, iso.d_env)
    return problem.gradient(iso.v)


def min_output_entropy_floor(rho: DensityMatrix, factor: int, d_out: int) -> float:
    """Analytic lower bound max(0, H(rho_rest) - log2 d_out)."""
    rest = [i for i in range(rho.n_factors) if i != factor]
    h_rest = qmath.von_neumann_entropy(qmath.partial_trace(rho, rest))
    return max(0.0, h_rest - math.log2(d_out))


# ---------------------------------------------------------------------------
# Ensemble optimization for generalized (noisy) dense coding
# ---------------------------------------------------------------------------


def holevo_of_signals(p: np.ndarray, signals: list[np.ndarray]) -> float:
    avg = sum(pi * s for pi, s in zip(p, signals))
    h_avg = qmath.entropy_of_spectrum(np.linalg.eigvalsh(hermitize(avg)))
    h_members = sum(
        pi * qmath.entropy_of_spectrum(np.linalg.eigvalsh(hermitize(s)))
        for pi, s in zip(p, signals)
    )
    return float(h_avg - h_members)


def _relative_entropy_raw(a: np.ndarray, b: np.ndarray) -> float:
    lam_a, vec_a = np.linalg.eigh(hermitize(a))
    lam_b, vec_b = np.linalg.eigh(hermitize(b))
    lam_a = np.clip(lam_a, 0.0, None)
    term_a = float(np.sum(lam_a[lam_a > qmath.EIG_CUTOFF] * np.log2(lam_a[lam_a > qmath.EIG_CUTOFF])))
    weights = np.einsum("ij,jk,ki->i", vec_b.conj().T, a, vec_b).real
    lam_b = np.clip(lam_b, LOG_CLAMP, None)
    term_b = float(np.sum(weights * np.log2(lam_b)))
    return term_a - term_b


@dataclass
class EnsembleResult:
    """Feasible encoding ensemble and the mutual information it certifies."""

    probabilities: np.ndarray
    encodings: list[QuantumChannel]
    value: float
    history: list[float] = field(default_factory=list)
    converged: bool = False


def optimize_ensemble(
    phi: QuantumChannel,
    rho: DensityMatrix,
    m: int,
    cfg: OptConfig | None = None,
    initial_encodings: Sequence[QuantumChannel] | None = None,
    factor: int = 0,
) -> EnsembleResult:
    """Alternating maximization of the encoding mutual information.

    Climbs I(mu) = H(avg signal) - sum p_i H(signal_i) over m encoding
    isometries and the probability simplex (Blahut-style reweighting).  The
    result is the mutual information of an explicit feasible ensemble, i.e. a
    certified lower bound on the generalized dense-coding capacity; the value
    never decreases over iterations.
    """
    if m < 1:
        raise ValueError("ensemble size m must be >= 1")
    cfg = cfg or OptConfig()
    d_in = rho.dims[factor]
    d_env = cfg.d_env or d_in * phi.d_in
    problem = _OutputEntropyProblem(rho, factor, phi.d_in, d_env, post_channel=phi)

    isometries: list[np.ndarray] = []
    if initial_encodings:
        for enc in initial_encodings:
            v = problem.isometry_from_channel(enc)
            if v is None:
                raise DimensionMismatchError(
                    "initial encoding incompatible with the working dimensions"
                )
            isometries.append(v)
    if len(isometries) < m:
        # Default seeding: a minimizing encoding followed by Weyl rotations of
        # the channel input, which twirls the average signal exactly.
        inner_cfg = replace(cfg, restarts=max(4, cfg.restarts // 2))
        base = min_local_output_entropy(rho, factor, phi.d_in, inner_cfg, post_channel=phi)
        v_star = base.isometry.v
        eye_env = np.eye(d_env, dtype=complex)
        for w in ch.weyl_basis(phi.d_in):
            if len(isometries) >= m:
                break
            lift = np.kron(w, eye_env)
            isometries.append(lift @ v_star)
        rng = np.random.default_rng(cfg.seed + 1)
        while len(isometries) < m:
            isometries.append(ch.random_isometry(phi.d_in * d_env, d_in, rng))
    isometries = isometries[:m]

    p = np.full(m, 1.0 / m)
    signals = [problem.signal_state(v) for v in isometries]
    value = holevo_of_signals(p, signals)
    history = [value]

    for _ in range(cfg.ensemble_sweeps):
        # Simplex step: exponentiated reweighting by D(signal_i || average).
        for _ in range(cfg.blahut_steps):
            avg = sum(pi * s for pi, s in zip(p, signals))
            dvals = np.array([_relative_entropy_raw(s, avg) for s in signals])
            new_p = p * np.power(2.0, dvals - dvals.max())
            total = new_p.sum()
            if total <= 0:
                break
            new_p /= total
            new_value = holevo_of_signals(new_p, signals)
            if new_value < value - 1e-12:
                break
            p, value = new_p, new_value

        # Encoding step: a few ascent moves per member.
        for i in range(m):
            if p[i] <= 1e-12:
                continue
            v = isometries[i]
            step = cfg.init_step
            for _ in range(cfg.ensemble_inner_steps):
                avg = sum(pi * s for pi, s in zip(p, signals))
                lam_i, vec_i = np.linalg.eigh(hermitize(signals[i]))
                lam_a, vec_a = np.linalg.eigh(hermitize(avg))
                log_i = (vec_i * np.log2(np.clip(lam_i, LOG_CLAMP, None))) @ vec_i.conj().T
                log_a = (vec_a * np.log2(np.clip(lam_a, LOG_CLAMP, None))) @ vec_a.conj().T
                l_signal = float(p[i]) * (log_i - log_a)
                g = tangent_project(v, problem.gradient_for_weight(v, l_signal))
                gn = float(np.linalg.norm(g))
                if gn <= cfg.grad_tol:
                    break
                t = step
                improved = False
                while t >= cfg.min_step:
                    cand = qr_retract(v + t * g)
                    cand_signal = problem.signal_state(cand)
                    trial = list(signals)
                    trial[i] = cand_signal
                    cand_value = holevo_of_signals(p, trial)
                    if cand_value >= value + cfg.armijo * t * gn * gn:
                        improved = True
                        break
                    t *= 0.5
                if not improved:
                    break
                v = cand
                signals[i] = cand_signal
                value = cand_value
                step = 2.0 * t
            isometries[i] = v

        history.append(value)
        if len(history) >= 3 and history[-1] - history[-3] < 1e-9:
            break

    encodings = [ch.undilate(StinespringIsometry(d_in, phi.d_in, d_env, v)) for v in isometries]
    converged = len(history) >= 3 and history[-1] - history[-3] < 1e-9
    return EnsembleResult(p, encodings, float(value), history, converged)
