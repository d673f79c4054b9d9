"""Small-dimension density-matrix toolbox.

Validates the operator-algebra ingredients of the security argument:
sub-normalized states and their metrics, measurement overlap constants,
the purification/measurement construction that maps prepared-state
families onto virtual measurements, event smoothing, and classical
guessing probability.  Dimensions are capped at 16; this code exists to
check constructions, not to simulate many-body systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 16
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12
COMPLETENESS_TOL = 1e-10
BLINDNESS_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2)


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix")
    return arr


def matrix_to_json(m) -> list:
    """Row-major nested lists of [re, im] pairs."""
    arr = _as_matrix(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in arr]


def matrix_from_json(blob) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in blob])


def _sqrtm_psd(h: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via eigh."""
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _pinv_psd(h: np.ndarray, power: float = -1.0,
              cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Generalized inverse (or inverse power) on the support of h."""
    w, v = np.linalg.eigh(h)
    inv = np.where(w > cutoff, np.abs(w) ** power, 0.0)
    return (v * inv) @ v.conj().T


class DensityMatrix:
    """Positive semi-definite operator with trace in (0, 1].

    Sub-normalized states are allowed; they carry events alongside the
    quantum state.
    """

    def __init__(self, entries):
        entries = _as_matrix(entries)
        d = entries.shape[0]
        if d > MAX_DIM:
            raise ValueError(f"dimension {d} exceeds cap {MAX_DIM}")
        if np.max(np.abs(entries - entries.conj().T)) > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        eigs = np.linalg.eigvalsh(entries)
        if eigs.min() < -PSD_TOL:
            raise ValueError(f"matrix has negative eigenvalue {eigs.min()}")
        tr = float(np.real(np.trace(entries)))
        if not 0.0 < tr <= 1.0 + TRACE_TOL:
            raise ValueError(f"trace {tr} outside (0, 1]")
        self.entries = entries
        self.trace = tr

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, ket, weight: float = 1.0) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(weight * np.outer(ket, ket.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    def to_json(self) -> list:
        return matrix_to_json(self.entries)

    @classmethod
    def from_json(cls, blob) -> "DensityMatrix":
        return cls(matrix_from_json(blob))


@dataclass
class MeasurementSet:
    """Generalized measurement: operators with sum M^dag M = identity."""

    operators: list

    def __post_init__(self):
        self.operators = [_as_matrix(op) for op in self.operators]
        if not self.operators:
            raise ValueError("measurement needs at least one operator")
        d = self.operators[0].shape[0]
        total = sum(op.conj().T @ op for op in self.operators)
        if np.max(np.abs(total - np.eye(d))) > COMPLETENESS_TOL:
            raise ValueError("operators do not satisfy completeness")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def projective(cls, kets) -> "MeasurementSet":
        kets = [np.asarray(k, dtype=complex) for k in kets]
        return cls([np.outer(k, k.conj()) for k in kets])

    @classmethod
    def computational(cls) -> "MeasurementSet":
        return cls.projective([KET0, KET1])

    @classmethod
    def hadamard(cls) -> "MeasurementSet":
        return cls.projective([KET_PLUS, KET_MINUS])

    @classmethod
    def rotated(cls, theta: float) -> "MeasurementSet":
        a = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
        b = np.array([-math.sin(theta), math.cos(theta)], dtype=complex)
        return cls.projective([a, b])


@dataclass
class PreparedStateFamily:
    """States rho^(phi, x) with per-setting probabilities p_x^phi.

    The family must be basis-blind: the averaged state emitted for each
    setting phi is identical, which is what lets preparation be recast
    as a measurement on half of an entangled state.
    """

    states: dict = field(default_factory=dict)      # (phi, x) -> DensityMatrix
    probabilities: dict = field(default_factory=dict)  # (phi, x) -> float

    def __post_init__(self):
        if set(self.states) != set(self.probabilities):
            raise ValueError("states and probabilities must share keys")
        for phi in self.settings:
            total = sum(p for (f, _), p in self.probabilities.items() if f == phi)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"probabilities for setting {phi} sum to {total}")
        avgs = [self.average_state(phi) for phi in self.settings]
        for other in avgs[1:]:
            if np.max(np.abs(other - avgs[0])) > BLINDNESS_TOL:
                raise ValueError("family leaks the basis choice")

    @property
    def settings(self) -> list:
        return sorted({phi for phi, _ in self.states})

    def outcomes(self, phi) -> list:
        return sorted(x for f, x in self.states if f == phi)

    def weighted_state(self, phi, x) -> np.ndarray:
        return self.probabilities[(phi, x)] * self.states[(phi, x)].entries

    def average_state(self, phi) -> np.ndarray:
        out = None
        for (f, x) in self.states:
            if f == phi:
                term = self.weighted_state(phi, x)
                out = term if out is None else out + term
        return out

    @classmethod
    def ideal_bb84(cls) -> "PreparedStateFamily":
        kets = {(0, 0): KET0, (0, 1): KET1, (1, 0): KET_PLUS, (1, 1): KET_MINUS}
        return cls(states={k: DensityMatrix.pure(v) for k, v in kets.items()},
                   probabilities={k: 0.5 for k in kets})

    @classmethod
    def depolarized_bb84(cls, mix: float) -> "PreparedStateFamily":
        """BB84 states mixed with `mix` parts of identity/2 each."""
        base = cls.ideal_bb84()
        states = {
            k: DensityMatrix((1 - mix) * v.entries + mix * np.eye(2) / 2)
            for k, v in base.states.items()
        }
        return cls(states=states, probabilities=dict(base.probabilities))


@dataclass
class ClassicalJoint:
    """Joint pmf over (x, d) pairs; total mass at most one."""

    pmf: dict  # (x, d) -> weight

    def __post_init__(self):
        if any(w < 0 for w in self.pmf.values()):
            raise ValueError("negative probability mass")
        if sum(self.pmf.values()) > 1.0 + TRACE_TOL:
            raise ValueError("total mass exceeds 1")


def operator_norm(m) -> float:
    """Largest singular value."""
    arr = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.norm(arr, 2))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the Schatten 1-norm of the difference."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    eigs = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return 0.5 * float(np.sum(np.abs(eigs)))


def generalized_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Fidelity extended to sub-normalized states.

    (tr sqrt(sqrt(rho) sigma sqrt(rho)) + sqrt(1 - tr rho) sqrt(1 - tr sigma))^2
    """
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    s = _sqrtm_psd(rho.entries)
    inner = s @ sigma.entries @ s
    inner = (inner + inner.conj().T) / 2
    root_sum = float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(inner), 0.0, None))))
    slack = math.sqrt(max(1.0 - rho.trace, 0.0)) * math.sqrt(max(1.0 - sigma.trace, 0.0))
    return min((root_sum + slack) ** 2, 1.0)


def purified_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """sqrt(1 - F); the smoothing metric."""
    return math.sqrt(max(0.0, 1.0 - generalized_fidelity(rho, sigma)))


def overlap_c(m0: MeasurementSet, m1: MeasurementSet) -> float:
    """Measurement overlap: max over outcome pairs of |M0^x (M1^y)^dag|_inf^2."""
    if m0.dim != m1.dim:
        raise ValueError("dimension mismatch")
    return max(operator_norm(a @ b.conj().T) ** 2
               for a in m0.operators for b in m1.operators)


def cbar_bound(c_values, n: int) -> float:
    """Max over size-n subsets of the geometric mean of overlaps.

    Because all values are non-negative, the optimum is the geometric
    mean of the n largest entries.
    """
    vals = sorted((float(c) for c in c_values), reverse=True)
    if not 1 <= n <= len(vals):
        raise ValueError(f"subset size {n} out of range 1..{len(vals)}")
    if any(not 0.0 <= v <= 1.0 for v in vals):
        raise ValueError("overlap values must lie in [0, 1]")
    return math.prod(vals[:n]) ** (1.0 / n)


def overlap_cprime(family: PreparedStateFamily) -> float:
    """Preparation overlap of a two-setting basis-blind family.

    max over outcome pairs of
    | sqrt(p_x^0 rho^(0,x)) X^-1 sqrt(p_y^1 rho^(1,y)) |_inf^2
    with X the common averaged state and the inverse taken on its
    support.  Probability weights are absorbed into the states so that
    the virtual-measurement equality holds verbatim.
    """
    settings = family.settings
    if len(settings) != 2:
        raise ValueError("preparation overlap needs exactly two settings")
    phi0, phi1 = settings
    x_avg = family.average_state(phi0)
    x_inv = _pinv_psd(x_avg)
    best = 0.0
    for x in family.outcomes(phi0):
        a = _sqrtm_psd(family.weighted_state(phi0, x))
        for y in family.outcomes(phi1):
            b = _sqrtm_psd(family.weighted_state(phi1, y))
            best = max(best, operator_norm(a @ x_inv @ b) ** 2)
    return best


def virtual_measurement(family: PreparedStateFamily):
    """Recast state preparation as measurement of an entangled state.

    Returns (tau, measurements) where tau is the purification of the
    averaged prepared state on A tensor A' and measurements maps each
    setting phi to a MeasurementSet on A' with

        M^(phi,x) = sqrt(p_x^phi) ((rho^(phi,x))^(1/2))^T (tau_A^(-1/2))^T,

    transposes taken in the eigenbasis of the averaged state (the
    Schmidt basis of the purification).  The partial trace of tau
    against M^dag M reconstructs p_x^phi rho^(phi,x), and the overlap
    of the returned measurements equals the preparation overlap.

    A' is truncated to the support of the averaged state; the returned
    measurement operators are expressed in that Schmidt basis.
    """
    tau_a = family.average_state(family.settings[0])
    w, v = np.linalg.eigh(tau_a)
    keep = w > SUPPORT_CUTOFF
    lam = w[keep]
    basis = v[:, keep]                      # columns: support eigenvectors
    ds = int(lam.size)
    d = tau_a.shape[0]

    # purification |tau> = sum_i sqrt(lam_i) |u_i>_A |i>_A'
    psi = np.zeros(d * ds, dtype=complex)
    for i in range(ds):
        psi += math.sqrt(lam[i]) * np.kron(basis[:, i], np.eye(ds)[i])
    tau = DensityMatrix(np.outer(psi, psi.conj()))

    inv_sqrt = np.diag(lam ** -0.5).astype(complex)
    measurements = {}
    for phi in family.settings:
        ops = []
        for x in family.outcomes(phi):
            weighted = family.weighted_state(phi, x)
            in_basis = basis.conj().T @ weighted @ basis
            root = _sqrtm_psd(in_basis)
            ops.append((root.T @ inv_sqrt.T))
        measurements[phi] = MeasurementSet(ops)
    return tau, measurements


def reconstruct_from_virtual(family: PreparedStateFamily, tau: DensityMatrix,
                             measurements: dict) -> dict:
    """Partial-trace check of the virtual construction.

    Returns (phi, x) -> tr_A'[tau (id tensor M^dag M)], expressed in the
    original basis of A, for comparison against p_x^phi rho^(phi,x).
    """
    tau_a = family.average_state(family.settings[0])
    w, v = np.linalg.eigh(tau_a)
    keep = w > SUPPORT_CUTOFF
    lam, basis = w[keep], v[:, keep]
    psi_mat = basis @ np.diag(np.sqrt(lam)).astype(complex)  # Psi[a, i]
    out = {}
    for phi, mset in measurements.items():
        for x, op in zip(family.outcomes(phi), mset.operators):
            n_op = op.conj().T @ op
            out[(phi, x)] = psi_mat @ n_op.T @ psi_mat.conj().T
    return out


def smooth_away_event(weights, event, omega_mass: float | None = None):
    """Remove an event's mass from a block-diagonal state.

    weights: non-negative block weights (classical probabilities or the
    diagonal blocks' traces); event: boolean mask marking the event.
    The smoothed state keeps only the non-event blocks, rescaled by
    1/(1 - eps) (the fidelity-optimal rescaling), which achieves
    purified distance exactly sqrt(eps) from the input.

    Returns (smoothed_weights, achieved_distance); the distance is
    computed from the generalized fidelity, not assumed.
    """
    weights = np.asarray(weights, dtype=float)
    event = np.asarray(event, dtype=bool)
    if weights.shape != event.shape:
        raise ValueError("weights and event mask must align")
    if np.any(weights < 0):
        raise ValueError("negative weights")
    total = float(weights.sum())
    if not 0.0 < total <= 1.0 + TRACE_TOL:
        raise ValueError(f"total mass {total} outside (0, 1]")
    eps = float(weights[event].sum())
    if omega_mass is not None and abs(eps - omega_mass) > 1e-12:
        raise ValueError(f"event mass is {eps}, caller expected {omega_mass}")
    if eps >= total:
        raise ValueError("cannot remove the entire state")

    smoothed = np.where(event, 0.0, weights) / (1.0 - eps)
    # generalized fidelity between commuting (block-diagonal) states
    root_sum = float(np.sum(np.sqrt(weights * smoothed)))
    slack = math.sqrt(max(1.0 - total, 0.0)) * math.sqrt(max(1.0 - smoothed.sum(), 0.0))
    fidelity = min((root_sum + slack) ** 2, 1.0)
    return smoothed, math.sqrt(max(0.0, 1.0 - fidelity))


def guessing_prob_classical(joint: ClassicalJoint) -> tuple[float, float]:
    """Optimal guessing probability of x from d, and its min-entropy.

    For classical side information the optimal strategy guesses the
    most likely x per observed d: p_guess = sum_d max_x P(x, d).
    """
    if not joint.pmf:
        raise ValueError("empty joint distribution")
    best_per_d: dict = {}
    for (x, dd), w in joint.pmf.items():
        best_per_d[dd] = max(best_per_d.get(dd, 0.0), w)
    p_guess = sum(best_per_d.values())
    return p_guess, -math.log2(p_guess)
