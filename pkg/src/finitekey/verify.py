"""Bound-versus-empirical verification suites.

Each suite pits a proven bound or exact identity against brute force:
hash-verified correctness against the 2^-t failure bound, Toeplitz
universality against full seed enumeration, the sampling tail bound
against exhaustive subset enumeration, overlap constants against their
closed forms, and the prepare-and-measure reduction against exact
distribution equality.  The command-line front end exposes them and the
acceptance tests assert on their reports.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from . import protocol
from .codes import generate_code, synd
from .numerics import serfling_tail
from .quantum import (MeasurementSet, PreparedStateFamily, cbar_bound,
                      overlap_c, overlap_cprime, reconstruct_from_virtual,
                      virtual_measurement)
from .streams import stream
from .toeplitz import ToeplitzSeed, collision_probability_exhaustive
from .bitops import int_to_bits


# ---------------------------------------------------------------------------
# correctness: undetected error-correction failures vs 2^-t
# ---------------------------------------------------------------------------

def _failing_pair(code, rng):
    """An (x, y) pair whose decode provably lands off Alice's string."""
    from .codes import corr
    for _ in range(500):
        x = rng.integers(0, 2, code.n, dtype=np.uint8)
        weight = code.decode_radius + 1
        support = rng.choice(code.n, size=weight, replace=False)
        e = np.zeros(code.n, dtype=np.uint8)
        e[support] = 1
        y = x ^ e
        if not np.array_equal(corr(code, y, synd(code, x)), x):
            return x, y
    raise RuntimeError("could not engineer a decoding failure")


def suite_correctness(t: int = 8, trials: int = 100_000,
                      master_seed: int = 0) -> dict:
    """Theorem-level correctness at desk scale.

    Runs the error-correction step on a fixed pair with x_hat != x under
    `trials` independent verification-hash seeds; the frequency of an
    undetected pass must stay below 2^-t plus three binomial sigmas.
    """
    rng = stream(master_seed, "correctness-setup")
    code = generate_code(12, 6, rng)
    x, y = _failing_pair(code, rng)

    undetected = 0
    for i in range(trials):
        h_ec = ToeplitzSeed(
            stream(master_seed, "correctness", i).integers(
                0, 2, code.n + t - 1, dtype=np.uint8), code.n, t)
        x_hat, _, c_t, flag = protocol.error_correction(x, y, code, h_ec)
        assert not np.array_equal(x_hat, x)
        if flag == protocol.PASS:
            undetected += 1
    p = 2.0 ** -t
    threshold = p + 3 * math.sqrt(p * (1 - p) / trials)
    freq = undetected / trials
    return {
        "suite": "correctness",
        "t": t,
        "trials": trials,
        "undetected_frequency": freq,
        "bound": p,
        "threshold": threshold,
        "passed": freq <= threshold,
    }


# ---------------------------------------------------------------------------
# universality: exhaustive Toeplitz collision counts
# ---------------------------------------------------------------------------

def suite_universality(n_max: int = 6, ell_max: int = 3) -> dict:
    """Exact 2^-ell collisions for every geometry and input pair."""
    checked = 0
    worst = None
    ok = True
    for n in range(1, n_max + 1):
        for ell in range(1, min(n, ell_max) + 1):
            want = Fraction(1, 2 ** ell)
            for xi, yi in itertools.combinations(range(2 ** n), 2):
                got = collision_probability_exhaustive(
                    n, ell, int_to_bits(xi, n), int_to_bits(yi, n))
                checked += 1
                if got != want:
                    ok = False
                    worst = {"n": n, "ell": ell, "x": xi, "xp": yi,
                             "got": str(got)}
    return {"suite": "universality", "pairs_checked": checked,
            "passed": ok, "violation": worst}


# ---------------------------------------------------------------------------
# serfling: exhaustive and Monte Carlo joint-event frequencies vs the bound
# ---------------------------------------------------------------------------

def _exhaustive_counts(z: np.ndarray, k: int) -> np.ndarray:
    """counts[s] = number of k-subsets whose sampled weight is s."""
    counts = np.zeros(k + 1, dtype=object)
    for sub in itertools.combinations(range(z.size), k):
        counts[int(z[list(sub)].sum())] += 1
    return counts


def _hypergeom_counts(total_weight: int, m: int, k: int) -> np.ndarray:
    """Same histogram computed from the sufficient statistic.

    Every subset with s ones and k-s zeros is counted once:
    C(T, s) * C(m-T, k-s).
    """
    counts = np.zeros(k + 1, dtype=object)
    for s in range(k + 1):
        if s <= total_weight and k - s <= m - total_weight:
            counts[s] = math.comb(total_weight, s) * math.comb(
                m - total_weight, k - s)
    return counts


def _joint_event_probability(counts: np.ndarray, total_weight: int, m: int,
                             k: int, delta: float, nu: float) -> Fraction:
    """Exact Pr[sampled rate <= delta AND rest rate >= delta + nu]."""
    n = m - k
    total = int(sum(counts))
    hit = 0
    for s in range(k + 1):
        if counts[s] == 0:
            continue
        rest = total_weight - s
        if s <= k * delta + 1e-12 and rest >= n * (delta + nu) - 1e-12:
            hit += int(counts[s])
    return Fraction(hit, total)


_Z_PATTERNS = {
    "all_zero": lambda m, rng: np.zeros(m, dtype=np.uint8),
    "all_one": lambda m, rng: np.ones(m, dtype=np.uint8),
    "half_half": lambda m, rng: np.concatenate(
        [np.ones(m // 2, dtype=np.uint8), np.zeros(m - m // 2, dtype=np.uint8)]),
    "random": lambda m, rng: rng.integers(0, 2, m, dtype=np.uint8),
}


def suite_serfling(master_seed: int = 0) -> dict:
    """Sampling tail bound against exhaustive and sampled enumeration.

    m = 30 exhaustive: k in {3, 5} by literal subset enumeration, k = 10
    via the hypergeometric regrouping (validated against the literal
    path on the smaller k).  Monte Carlo confirmation at m = 10^4 with
    10^5 subsets.  The bound must never be violated.
    """
    rng = stream(master_seed, "serfling-z")
    m = 30
    deltas = (0.05, 0.1, 0.2, 0.3)
    nus = (0.05, 0.1, 0.2, 0.3)
    cases = []
    ok = True

    for name, gen in _Z_PATTERNS.items():
        z = gen(m, rng)
        total_weight = int(z.sum())
        for k in (3, 5, 10):
            if k <= 5:
                counts = _exhaustive_counts(z, k)
                assert np.array_equal(
                    counts, _hypergeom_counts(total_weight, m, k))
            else:
                counts = _hypergeom_counts(total_weight, m, k)
            worst_margin = None
            for delta in deltas:
                for nu in nus:
                    freq = _joint_event_probability(counts, total_weight, m,
                                                    k, delta, nu)
                    bound = serfling_tail(m, k, nu).linear
                    if float(freq) > bound:
                        ok = False
                    margin = bound - float(freq)
                    if worst_margin is None or margin < worst_margin:
                        worst_margin = margin
            cases.append({"z": name, "k": k, "mode": "exhaustive",
                          "worst_margin": worst_margin})

    # Monte Carlo at large m: draw the subsets once, test several (delta, nu)
    m_big, k_big, samples = 10_000, 300, 100_000
    z = _Z_PATTERNS["random"](m_big, stream(master_seed, "serfling-z-big"))
    total_weight = int(z.sum())
    n_big = m_big - k_big
    rng_mc = stream(master_seed, "serfling-mc")
    sampled_s = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        sub = rng_mc.choice(m_big, size=k_big, replace=False, shuffle=False)
        sampled_s[i] = int(z[sub].sum())
    base_rate = total_weight / m_big
    for delta, nu in ((base_rate, 0.02), (base_rate, 0.05)):
        hits = int(np.count_nonzero(
            (sampled_s <= k_big * delta)
            & (total_weight - sampled_s >= n_big * (delta + nu))))
        freq = hits / samples
        bound = serfling_tail(m_big, k_big, nu).linear
        if freq > bound:
            ok = False
        cases.append({"z": "random", "m": m_big, "k": k_big, "nu": nu,
                      "mode": "monte_carlo", "frequency": freq,
                      "bound": bound})

    return {"suite": "serfling", "cases": cases, "passed": ok}


# ---------------------------------------------------------------------------
# overlap: closed-form overlap constants and the virtual construction
# ---------------------------------------------------------------------------

def _random_blind_family(rng) -> PreparedStateFamily:
    """Two random decompositions of one full-rank qubit state."""
    from .quantum import DensityMatrix
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    x = a @ a.conj().T + 0.05 * np.eye(2)
    x = x / np.trace(x).real
    w, v = np.linalg.eigh(x)
    sx = (v * np.sqrt(w)) @ v.conj().T
    states, probs = {}, {}
    for phi in (0, 1):
        theta = rng.uniform(0, 2 * np.pi)
        u = np.array([[np.cos(theta), -np.sin(theta)],
                      [np.sin(theta), np.cos(theta)]], dtype=complex)
        diag = rng.uniform(0.1, 0.9, size=2)
        e0 = u @ np.diag(diag).astype(complex) @ u.conj().T
        for out, e in enumerate((e0, np.eye(2) - e0)):
            weighted = sx @ e @ sx
            p = float(np.trace(weighted).real)
            states[(phi, out)] = DensityMatrix(weighted / p)
            probs[(phi, out)] = p
    return PreparedStateFamily(states=states, probabilities=probs)


def suite_overlaps(master_seed: int = 0, families: int = 100) -> dict:
    """Overlap constants and the virtual-measurement equalities."""
    results = {"suite": "overlap"}
    comp, had = MeasurementSet.computational(), MeasurementSet.hadamard()
    c_bb84 = overlap_c(comp, had)
    results["c_bb84"] = c_bb84
    fam = PreparedStateFamily.ideal_bb84()
    cp_bb84 = overlap_cprime(fam)
    results["cprime_bb84"] = cp_bb84
    ok = abs(c_bb84 - 0.5) <= 1e-12 and abs(cp_bb84 - 0.5) <= 1e-12

    rng = stream(master_seed, "overlap-cbar")
    brute_ok = True
    for _ in range(60):
        length = int(rng.integers(1, 13))
        vals = rng.uniform(0.0, 1.0, size=length)
        nn = int(rng.integers(1, length + 1))
        brute = max(
            math.prod(sorted((vals[i] for i in sub), reverse=True)) ** (1.0 / nn)
            for sub in itertools.combinations(range(length), nn))
        if cbar_bound(vals, nn) != brute:
            brute_ok = False
    results["cbar_brute_force_ok"] = brute_ok
    ok = ok and brute_ok

    rng = stream(master_seed, "overlap-virtual")
    worst_residual = 0.0
    worst_gap = abs(overlap_c(*[m for m in
                    virtual_measurement(fam)[1].values()]) - cp_bb84)
    fams = [fam] + [_random_blind_family(rng) for _ in range(families)]
    for family in fams:
        tau, meas = virtual_measurement(family)
        recon = reconstruct_from_virtual(family, tau, meas)
        for key, got in recon.items():
            want = family.weighted_state(*key)
            worst_residual = max(worst_residual,
                                 float(np.max(np.abs(got - want))))
        gap = abs(overlap_c(meas[0], meas[1]) - overlap_cprime(family))
        worst_gap = max(worst_gap, gap)
    results["families"] = len(fams)
    results["worst_reconstruction_residual"] = worst_residual
    results["worst_overlap_gap"] = worst_gap
    ok = ok and worst_residual <= 1e-10 and worst_gap <= 1e-9
    results["passed"] = ok
    return results


# ---------------------------------------------------------------------------
# reduction: exact distribution equality of the two protocols
# ---------------------------------------------------------------------------

def _int_bits(value: int, length: int) -> np.ndarray:
    return int_to_bits(value, length)


def pm_joint_distribution(big_m: int, m: int, k: int, delta: float) -> dict:
    """Exact law of (V, W, X, Y, F_pe) for the lossless noiseless link,
    conditioned on sifting success, by full enumeration.

    Enumerates every basis pair (phi_a, phi_b), Alice's raw bits on the
    sifted set, and every estimation subset, driving the real sift,
    reorder and test maps.  With eta = 1 and no noise every round is
    conclusive and Bob's outcomes equal Alice's bits wherever bases
    match; since Sigma only contains matching conclusive rounds and
    registers off Sigma never enter the tuple, marginalizing them is
    exact.  Returns tuple -> Fraction, normalized over the sift-pass
    event.
    """
    omega = np.arange(big_m)
    subsets = [np.array(s, dtype=int)
               for s in itertools.combinations(range(m), k)]
    dist: dict = {}
    pass_weight = Fraction(0)
    basis_weight = Fraction(1, 4 ** big_m)
    raw_weight = Fraction(1, 2 ** m)
    pi_weight = Fraction(1, len(subsets))
    for pa in range(2 ** big_m):
        phi_a = _int_bits(pa, big_m)
        for pb in range(2 ** big_m):
            phi_b = _int_bits(pb, big_m)
            sigma, flag = protocol.sift(phi_a, phi_b, omega, m)
            if flag != protocol.PASS:
                continue
            pass_weight += basis_weight
            for rv in range(2 ** m):
                r_sift = _int_bits(rv, m)  # Alice's bits on Sigma
                u_sift = r_sift            # noiseless matched-basis outcomes
                for pi in subsets:
                    v, x = protocol.reorder(r_sift, pi)
                    w, y = protocol.reorder(u_sift, pi)
                    f_pe = protocol.parameter_estimation(v, w, delta)
                    key = (tuple(v), tuple(w), tuple(x), tuple(y), f_pe)
                    dist[key] = dist.get(key, Fraction(0)) + (
                        basis_weight * raw_weight * pi_weight)
    return {key: p / pass_weight for key, p in dist.items()}


def eb_joint_distribution(m: int, k: int, delta: float) -> dict:
    """Exact law of (V, W, X, Y, F_pe) for the noiseless pair source."""
    subsets = [np.array(s, dtype=int)
               for s in itertools.combinations(range(m), k)]
    dist: dict = {}
    weight = Fraction(1, (2 ** m) * len(subsets))
    for av in range(2 ** m):
        alice = _int_bits(av, m)
        bob = alice  # noiseless source
        for pi in subsets:
            v, x = protocol.reorder(alice, pi)
            w, y = protocol.reorder(bob, pi)
            f_pe = protocol.parameter_estimation(v, w, delta)
            key = (tuple(v), tuple(w), tuple(x), tuple(y), f_pe)
            dist[key] = dist.get(key, Fraction(0)) + weight
    return dist


def suite_reduction(big_m: int = 6, m: int = 3, k: int = 1,
                    delta: float = 0.25) -> dict:
    """Exact total-variation distance between the two protocol laws."""
    pm = pm_joint_distribution(big_m, m, k, delta)
    eb = eb_joint_distribution(m, k, delta)
    keys = set(pm) | set(eb)
    tv = sum(abs(pm.get(key, Fraction(0)) - eb.get(key, Fraction(0)))
             for key in keys) / 2
    return {"suite": "reduction", "M": big_m, "m": m, "k": k,
            "outcomes": len(keys), "tv_distance": str(tv),
            "passed": tv == 0}


SUITES = {
    "correctness": suite_correctness,
    "serfling": suite_serfling,
    "universality": suite_universality,
    "overlap": suite_overlaps,
    "reduction": suite_reduction,
}
