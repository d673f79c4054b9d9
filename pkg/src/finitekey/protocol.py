"""Executable state machines for the two key-distribution protocols.

The entanglement-based run consumes m correlated outcome pairs and
walks randomization, measurement, parameter estimation, error
correction with hash verification, and privacy amplification.  The
prepare-and-measure run prefixes preparation, transmission with ternary
outcomes, randomness distribution and sifting, then reuses the same
tail.  All registers, transcripts and flags are materialized bit-exact;
a trace hook can observe every step.

Aborts zero-fill everything downstream of the aborting step and set the
remaining flags to abort.  Index convention is 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .bitops import as_bits, bits_to_hex, hamming_distance, random_bits
from .channels import INCONCLUSIVE
from .codes import LinearCode, corr, synd
from .security import ProtocolParams
from .toeplitz import ToeplitzSeed, hash_bits, sample_seed

PASS, ABORT, ABSENT = "pass", "abort", "absent"


@dataclass
class Seeds:
    """Shared randomness of one run; pm-only registers default to None."""

    phi: np.ndarray | None
    pi: np.ndarray
    h_ec: ToeplitzSeed
    h_pa: ToeplitzSeed
    phi_a: np.ndarray | None = None
    phi_b: np.ndarray | None = None
    r_pad: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "phi": None if self.phi is None else bits_to_hex(self.phi),
            "pi": [int(i) for i in self.pi],
            "h_ec": self.h_ec.to_hex(),
            "h_pa": self.h_pa.to_hex(),
        }
        if self.phi_a is not None:
            out["phi_a"] = bits_to_hex(self.phi_a)
            out["phi_b"] = bits_to_hex(self.phi_b)
            out["r_pad"] = bits_to_hex(self.r_pad)
        return out


@dataclass
class Transcript:
    """Public communication; pm-only registers default to None."""

    c_v: np.ndarray
    c_z: np.ndarray
    c_t: np.ndarray
    c_omega: np.ndarray | None = None
    c_sigma: np.ndarray | None = None
    s_phi_b: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "c_v": bits_to_hex(self.c_v),
            "c_z": bits_to_hex(self.c_z),
            "c_t": bits_to_hex(self.c_t),
        }
        if self.c_omega is not None:
            out["c_omega"] = [int(i) for i in self.c_omega]
        if self.c_sigma is not None:
            out["c_sigma"] = [int(i) for i in self.c_sigma]
        if self.s_phi_b is not None:
            out["s_phi_b"] = bits_to_hex(self.s_phi_b)
        return out


@dataclass
class Flags:
    f_si: str = ABSENT
    f_pe: str = ABORT
    f_ec: str = ABORT

    @property
    def all_pass(self) -> bool:
        return (self.f_si in (PASS, ABSENT) and self.f_pe == PASS
                and self.f_ec == PASS)

    def to_json(self) -> dict:
        return {"f_si": self.f_si, "f_pe": self.f_pe, "f_ec": self.f_ec}


@dataclass
class ProtocolOutput:
    k_a: np.ndarray
    k_b: np.ndarray
    seeds: Seeds
    transcript: Transcript
    flags: Flags

    @property
    def keys_equal(self) -> bool:
        return bool(np.array_equal(self.k_a, self.k_b))

    def to_json(self) -> dict:
        return {
            "k_a": bits_to_hex(self.k_a),
            "k_b": bits_to_hex(self.k_b),
            "seeds": self.seeds.to_json(),
            "transcript": self.transcript.to_json(),
            "flags": self.flags.to_json(),
        }


def sample_subset(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform size-k subset of {0..m-1}: partial Fisher-Yates, sorted."""
    idx = np.arange(m)
    for i in range(k):
        j = i + int(rng.integers(0, m - i))
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(idx[:k])


def sample_seeds(p: ProtocolParams, rng: np.random.Generator) -> Seeds:
    """Draw the EB seed tuple (basis string, subset, two hash seeds)."""
    return Seeds(
        phi=random_bits(p.m, rng),
        pi=sample_subset(p.m, p.k, rng),
        h_ec=sample_seed(p.n, p.t, rng),
        h_pa=sample_seed(p.n, p.ell, rng),
    )


def reorder(raw, pi) -> tuple[np.ndarray, np.ndarray]:
    """Split a string into (bits on pi, bits off pi), index order kept."""
    raw = as_bits(raw)
    pi = np.asarray(pi, dtype=int)
    if pi.size and (pi.min() < 0 or pi.max() >= raw.size):
        raise IndexError("subset index out of range")
    mask = np.zeros(raw.size, dtype=bool)
    mask[pi] = True
    return raw[mask], raw[~mask]


def parameter_estimation(v, w, delta: float) -> str:
    """Abort iff the error count reaches k*delta (the >= branch).

    The float product k*delta is snapped to the nearest integer when
    within 1e-9 so decimal thresholds behave as their exact rationals.
    """
    v, w = as_bits(v), as_bits(w)
    if v.size != w.size:
        raise ValueError("length mismatch")
    threshold = v.size * delta
    if abs(threshold - round(threshold)) < 1e-9:
        threshold = round(threshold)
    return ABORT if hamming_distance(v, w) >= threshold else PASS


def error_correction(x, y, code: LinearCode, h_ec: ToeplitzSeed):
    """Syndrome, decode, verification hash.

    Returns (x_hat, c_z, c_t, flag); the flag passes iff Bob's hash of
    the decoded string matches Alice's.
    """
    x, y = as_bits(x), as_bits(y)
    if code.n != x.size or h_ec.n != x.size:
        raise ValueError("length mismatch")
    c_z = synd(code, x)
    x_hat = corr(code, y, c_z)
    c_t = hash_bits(h_ec, x)
    flag = PASS if np.array_equal(hash_bits(h_ec, x_hat), c_t) else ABORT
    return x_hat, c_z, c_t, flag


def privacy_amplification(x, x_hat, h_pa: ToeplitzSeed):
    """Hash both reconciled strings down to the final key length."""
    if h_pa.n != as_bits(x).size:
        raise ValueError("length mismatch")
    return hash_bits(h_pa, x), hash_bits(h_pa, x_hat)


def sift(phi_a, phi_b, omega, m: int) -> tuple[np.ndarray, str]:
    """First m conclusive indices with agreeing bases, or a dummy.

    Scanning indices in increasing order yields the lexicographically
    first size-m subset of matching conclusive rounds.  On failure the
    dummy subset {0..m-1} is returned with an abort flag.
    """
    phi_a, phi_b = as_bits(phi_a), as_bits(phi_b)
    omega = np.asarray(omega, dtype=int)
    matching = omega[phi_a[omega] == phi_b[omega]]
    if matching.size >= m:
        return np.sort(matching)[:m], PASS
    return np.arange(m), ABORT


def _zero_output(p: ProtocolParams, seeds: Seeds, transcript: Transcript,
                 flags: Flags) -> ProtocolOutput:
    zeros = np.zeros(p.ell, dtype=np.uint8)
    return ProtocolOutput(k_a=zeros, k_b=zeros.copy(), seeds=seeds,
                          transcript=transcript, flags=flags)


def _emit(trace, step: str, **payload):
    if trace is not None:
        trace({"step": step, **payload})


def _finish_run(v, w, x, y, p: ProtocolParams, code: LinearCode, seeds: Seeds,
                transcript: Transcript, flags: Flags, trace) -> ProtocolOutput:
    """Shared tail: parameter estimation, error correction, amplification."""
    transcript.c_v = v.copy()
    flags.f_pe = parameter_estimation(v, w, p.delta)
    _emit(trace, "parameter_estimation", c_v=bits_to_hex(v),
          errors=hamming_distance(v, w), flag=flags.f_pe)
    if flags.f_pe == ABORT:
        return _zero_output(p, seeds, transcript, flags)

    x_hat, c_z, c_t, flags.f_ec = error_correction(x, y, code, seeds.h_ec)
    transcript.c_z, transcript.c_t = c_z, c_t
    _emit(trace, "error_correction", c_z=bits_to_hex(c_z),
          c_t=bits_to_hex(c_t), flag=flags.f_ec)
    if flags.f_ec == ABORT:
        return _zero_output(p, seeds, transcript, flags)

    k_a, k_b = privacy_amplification(x, x_hat, seeds.h_pa)
    _emit(trace, "privacy_amplification", k_a=bits_to_hex(k_a),
          k_b=bits_to_hex(k_b))
    return ProtocolOutput(k_a=k_a, k_b=k_b, seeds=seeds,
                          transcript=transcript, flags=flags)


def run_eb(source, p: ProtocolParams, code: LinearCode,
           rng: np.random.Generator, trace=None) -> ProtocolOutput:
    """One entanglement-based run against a correlated outcome source."""
    if code.n != p.n:
        raise ValueError(f"code block {code.n} does not match n={p.n}")
    seeds = sample_seeds(p, rng)
    _emit(trace, "randomization", **seeds.to_json())

    alice, bob = source.emit(seeds.phi, rng)
    alice, bob = as_bits(alice), as_bits(bob)
    if alice.size != p.m or bob.size != p.m:
        raise RuntimeError("source emitted wrong block length")
    _emit(trace, "measurement", alice=bits_to_hex(alice), bob=bits_to_hex(bob))

    v, x = reorder(alice, seeds.pi)
    w, y = reorder(bob, seeds.pi)
    transcript = Transcript(c_v=np.zeros(p.k, dtype=np.uint8),
                            c_z=np.zeros(p.r, dtype=np.uint8),
                            c_t=np.zeros(p.t, dtype=np.uint8))
    flags = Flags(f_si=ABSENT)
    return _finish_run(v, w, x, y, p, code, seeds, transcript, flags, trace)


def run_pm(channel, big_m: int, p: ProtocolParams, code: LinearCode,
           rng: np.random.Generator, trace=None) -> ProtocolOutput:
    """One prepare-and-measure run against a lossy ternary channel."""
    if big_m < p.m:
        raise ValueError(f"need M >= m, got M={big_m}, m={p.m}")
    if code.n != p.n:
        raise ValueError(f"code block {code.n} does not match n={p.n}")

    phi_a = random_bits(big_m, rng)
    phi_b = random_bits(big_m, rng)
    r_pad = random_bits(big_m, rng)
    pi = sample_subset(p.m, p.k, rng)
    h_ec = sample_seed(p.n, p.t, rng)
    h_pa = sample_seed(p.n, p.ell, rng)
    seeds = Seeds(phi=None, pi=pi, h_ec=h_ec, h_pa=h_pa, phi_a=phi_a,
                  phi_b=phi_b, r_pad=r_pad)
    _emit(trace, "randomization", phi_a=bits_to_hex(phi_a),
          phi_b=bits_to_hex(phi_b), r=bits_to_hex(r_pad),
          pi=[int(i) for i in pi], h_ec=h_ec.to_hex(), h_pa=h_pa.to_hex())

    u = channel.transmit(r_pad, phi_a, phi_b, rng)
    u = np.asarray(u, dtype=np.uint8)
    if u.size != big_m:
        raise RuntimeError("channel returned wrong number of outcomes")
    omega = np.flatnonzero(u != INCONCLUSIVE)
    _emit(trace, "measurement", conclusive=int(omega.size))

    transcript = Transcript(c_v=np.zeros(p.k, dtype=np.uint8),
                            c_z=np.zeros(p.r, dtype=np.uint8),
                            c_t=np.zeros(p.t, dtype=np.uint8),
                            c_omega=omega, c_sigma=None, s_phi_b=phi_b.copy())
    _emit(trace, "randomness_distribution", c_omega=len(omega),
          s_phi_b=bits_to_hex(phi_b))

    sigma, f_si = sift(phi_a, phi_b, omega, p.m)
    transcript.c_sigma = sigma
    flags = Flags(f_si=f_si)
    _emit(trace, "sifting", c_sigma=[int(i) for i in sigma], flag=f_si)
    if f_si == ABORT:
        return _zero_output(p, seeds, transcript, flags)

    seeds.phi = phi_a[sigma].copy()  # the agreed basis string S^Phi
    r_sift = r_pad[sigma]
    u_sift = u[sigma].astype(np.uint8)
    v, x = reorder(r_sift, pi)
    w, y = reorder(u_sift, pi)
    return _finish_run(v, w, x, y, p, code, seeds, transcript, flags, trace)


