"""Simulated sources, channels and the intercept-resend attack.

The honest reference model is i.i.d. symmetric bit-flip noise plus
basis-independent loss: conclusiveness is decided before and
independently of every basis choice, which is exactly the regime where
the two-step measurement decomposition applies.  The eavesdropper is
simulated mechanistically (her basis and outcome are sampled per
index), so the 25% induced error rate is an emergent check rather than
an input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bitops import as_bits
from .quantum import PreparedStateFamily

INCONCLUSIVE = 2  # ternary outcome marker in uint8 outcome strings

VARIANTS = ("eb_honest", "pm_honest", "pm_intercept_resend")


@dataclass(frozen=True)
class ChannelModel:
    """Noise/loss/attack parameters for one simulated link."""

    variant: str
    qber: float = 0.0
    eta: float = 1.0
    attack_fraction: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.qber <= 0.5:
            raise ValueError(f"qber {self.qber} outside [0, 1/2]")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta {self.eta} outside (0, 1]")
        if not 0.0 <= self.attack_fraction <= 1.0:
            raise ValueError("attack_fraction outside [0, 1]")
        if self.variant == "eb_honest" and self.eta != 1.0:
            raise ValueError("entangled-pair source has no loss parameter")
        if self.variant != "pm_intercept_resend" and self.attack_fraction != 0.0:
            raise ValueError("attack_fraction requires the intercept variant")

    def to_json(self) -> dict:
        return {"variant": self.variant, "qber": self.qber, "eta": self.eta,
                "attack_fraction": self.attack_fraction}

    @classmethod
    def from_json(cls, blob) -> "ChannelModel":
        if isinstance(blob, str):
            blob = json.loads(blob)
        return cls(variant=blob["variant"], qber=blob.get("qber", 0.0),
                   eta=blob.get("eta", 1.0),
                   attack_fraction=blob.get("attack_fraction", 0.0))


def eb_emit(model: ChannelModel, phi, rng: np.random.Generator):
    """Honest noisy pair source: Bob's bits are Alice's with iid flips.

    The noise is isotropic, so the basis string is ignored.
    """
    if model.variant != "eb_honest":
        raise ValueError(f"eb_emit needs eb_honest, got {model.variant}")
    phi = as_bits(phi)
    m = phi.size
    alice = rng.integers(0, 2, size=m, dtype=np.uint8)
    flips = (rng.random(m) < model.qber).astype(np.uint8)
    return alice, alice ^ flips


def pm_transmit(model: ChannelModel, r, phi_a, phi_b,
                rng: np.random.Generator) -> np.ndarray:
    """One pass of M prepared states through the link to Bob's detector.

    Per index: the state picks up a bit flip with probability qber; the
    eavesdropper (if any) measures in a fresh uniform basis and resends
    her outcome; loss strikes independently of all bases and bits; a
    conclusive detection measures in Bob's basis, giving the state's bit
    when bases match and a fair coin otherwise.
    """
    if model.variant not in ("pm_honest", "pm_intercept_resend"):
        raise ValueError(f"pm_transmit needs a pm variant, got {model.variant}")
    r, phi_a, phi_b = as_bits(r), as_bits(phi_a), as_bits(phi_b)
    m = r.size
    if phi_a.size != m or phi_b.size != m:
        raise ValueError("register lengths disagree")

    basis = phi_a.copy()
    bit = r ^ (rng.random(m) < model.qber).astype(np.uint8)

    if model.variant == "pm_intercept_resend" and model.attack_fraction > 0:
        attacked = rng.random(m) < model.attack_fraction
        eve_basis = rng.integers(0, 2, size=m, dtype=np.uint8)
        eve_coin = rng.integers(0, 2, size=m, dtype=np.uint8)
        eve_out = np.where(eve_basis == basis, bit, eve_coin).astype(np.uint8)
        basis = np.where(attacked, eve_basis, basis).astype(np.uint8)
        bit = np.where(attacked, eve_out, bit).astype(np.uint8)

    conclusive = rng.random(m) < model.eta
    bob_coin = rng.integers(0, 2, size=m, dtype=np.uint8)
    outcome = np.where(phi_b == basis, bit, bob_coin).astype(np.uint8)
    return np.where(conclusive, outcome, INCONCLUSIVE).astype(np.uint8)


class EntangledPairSource:
    """Adapter giving the EB protocol its emit(phi, rng) hook."""

    def __init__(self, model: ChannelModel):
        self.model = model

    def emit(self, phi, rng):
        return eb_emit(self.model, phi, rng)


class PreparedStateChannel:
    """Adapter giving the PM protocol its transmit(...) hook."""

    def __init__(self, model: ChannelModel):
        self.model = model

    def transmit(self, r, phi_a, phi_b, rng):
        return pm_transmit(self.model, r, phi_a, phi_b, rng)


def born_oracle(family: PreparedStateFamily, measurements: dict,
                rounds: int, rng: np.random.Generator) -> dict:
    """Exact Born-rule sampling used to cross-check the bit-level models.

    For each round a setting and bit are drawn from the family, a
    measurement basis is drawn uniformly, and the outcome is sampled
    with probability tr(M rho M^dag).  Returns arrays prep_basis,
    prep_bit, meas_basis, outcome.
    """
    if rounds > 10_000:
        raise ValueError("born oracle capped at 10^4 rounds")
    dims = {rho.dim for rho in family.states.values()}
    if max(dims) > 4:
        raise ValueError("born oracle capped at dimension 4")

    prep_keys = sorted(family.states)
    prep_probs = np.array([family.probabilities[k] / len(family.settings)
                           for k in prep_keys])
    meas_keys = sorted(measurements)

    # outcome distribution per (preparation, measurement basis)
    table = {}
    for pk in prep_keys:
        rho = family.states[pk].entries
        for mk in meas_keys:
            ops = measurements[mk].operators
            probs = np.array([float(np.real(np.trace(op @ rho @ op.conj().T)))
                              for op in ops])
            table[(pk, mk)] = np.clip(probs, 0.0, None) / probs.sum()

    prep_idx = rng.choice(len(prep_keys), size=rounds, p=prep_probs)
    meas_idx = rng.integers(0, len(meas_keys), size=rounds)
    out = {"prep_basis": np.empty(rounds, dtype=np.uint8),
           "prep_bit": np.empty(rounds, dtype=np.uint8),
           "meas_basis": np.empty(rounds, dtype=np.uint8),
           "outcome": np.empty(rounds, dtype=np.uint8)}
    u = rng.random(rounds)
    for i in range(rounds):
        pk = prep_keys[prep_idx[i]]
        mk = meas_keys[meas_idx[i]]
        cum = np.cumsum(table[(pk, mk)])
        z = int(np.searchsorted(cum, u[i]))
        out["prep_basis"][i], out["prep_bit"][i] = pk
        out["meas_basis"][i] = mk
        out["outcome"][i] = min(z, len(cum) - 1)
    return out
