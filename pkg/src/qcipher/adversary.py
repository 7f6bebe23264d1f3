"""Eavesdropper models and security experiments.

The intercept-resend adversary measures a transiting ciphertext in the
computational basis and forwards the collapsed state. Experiments here
model the receiver's read physically, as the inverse circuit followed by a
sampled measurement: a single intercepted copy then slips through
undetected exactly when the sampled read still reproduces the original
plaintext, which happens with the collision probability sum(|c_b|^4).
Sending r independent copies of a block amplifies detection to
1 - (sum |c_b|^4)^r.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cipher import CipherBlock, PlainBlock, _apply_ops_inplace, encode_plaintext, encrypt_block
from .errors import InputError, ResourceError
from .keyschedule import CipherKey, enumerate_keys, inverse_circuit, key_circuit, keyspace_size
from .statevector import StateVector, fidelity, index_to_bits, measure_all

BRUTE_FORCE_CAP = 10**6


@dataclass(frozen=True)
class AttackReport:
    """Outcome of one security experiment."""

    name: str
    trials: int
    counts: dict[str, int]
    estimates: dict[str, float]
    ci_half_widths: dict[str, float]
    params: dict[str, object]

    def to_json(self) -> str:
        def _clean(v: object) -> object:
            # Exact big integers are serialized as decimal strings.
            if isinstance(v, bool):
                return v
            if isinstance(v, int) and abs(v) > 2**53:
                return str(v)
            return v

        obj = {
            "name": self.name,
            "trials": self.trials,
            "counts": self.counts,
            "estimates": self.estimates,
            "ci_half_widths": self.ci_half_widths,
            "params": {k: _clean(v) for k, v in self.params.items()},
        }
        return json.dumps(obj)


def _ci_half_width(successes: int, trials: int) -> float:
    # Normal-approximation 95% binomial half-width.
    if trials == 0:
        return 0.0
    p = successes / trials
    return 1.96 * math.sqrt(p * (1.0 - p) / trials)


def collision_probability(s: StateVector) -> float:
    """sum(|c_b|^4): chance one intercepted copy goes unnoticed."""
    return float(np.sum(np.abs(s.amps) ** 4))


def intercept_measure(c: StateVector, rng: np.random.Generator) -> tuple[StateVector, str]:
    """Eve's move: measure, keep the bits, forward the collapsed state."""
    outcome = measure_all(c, rng)
    return outcome.collapsed, outcome.bits


def sampled_decrypt_bits(k: CipherKey, state: StateVector, rng: np.random.Generator) -> str:
    """The receiver's physical read: inverse circuit, then one measurement."""
    if state.n != k.n:
        raise InputError(f"state has {state.n} qubits, key expects {k.n}")
    amps = state.amps.copy()
    _apply_ops_inplace(amps, k.n, inverse_circuit(k))
    probs = np.abs(amps) ** 2
    probs /= probs.sum()
    return index_to_bits(int(rng.choice(probs.size, p=probs)), k.n)


def detection_experiment(
    k: CipherKey,
    p: PlainBlock,
    r: int,
    eve_on: bool,
    rng: np.random.Generator,
    trials: int = 1000,
) -> AttackReport:
    """Repetition protocol: send r independent encryptions of one block.

    A copy passes when the receiver's sampled read returns the reference
    plaintext; the protocol detects tampering when any copy fails. With
    Eve off the channel is noiseless and nothing is ever flagged.
    """
    if r < 1:
        raise InputError("repetitions must be >= 1")
    if trials < 1:
        raise InputError("trials must be >= 1")
    ciphertext = encrypt_block(k, p).state
    collision = collision_probability(ciphertext)

    # Decode probabilities depend only on Eve's collapse outcome, so cache
    # the inverse-circuit distribution per observed basis state.
    decode_cache: dict[str, np.ndarray] = {}

    def _decode_probs(state: StateVector, bits_key: str | None) -> np.ndarray:
        if bits_key is not None and bits_key in decode_cache:
            return decode_cache[bits_key]
        amps = state.amps.copy()
        _apply_ops_inplace(amps, k.n, inverse_circuit(k))
        probs = np.abs(amps) ** 2
        probs /= probs.sum()
        if bits_key is not None:
            decode_cache[bits_key] = probs
        return probs

    detections = 0
    copy_passes = 0
    total_copies = trials * r
    honest_probs = _decode_probs(ciphertext, None)
    for _ in range(trials):
        all_passed = True
        for _ in range(r):
            if eve_on:
                forwarded, eve_bits = intercept_measure(ciphertext, rng)
                probs = _decode_probs(forwarded, eve_bits)
            else:
                probs = honest_probs
            got = index_to_bits(int(rng.choice(probs.size, p=probs)), k.n)
            if got == p.bits:
                copy_passes += 1
            else:
                all_passed = False
        if not all_passed:
            detections += 1

    detection_rate = detections / trials
    pass_rate = copy_passes / total_copies
    return AttackReport(
        name="intercept-resend detection",
        trials=trials,
        counts={"detections": detections, "copy_passes": copy_passes, "copies": total_copies},
        estimates={
            "detection_rate": detection_rate,
            "per_copy_pass": pass_rate,
            "collision_probability": collision,
            "predicted_detection_rate": 1.0 - collision**r if eve_on else 0.0,
        },
        ci_half_widths={
            "detection_rate": _ci_half_width(detections, trials),
            "per_copy_pass": _ci_half_width(copy_passes, total_copies),
        },
        params={"n": k.n, "r": r, "eve_on": eve_on, "plaintext": p.bits},
    )


def folded_angle(theta: float) -> float:
    """Reduce an angle to the [0, pi/2] class its marginal determines."""
    return math.acos(abs(math.cos(theta)))


def marginal_estimation_attack(
    k: CipherKey,
    p: PlainBlock,
    samples: int,
    rng: np.random.Generator,
    step1_only: bool = True,
) -> np.ndarray:
    """Estimate the per-qubit rotation angles from intercepted statistics.

    Against the rotation-layer-only ablation the per-qubit frequency of 0
    converges to cos(theta)^2 (for plaintext bit 0), so
    arccos(sqrt(p_hat)) recovers the angle up to its quadrant class.
    Against the full circuit the marginals mix many angles and the same
    estimator carries no single-angle information.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if p.n != k.n:
        raise InputError(f"plaintext length {p.n} does not match key block size {k.n}")
    ops = key_circuit(k, through_step=1 if step1_only else 4)
    amps = encode_plaintext(p.bits).amps.copy()
    _apply_ops_inplace(amps, k.n, ops)
    probs = np.abs(amps) ** 2
    probs /= probs.sum()
    draws = rng.choice(probs.size, size=samples, p=probs)
    estimates = np.empty(k.n)
    for q in range(1, k.n + 1):
        zeros = int(np.count_nonzero((draws >> (k.n - q)) & 1 == 0))
        p_hat = zeros / samples
        estimates[q - 1] = math.acos(math.sqrt(min(max(p_hat, 0.0), 1.0)))
    return estimates


def brute_force_key_recovery(
    n: int, N: int, known: tuple[PlainBlock, CipherBlock]
) -> list[CipherKey]:
    """Enumerate the whole keyspace and keep keys consistent with one
    known plaintext/ciphertext pair (fidelity within 1e-9 of 1)."""
    size, _ = keyspace_size(n, N)
    if size > BRUTE_FORCE_CAP:
        raise ResourceError(f"keyspace of {size} keys exceeds the {BRUTE_FORCE_CAP} enumeration cap")
    plaintext, ciphertext = known
    if plaintext.n != n or ciphertext.state.n != n:
        raise InputError("known pair must match the key block size")
    consistent = []
    for key in enumerate_keys(n, N):
        candidate = encrypt_block(key, plaintext).state
        if fidelity(candidate, ciphertext.state) >= 1.0 - 1e-9:
            consistent.append(key)
    return consistent


@dataclass(frozen=True)
class ConfigCountBounds:
    """Exact bounds on the number of distinct control/target layouts a
    gate sequence of the given length can have."""

    n: int
    L: int
    lower: int
    upper: int

    @property
    def log2_lower(self) -> float:
        return math.log2(self.lower)

    @property
    def log2_upper(self) -> float:
        return math.log2(self.upper)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "L": self.L,
                "lower": str(self.lower),
                "upper": str(self.upper),
                "log2_lower": self.log2_lower,
                "log2_upper": self.log2_upper,
            }
        )


def config_count_bounds(n: int, L: int) -> ConfigCountBounds:
    """lower = n*(n-1)^L (chained non-commuting sequences), upper =
    (n^2-n)^L (unrestricted control/target choices); exact integers."""
    if n < 2:
        raise InputError("config_count_bounds requires n >= 2")
    if L < 1:
        raise InputError("config_count_bounds requires L >= 1")
    return ConfigCountBounds(n, L, n * (n - 1) ** L, (n * n - n) ** L)
