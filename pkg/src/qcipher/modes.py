"""Multi-block encryption: two quantum takes on cipher block chaining.

Mode 1 (measured IV): each block is XORed with a chaining value before
encryption. The chaining value for block i+1 is obtained by measuring a
rebuilt copy of block i's ciphertext; the collapsed basis state travels
with the transmission as an IV carrier, so the chaining value never crosses
a classical channel. Measurement makes this mode genuinely random.

Mode 2 (entangling CNOTs): block i's plaintext register is stitched to
block i-1's ciphertext with one CNOT per qubit (under a pairing permutation
that can be part of the key) before the key circuit runs on it. All blocks
live in one joint register, which is why the total width is capped; the
mode is fully deterministic.

The first block of either mode is XORed with a pre-shared initialization
vector that is stored with the key material, never with the transmission.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cipher import (
    CipherBlock,
    PlainBlock,
    _apply_ops_inplace,
    _read_basis_bits,
    cipherblock_from_obj,
    encode_plaintext,
    encrypt_block,
    xor_bits,
)
from .errors import InputError, ResourceError
from .keyschedule import CipherKey, Cnot, inverse_circuit, key_circuit
from .statevector import (
    MAX_QUBITS,
    StateVector,
    _amps_body,
    measure_all,
    tensor,
)


class Mode(str, Enum):
    MEASURED = "m1"
    ENTANGLING = "m2"


@dataclass(frozen=True)
class ModeConfig:
    """Chaining parameters shared between sender and receiver.

    ``iv`` is the pre-shared first chaining value. ``mode2_pairing`` maps
    qubit q of the previous ciphertext to qubit pairing[q-1] of the next
    plaintext; it defaults to the identity and is only meaningful for the
    entangling mode.
    """

    mode: Mode
    iv: str
    mode2_pairing: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.mode, Mode):
            raise InputError(f"mode must be a Mode value, got {self.mode!r}")
        if not self.iv or any(c not in "01" for c in self.iv):
            raise InputError(f"iv must be a nonempty bitstring, got {self.iv!r}")
        n = len(self.iv)
        if self.mode is Mode.MEASURED:
            if self.mode2_pairing is not None:
                raise InputError("mode2_pairing is only valid for the entangling mode")
            return
        pairing = self.mode2_pairing
        if pairing is None:
            pairing = tuple(range(1, n + 1))
        else:
            pairing = tuple(int(v) for v in pairing)
            if sorted(pairing) != list(range(1, n + 1)):
                raise InputError("mode2_pairing must be a permutation of 1..n")
        object.__setattr__(self, "mode2_pairing", pairing)

    @property
    def n(self) -> int:
        return len(self.iv)


@dataclass(frozen=True, eq=False)
class Transmission:
    """Everything that crosses the simulated quantum channel."""

    mode: Mode
    n: int
    m: int
    blocks: tuple[CipherBlock, ...] = ()
    iv_carriers: tuple[StateVector, ...] = ()
    joint: StateVector | None = None

    def __post_init__(self) -> None:
        if self.m < 0:
            raise InputError("block count must be nonnegative")
        if self.mode is Mode.MEASURED:
            if self.joint is not None:
                raise InputError("measured-IV transmissions carry per-block states, not a joint register")
            if len(self.blocks) != self.m or len(self.iv_carriers) != self.m:
                raise InputError(f"expected {self.m} ciphertext blocks and {self.m} IV carriers")
        else:
            if self.blocks or self.iv_carriers:
                raise InputError("entangling transmissions carry a single joint register")
            if self.m > 0:
                if self.m * self.n > MAX_QUBITS:
                    raise ResourceError(
                        f"joint register of {self.m * self.n} qubits exceeds the {MAX_QUBITS}-qubit cap"
                    )
                if self.joint is None or self.joint.n != self.m * self.n:
                    raise InputError(f"joint register must hold exactly {self.m * self.n} qubits")


def _check_blocks(k: CipherKey, blocks: list[PlainBlock]) -> None:
    for i, p in enumerate(blocks):
        if p.n != k.n:
            raise InputError(f"block {i} has {p.n} bits, key expects {k.n}")


def mode1_encrypt(
    k: CipherKey, blocks: list[PlainBlock], cfg: ModeConfig, rng: np.random.Generator
) -> Transmission:
    """Chain blocks through measured IVs.

    For each block: XOR with the current chaining value, encrypt, then
    rebuild the same ciphertext from the known classical inputs (a
    legitimate re-encryption, not a clone) and measure it. The measured
    bits become the next chaining value and the collapsed copy ships as
    the IV carrier.
    """
    if cfg.mode is not Mode.MEASURED:
        raise InputError("mode1_encrypt requires a measured-IV config")
    if cfg.n != k.n:
        raise InputError(f"iv length {cfg.n} does not match key block size {k.n}")
    _check_blocks(k, blocks)
    iv = cfg.iv
    out: list[CipherBlock] = []
    carriers: list[StateVector] = []
    for i, p in enumerate(blocks):
        mixed = xor_bits(p.bits, iv)
        sealed = encrypt_block(k, PlainBlock(mixed))
        out.append(CipherBlock(sealed.state, i, Mode.MEASURED.value))
        copy = encrypt_block(k, PlainBlock(mixed))
        outcome = measure_all(copy.state, rng)
        carriers.append(outcome.collapsed)
        iv = outcome.bits
    return Transmission(Mode.MEASURED, k.n, len(blocks), tuple(out), tuple(carriers))


def mode1_decrypt(k: CipherKey, t: Transmission, cfg: ModeConfig) -> list[PlainBlock]:
    """Invert the measured-IV chain; IV carriers must be basis states."""
    if t.mode is not Mode.MEASURED:
        raise InputError("mode1_decrypt requires a measured-IV transmission")
    if cfg.mode is not Mode.MEASURED or cfg.n != k.n or t.n != k.n:
        raise InputError("config, key, and transmission block sizes must agree")
    iv = cfg.iv
    out: list[PlainBlock] = []
    for i in range(t.m):
        inner = t.blocks[i]
        amps = inner.state.amps.copy()
        _apply_ops_inplace(amps, k.n, inverse_circuit(k))
        mixed = _read_basis_bits(amps, k.n, f"block {i}")
        out.append(PlainBlock(xor_bits(mixed, iv)))
        iv = _read_basis_bits(t.iv_carriers[i].amps, k.n, f"IV carrier {i}")
    return out


def _chain_cnots(n: int, from_block: int, to_block: int, pairing: tuple[int, ...]) -> list[Cnot]:
    base_c = (from_block - 1) * n
    base_t = (to_block - 1) * n
    return [Cnot(base_c + q, base_t + pairing[q - 1]) for q in range(1, n + 1)]


def mode2_encrypt(k: CipherKey, blocks: list[PlainBlock], cfg: ModeConfig) -> Transmission:
    """Chain blocks through entangling CNOTs into one joint register."""
    if cfg.mode is not Mode.ENTANGLING:
        raise InputError("mode2_encrypt requires an entangling-mode config")
    if cfg.n != k.n:
        raise InputError(f"iv length {cfg.n} does not match key block size {k.n}")
    _check_blocks(k, blocks)
    m = len(blocks)
    if m == 0:
        return Transmission(Mode.ENTANGLING, k.n, 0)
    if m * k.n > MAX_QUBITS:
        raise ResourceError(
            f"joint register of {m * k.n} qubits exceeds the {MAX_QUBITS}-qubit cap"
        )
    pairing = cfg.mode2_pairing
    assert pairing is not None
    first = xor_bits(blocks[0].bits, cfg.iv)
    joint = encrypt_block(k, PlainBlock(first)).state
    for i in range(2, m + 1):
        joint = tensor(joint, encode_plaintext(blocks[i - 1].bits))
        amps = joint.amps.copy()
        _apply_ops_inplace(amps, joint.n, _chain_cnots(k.n, i - 1, i, pairing))
        _apply_ops_inplace(amps, joint.n, key_circuit(k), offset=(i - 1) * k.n)
        joint = StateVector(joint.n, amps)
    return Transmission(Mode.ENTANGLING, k.n, m, joint=joint)


def mode2_decrypt(k: CipherKey, t: Transmission, cfg: ModeConfig) -> list[PlainBlock]:
    """Unwind the entangled chain from the last block to the first.

    Undoing block i's key circuit and re-applying the pairing CNOTs
    (controlled on block i-1) disentangles block i into its plaintext
    basis state; after the first block is inverted the whole register must
    be a single basis state, read with an argmax plus purity check.
    """
    if t.mode is not Mode.ENTANGLING:
        raise InputError("mode2_decrypt requires an entangling-mode transmission")
    if cfg.mode is not Mode.ENTANGLING or cfg.n != k.n or t.n != k.n:
        raise InputError("config, key, and transmission block sizes must agree")
    if t.m == 0:
        return []
    pairing = cfg.mode2_pairing
    assert pairing is not None
    total = t.m * k.n
    amps = t.joint.amps.copy()  # type: ignore[union-attr]
    inv = inverse_circuit(k)
    for i in range(t.m, 1, -1):
        _apply_ops_inplace(amps, total, inv, offset=(i - 1) * k.n)
        _apply_ops_inplace(amps, total, _chain_cnots(k.n, i - 1, i, pairing))
    _apply_ops_inplace(amps, total, inv)
    bits = _read_basis_bits(amps, total, "joint register")
    chunks = [bits[i * k.n : (i + 1) * k.n] for i in range(t.m)]
    chunks[0] = xor_bits(chunks[0], cfg.iv)
    return [PlainBlock(c) for c in chunks]


def encrypt(
    k: CipherKey,
    blocks: list[PlainBlock],
    cfg: ModeConfig,
    rng: np.random.Generator | None = None,
) -> Transmission:
    """Mode-dispatching convenience wrapper."""
    if cfg.mode is Mode.MEASURED:
        if rng is None:
            raise InputError("the measured-IV mode needs a random generator")
        return mode1_encrypt(k, blocks, cfg, rng)
    return mode2_encrypt(k, blocks, cfg)


def decrypt(k: CipherKey, t: Transmission, cfg: ModeConfig) -> list[PlainBlock]:
    if t.mode is Mode.MEASURED:
        return mode1_decrypt(k, t, cfg)
    return mode2_decrypt(k, t, cfg)


# ---------------------------------------------------------------------------
# Transmission file: an envelope around statevector payload entries. The IV
# itself is never serialized here; it belongs with the key material.

def _carrier_fragment(s: StateVector, index: int) -> str:
    return (
        f'{{"n": {s.n}, "amps": [{_amps_body(s.amps)}], '
        f'"block_index": {index}, "mode": "iv"}}'
    )


def transmission_to_json(t: Transmission) -> str:
    entries: list[str] = []
    if t.mode is Mode.MEASURED:
        for i in range(t.m):
            b = t.blocks[i]
            entries.append(
                f'{{"n": {b.state.n}, "amps": [{_amps_body(b.state.amps)}], '
                f'"block_index": {b.block_index}, "mode": "m1"}}'
            )
            entries.append(_carrier_fragment(t.iv_carriers[i], i))
    elif t.m > 0:
        j = t.joint
        assert j is not None
        entries.append(
            f'{{"n": {j.n}, "amps": [{_amps_body(j.amps)}], "block_index": 0, "mode": "m2"}}'
        )
    payload = ", ".join(entries)
    return (
        f'{{"mode": "{t.mode.value}", "n": {t.n}, "m": {t.m}, '
        f'"iv_public": false, "payload": [{payload}]}}'
    )


def transmission_from_json(text: str) -> Transmission:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid transmission JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"mode", "n", "m", "iv_public", "payload"}:
        raise InputError('transmission JSON needs exactly "mode", "n", "m", "iv_public", "payload"')
    if obj["iv_public"] is not False:
        raise InputError("the IV is key material; iv_public must be false")
    try:
        mode = Mode(obj["mode"])
    except ValueError as exc:
        raise InputError(f"unknown mode tag {obj['mode']!r}") from exc
    n, m = obj["n"], obj["m"]
    for name, v in (("n", n), ("m", m)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise InputError(f'transmission field "{name}" must be a nonnegative integer')
    payload = obj["payload"]
    if not isinstance(payload, list):
        raise InputError('"payload" must be a list')

    if mode is Mode.MEASURED:
        if len(payload) != 2 * m:
            raise InputError(f"expected {2 * m} payload entries, got {len(payload)}")
        blocks: list[CipherBlock] = []
        carriers: list[StateVector] = []
        for i in range(m):
            cb = cipherblock_from_obj(payload[2 * i])
            if cb.mode != "m1" or cb.block_index != i or cb.state.n != n:
                raise InputError(f"payload entry {2 * i} is not ciphertext block {i}")
            blocks.append(cb)
            carrier = cipherblock_from_obj(payload[2 * i + 1])
            if carrier.mode != "iv" or carrier.block_index != i or carrier.state.n != n:
                raise InputError(f"payload entry {2 * i + 1} is not IV carrier {i}")
            carriers.append(carrier.state)
        return Transmission(mode, n, m, tuple(blocks), tuple(carriers))

    if m == 0:
        if payload:
            raise InputError("empty transmission must have an empty payload")
        return Transmission(mode, n, 0)
    if len(payload) != 1:
        raise InputError("entangling transmissions carry exactly one payload entry")
    joint = cipherblock_from_obj(payload[0])
    if joint.mode != "m2" or joint.block_index != 0 or joint.state.n != m * n:
        raise InputError(f"payload entry is not a joint register of {m * n} qubits")
    return Transmission(mode, n, m, joint=joint.state)
