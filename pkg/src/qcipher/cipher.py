"""Single-block encryption and decryption."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError, IntegrityError
from .keyschedule import CipherKey, SingleU, inverse_circuit, key_circuit
from .statevector import (
    StateVector,
    _amps_body,
    _cnot_inplace,
    _single_inplace,
    _state_from_fields,
    basis_state,
    index_to_bits,
)

PURITY_TOL = 1e-9


@dataclass(frozen=True)
class PlainBlock:
    """One block of classical plaintext bits."""

    bits: str

    def __post_init__(self) -> None:
        if not self.bits or any(c not in "01" for c in self.bits):
            raise InputError(f"plaintext block must be a nonempty bitstring, got {self.bits!r}")

    @property
    def n(self) -> int:
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class CipherBlock:
    """A quantum ciphertext block plus its position and mode tag."""

    state: StateVector
    block_index: int = 0
    mode: str = "raw"


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise InputError(f"bitstring lengths differ: {len(a)} vs {len(b)}")
    return index_to_bits(int(a, 2) ^ int(b, 2), len(a))


def _apply_ops_inplace(amps: np.ndarray, n: int, ops, offset: int = 0) -> None:
    for op in ops:
        if isinstance(op, SingleU):
            _single_inplace(amps, n, op.qubit + offset, op.theta)
        else:
            _cnot_inplace(amps, n, op.control + offset, op.target + offset)


def apply_circuit(s: StateVector, ops, offset: int = 0) -> StateVector:
    """Apply a gate list in order; ``offset`` shifts all qubit indices."""
    out = s.amps.copy()
    _apply_ops_inplace(out, s.n, ops, offset)
    return StateVector(s.n, out)


def encode_plaintext(bits: str) -> StateVector:
    """Map classical bits onto the matching basis state."""
    return basis_state(len(bits), bits)


def encrypt_block(k: CipherKey, p: PlainBlock) -> CipherBlock:
    """Run the full key circuit on the encoded plaintext (deterministic)."""
    if p.n != k.n:
        raise InputError(f"plaintext length {p.n} does not match key block size {k.n}")
    state = apply_circuit(encode_plaintext(p.bits), key_circuit(k))
    return CipherBlock(state)


def _read_basis_bits(amps: np.ndarray, n: int, what: str = "post-inverse state") -> str:
    probs = np.abs(amps) ** 2
    index = int(np.argmax(probs))
    impurity = 1.0 - float(probs[index])
    if impurity > PURITY_TOL:
        raise IntegrityError(
            f"{what} is not a computational basis state (impurity {impurity:.3g}); "
            "tampering, corruption, or a wrong key"
        )
    return index_to_bits(index, n)


def decrypt_block(k: CipherKey, c: CipherBlock) -> PlainBlock:
    """Invert the key circuit and read the plaintext bits.

    The read is a deterministic argmax over probabilities plus a purity
    check: any residual superposition beyond PURITY_TOL signals tampering,
    corruption, or a wrong key and raises IntegrityError.
    """
    if c.state.n != k.n:
        raise InputError(f"ciphertext has {c.state.n} qubits, key expects {k.n}")
    out = c.state.amps.copy()
    _apply_ops_inplace(out, k.n, inverse_circuit(k))
    return PlainBlock(_read_basis_bits(out, k.n))


@dataclass(frozen=True)
class GateCounts:
    """Per-step gate counts of a key circuit."""

    step1: int
    step2: int
    step3: int
    step4: int

    @property
    def total(self) -> int:
        return self.step1 + self.step2 + self.step3 + self.step4


def gate_count(k: CipherKey) -> GateCounts:
    n = k.n
    return GateCounts(n, n - 1, len(k.step3_pairs), n if n % 2 == 0 else n - 1)


# ---------------------------------------------------------------------------
# CipherBlock serialization: the statevector file plus a metadata wrapper.

def cipherblock_to_json(c: CipherBlock) -> str:
    return (
        f'{{"n": {c.state.n}, "amps": [{_amps_body(c.state.amps)}], '
        f'"block_index": {c.block_index}, "mode": {json.dumps(c.mode)}}}'
    )


def cipherblock_from_obj(obj: object) -> CipherBlock:
    if not isinstance(obj, dict) or set(obj) != {"n", "amps", "block_index", "mode"}:
        raise InputError('cipher block JSON needs exactly "n", "amps", "block_index", "mode"')
    index = obj["block_index"]
    mode = obj["mode"]
    if not isinstance(index, int) or isinstance(index, bool) or index < 0:
        raise InputError('"block_index" must be a nonnegative integer')
    if not isinstance(mode, str):
        raise InputError('"mode" must be a string')
    return CipherBlock(_state_from_fields(obj["n"], obj["amps"]), index, mode)


def cipherblock_from_json(text: str) -> CipherBlock:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid cipher block JSON: {exc}") from exc
    return cipherblock_from_obj(obj)
