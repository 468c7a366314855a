"""Four-party communication complexity game played with a shared photon state.

Parties A, B, C, D each get a 2-bit number (X, Y, Z, K) with an even sum,
hold the photon in mode c, d, e, f respectively, rotate it according to
their low bit, measure H/V and broadcast ``high_bit XOR outcome``.  Every
party decodes F as the XOR of the four broadcast bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from ._validation import check_bits, check_seed
from .exact import Surd
from .qstate import (
    HV_BASIS,
    ExactKet,
    LocalUnitary,
    NoisyState,
    PureState,
    StateLike,
    _apply_exact,
    apply_locals,
    as_noisy,
    born_distribution,
    outcome_label,
    parity,
    rotation_rx,
    rotation_ry,
)

PARTIES = ("A", "B", "C", "D")
PARTY_MODES = ("c", "d", "e", "f")

# Report row order: the two F0 = 0 patterns first, then the F0 = 1 patterns.
LOW_BIT_PATTERNS = ("0000", "1111", "0011", "1100", "0110", "1001", "0101", "1010")


class PromiseViolation(ValueError):
    """Inputs whose sum is odd; the target function is not defined there."""


@dataclass(frozen=True)
class PartyInput:
    high: int
    low: int

    def __post_init__(self):
        if self.high not in (0, 1) or self.low not in (0, 1):
            raise ValueError(f"party input bits must be 0/1, got {self.high}, {self.low}")

    @classmethod
    def from_value(cls, value: int) -> "PartyInput":
        if value not in (0, 1, 2, 3):
            raise ValueError(f"party input must be in 0..3, got {value!r}")
        return cls(value >> 1, value & 1)

    @property
    def value(self) -> int:
        return 2 * self.high + self.low


@dataclass(frozen=True)
class QccsInputs:
    """The four parties' inputs, A..D.  ``strict`` enforces the even-sum promise."""

    parties: tuple
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        parties = tuple(
            p if isinstance(p, PartyInput) else PartyInput.from_value(int(p)) for p in self.parties
        )
        if len(parties) != 4:
            raise ValueError(f"need four party inputs, got {len(parties)}")
        object.__setattr__(self, "parties", parties)
        if self.strict and sum(p.value for p in parties) % 2:
            raise PromiseViolation(f"inputs {self.values} violate the even-sum promise")

    @classmethod
    def from_values(cls, x: int, y: int, z: int, k: int, strict: bool = True) -> "QccsInputs":
        return cls((x, y, z, k), strict)

    @classmethod
    def from_bits(cls, high_bits, low_bits, strict: bool = True) -> "QccsInputs":
        hi, lo = check_bits(high_bits, 4), check_bits(low_bits, 4)
        return cls(tuple(PartyInput(h, l) for h, l in zip(hi, lo)), strict)

    @property
    def values(self) -> tuple:
        return tuple(p.value for p in self.parties)

    @property
    def high_bits(self) -> tuple:
        return tuple(p.high for p in self.parties)

    @property
    def low_bits(self) -> tuple:
        return tuple(p.low for p in self.parties)

    @property
    def low_pattern(self) -> str:
        return "".join(map(str, self.low_bits))


InputsLike = Union[QccsInputs, Sequence[int]]


def _values(inputs: InputsLike) -> tuple:
    if isinstance(inputs, QccsInputs):
        return inputs.values
    vals = tuple(int(v) for v in inputs)
    if len(vals) != 4 or any(v not in (0, 1, 2, 3) for v in vals):
        raise ValueError(f"expected four inputs in 0..3, got {inputs!r}")
    return vals


def promise_holds(inputs: InputsLike) -> bool:
    return sum(_values(inputs)) % 2 == 0


def target_f(inputs: InputsLike) -> int:
    """``F = ((X + Y + Z + K) mod 4) / 2``."""
    vals = _values(inputs)
    if sum(vals) % 2:
        raise PromiseViolation(f"inputs {vals} have an odd sum; F is not an integer")
    return (sum(vals) % 4) // 2


def f0(low_bits) -> int:
    """Low-bit part of F: 0 for 0000 and 1111, 1 for the other even patterns."""
    bits = check_bits(low_bits, 4)
    if sum(bits) % 2:
        raise PromiseViolation(f"low-bit pattern {bits} has odd parity")
    return (sum(bits) % 4) // 2


def decompose_f(inputs: InputsLike) -> tuple[int, int]:
    """``(x1 ^ y1 ^ z1 ^ k1, F0)``; their XOR is ``target_f(inputs)``."""
    vals = _values(inputs)
    if sum(vals) % 2:
        raise PromiseViolation(f"inputs {vals} violate the even-sum promise")
    high = 0
    for v in vals:
        high ^= v >> 1
    low = f0([v & 1 for v in vals])
    if high ^ low != target_f(vals):
        raise AssertionError(f"decomposition failed for {vals}")
    return high, low


def all_promise_inputs() -> list[tuple]:
    """The 128 input tuples with an even sum, in lexicographic order."""
    return [v for v in itertools.product(range(4), repeat=4) if sum(v) % 2 == 0]


def assign_rotations(low_bits) -> list[LocalUnitary]:
    """R(x) for a 0 low bit, R(y) for a 1, parties in A..D order."""
    return [rotation_ry() if b else rotation_rx() for b in check_bits(low_bits, 4)]


def _rotated_probabilities(state: StateLike, low_bits):
    """H/V outcome probabilities after the parties' rotations.

    Returns ``(exact_or_None, float_array)``; ``exact`` is a list of Surd and
    is only available for an exactly known, noise-free state.
    """
    noisy = as_noisy(state)
    if noisy.n_qubits != 4:
        raise ValueError(f"protocol needs a 4-mode state, got {noisy.n_qubits}")
    bits = check_bits(low_bits, 4)
    pure = noisy.pure
    rotated = apply_locals(PureState(pure.mode_order, pure.amplitudes), assign_rotations(bits))
    floats = born_distribution(NoisyState(rotated, noisy.weight), HV_BASIS).probabilities
    exact = None
    if pure.exact is not None and noisy.weight == 1.0:
        exact = _exact_rotated_probabilities(pure.exact, bits)
    return exact, floats


@lru_cache(maxsize=256)
def _exact_rotated_probabilities(ket: ExactKet, bits: tuple) -> tuple:
    # Surd arithmetic dominates the protocol's cost; a ket/pattern pair is
    # evaluated once and shared by every high-bit assignment.
    return tuple(_apply_exact(ket, assign_rotations(bits)).probabilities())


def _as_exact(value: Surd):
    return value.to_fraction() if value.is_rational else value


def success_probability(inputs: QccsInputs, state: StateLike):
    """P(decoded F equals the true F) for specific inputs, high bits included."""
    vals = inputs.values if isinstance(inputs, QccsInputs) else _values(inputs)
    target = target_f(vals)
    high = 0
    for v in vals:
        high ^= v >> 1
    exact, floats = _rotated_probabilities(state, [v & 1 for v in vals])
    winners = [idx for idx in range(16) if high ^ parity(idx) == target]
    if exact is not None:
        total = Surd()
        for idx in winners:
            total = total + exact[idx]
        return _as_exact(total)
    return float(floats[winners].sum())


def quantum_success_probability(low_bits, state: StateLike):
    """Success probability for a low-bit pattern: P(outcome parity == F0).

    Exact (``Fraction``) when the state carries an exact form and no noise,
    otherwise a float.
    """
    bits = check_bits(low_bits, 4)
    return success_probability(QccsInputs.from_bits((0, 0, 0, 0), bits), state)


def success_components(low_bits) -> tuple:
    """All outcome labels whose parity equals F0, i.e. the outcomes that decode correctly."""
    target = f0(low_bits)
    return tuple(outcome_label(i, 4) for i in range(16) if parity(i) == target)


def success_support(low_bits, state: StateLike, tol: float = 1e-12) -> tuple:
    """The winning outcomes that actually occur (non-zero probability) for ``state``."""
    _, floats = _rotated_probabilities(state, low_bits)
    return tuple(lab for lab in success_components(low_bits) if floats[int(lab, 2)] > tol)


def average_success(state: StateLike):
    """Mean success over the eight low-bit patterns, each equally likely."""
    probs = [quantum_success_probability(p, state) for p in LOW_BIT_PATTERNS]
    if all(isinstance(p, Fraction) for p in probs):
        return sum(probs, Fraction(0)) / len(probs)
    return float(np.mean([float(p) for p in probs]))


def two_epr_state() -> PureState:
    """``|Phi+>_cd (x) |Phi+>_ef`` -- A,B share one pair and C,D the other."""
    half = Fraction(1, 2)
    amps = [0] * 16
    for label in ("0000", "0011", "1100", "1111"):
        amps[int(label, 2)] = half
    return PureState.from_exact(PARTY_MODES, ExactKet(tuple(amps)))


@dataclass(frozen=True)
class TrialRecord:
    inputs: QccsInputs
    measured: tuple
    broadcasts: tuple
    decoded: int
    correct: bool


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    """Vectorised record of ``n`` protocol rounds with fixed inputs."""

    inputs: QccsInputs
    outcomes: np.ndarray
    target: int

    @property
    def n(self) -> int:
        return int(self.outcomes.size)

    @property
    def measured(self) -> np.ndarray:
        shifts = np.arange(3, -1, -1)
        return (self.outcomes[:, None] >> shifts) & 1

    @property
    def broadcasts(self) -> np.ndarray:
        return self.measured ^ np.array(self.inputs.high_bits)

    @property
    def decoded(self) -> np.ndarray:
        return np.bitwise_xor.reduce(self.broadcasts, axis=1)

    @property
    def correct(self) -> np.ndarray:
        return self.decoded == self.target

    @property
    def success_rate(self) -> float:
        return float(self.correct.mean())

    @property
    def std_error(self) -> float:
        p = self.success_rate
        return float(np.sqrt(p * (1 - p) / self.n))

    def records(self) -> Iterator[TrialRecord]:
        for m, b, f, ok in zip(self.measured, self.broadcasts, self.decoded, self.correct):
            yield TrialRecord(self.inputs, tuple(int(v) for v in m), tuple(int(v) for v in b), int(f), bool(ok))


def run_protocol_trials(inputs: QccsInputs, state: StateLike, n: int, seed=0) -> ProtocolRun:
    """Sample ``n`` rounds of measurement, broadcast and decoding."""
    if not isinstance(inputs, QccsInputs):
        inputs = QccsInputs(tuple(inputs))
    if int(n) != n or n < 1:
        raise ValueError(f"trial count must be a positive integer, got {n!r}")
    _, p = _rotated_probabilities(state, inputs.low_bits)
    rng = np.random.default_rng(seed if isinstance(seed, np.random.SeedSequence) else check_seed(seed))
    outcomes = rng.choice(16, size=int(n), p=p / p.sum())
    return ProtocolRun(inputs, outcomes, target_f(inputs))


@dataclass(frozen=True)
class CaseReport:
    pattern: str
    rotations: tuple
    f0: int
    probability: object
    components: tuple
    support: tuple
    mc_rate: float | None = None
    mc_error: float | None = None

    @property
    def p_exact(self) -> Fraction | None:
        return self.probability if isinstance(self.probability, Fraction) else None

    def as_row(self) -> dict:
        exact = self.p_exact
        return {
            "pattern": self.pattern,
            "rotations": " x ".join(self.rotations),
            "f0": self.f0,
            "p_exact_num": exact.numerator if exact is not None else "",
            "p_exact_den": exact.denominator if exact is not None else "",
            "p": float(self.probability),
            "p_mc": self.mc_rate if self.mc_rate is not None else "",
            "p_mc_err": self.mc_error if self.mc_error is not None else "",
            "components": " ".join(self.components),
            "support": " ".join(self.support),
        }


def case_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent per-case stream derived from one user seed."""
    return np.random.SeedSequence(check_seed(seed), spawn_key=(index,))


def case_report(pattern: str, state: StateLike, trials: int = 0, seed=0, strict: bool = True) -> CaseReport:
    bits = check_bits(pattern, 4)
    pattern = "".join(map(str, bits))
    mc_rate = mc_error = None
    if trials:
        inputs = QccsInputs.from_bits((0, 0, 0, 0), bits, strict=strict)
        run = run_protocol_trials(inputs, state, trials, seed)
        mc_rate, mc_error = run.success_rate, run.std_error
    return CaseReport(
        pattern=pattern,
        rotations=tuple(u.name for u in assign_rotations(bits)),
        f0=f0(bits),
        probability=quantum_success_probability(bits, state),
        components=success_components(bits),
        support=success_support(bits, state),
        mc_rate=mc_rate,
        mc_error=mc_error,
    )


def table_one(state: StateLike, trials: int = 0, seed: int = 0, strict: bool = True) -> list[CaseReport]:
    """One report per low-bit pattern, in ``LOW_BIT_PATTERNS`` order.

    Monte Carlo rows (``trials > 0``) use zero high bits; the success
    probability does not depend on them.
    """
    return [
        case_report(p, state, trials, case_seed(seed, i), strict)
        for i, p in enumerate(LOW_BIT_PATTERNS)
    ]
