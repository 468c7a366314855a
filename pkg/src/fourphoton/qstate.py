"""Dense n-qubit polarization states, local unitaries and Born-rule statistics.

Index convention: the first entry of ``mode_order`` is the most significant
bit of an outcome index, and bit value 0 is H, 1 is V.  Outcome ``k`` of a
measurement basis is the ``k``-th column of the basis matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from ._validation import check_mode_order, check_probability_weight
from .exact import ExactComplex, Surd

NORM_TOL = 1e-12
SUM_TOL = 1e-9


def outcome_label(index: int, n: int, symbols: Sequence[str] = ("0", "1")) -> str:
    bits = format(index, f"0{n}b")
    return "".join(symbols[int(b)] for b in bits)


def label_to_index(label: str, symbols: Sequence[str] = ("0", "1")) -> int:
    lookup = {s: i for i, s in enumerate(symbols)}
    lookup.update({"0": 0, "1": 1, "H": 0, "V": 1})
    try:
        bits = [lookup[ch] for ch in label]
    except KeyError:
        raise ValueError(f"unrecognised outcome label {label!r}") from None
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    return idx


def parity(index: int) -> int:
    return bin(index).count("1") & 1


@dataclass(frozen=True, eq=False)
class ExactKet:
    """Unnormalised amplitude vector with entries in Q(sqrt2)[i].

    The physical state is ``amplitudes / sqrt(norm_squared())``; keeping the
    normalisation implicit lets states such as ``(...)/sqrt(3)`` stay exact.
    """

    amplitudes: tuple

    def __post_init__(self):
        amps = tuple(ExactComplex.coerce(a) for a in self.amplitudes)
        n = len(amps).bit_length() - 1
        if len(amps) == 0 or 1 << n != len(amps):
            raise ValueError(f"amplitude count {len(amps)} is not a power of two")
        if not any(amps):
            raise ValueError("exact ket is identically zero")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.amplitudes).bit_length() - 1

    def norm_squared(self) -> Surd:
        total = Surd()
        for a in self.amplitudes:
            total = total + a.abs2()
        return total

    def probabilities(self) -> list[Surd]:
        """Computational-basis Born probabilities, exactly."""
        norm = self.norm_squared()
        return [a.abs2() / norm for a in self.amplitudes]

    def to_numpy(self) -> np.ndarray:
        vec = np.array([complex(a) for a in self.amplitudes], dtype=complex)
        return vec / np.sqrt(float(self.norm_squared()))


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalised pure state over named polarization modes.

    ``exact`` optionally carries the same state in exact arithmetic; the
    floating amplitudes are always present and are what most callers use.
    """

    mode_order: tuple
    amplitudes: np.ndarray
    exact: ExactKet | None = None

    def __post_init__(self):
        order = check_mode_order(self.mode_order)
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != 2 ** len(order):
            raise ValueError(
                f"{len(order)} modes need {2 ** len(order)} amplitudes, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm = {norm!r})")
        if self.exact is not None and self.exact.n_qubits != len(order):
            raise ValueError("exact ket does not match the mode count")
        amps.setflags(write=False)
        object.__setattr__(self, "mode_order", order)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, mode_order, amplitudes, normalize: bool = True):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalise a zero vector")
            amps = amps / norm
        return cls(tuple(mode_order), amps)

    @classmethod
    def from_exact(cls, mode_order, ket: ExactKet) -> "PureState":
        if not isinstance(ket, ExactKet):
            ket = ExactKet(tuple(ket))
        return cls(tuple(mode_order), ket.to_numpy(), ket)

    @classmethod
    def basis_state(cls, mode_order, label: str) -> "PureState":
        order = tuple(mode_order)
        if len(label) != len(order):
            raise ValueError(f"label {label!r} does not match {len(order)} modes")
        idx = label_to_index(label)
        amps = [0] * (2 ** len(order))
        amps[idx] = 1
        return cls.from_exact(order, ExactKet(tuple(amps)))

    @property
    def n_qubits(self) -> int:
        return len(self.mode_order)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[label_to_index(label)])

    def with_phase(self, alpha: float) -> "PureState":
        """Same ray, amplitudes multiplied by ``exp(i*alpha)``; exact form dropped."""
        return PureState(self.mode_order, self.amplitudes * np.exp(1j * alpha))

    def reorder(self, new_order: Sequence[str]) -> "PureState":
        """Permute tensor factors so that modes appear in ``new_order``."""
        new_order = tuple(new_order)
        if sorted(new_order) != sorted(self.mode_order):
            raise ValueError(f"{new_order} is not a permutation of {self.mode_order}")
        perm = [self.mode_order.index(m) for m in new_order]
        n = self.n_qubits
        tensor = self.amplitudes.reshape((2,) * n).transpose(perm)
        exact = None
        if self.exact is not None:
            src = self.exact.amplitudes
            out = [None] * len(src)
            for idx in range(len(src)):
                bits = format(idx, f"0{n}b")
                new_bits = "".join(bits[p] for p in perm)
                out[int(new_bits, 2)] = src[idx]
            exact = ExactKet(tuple(out))
        return PureState(new_order, tensor.reshape(-1), exact)

    def inner(self, other: "PureState") -> complex:
        """``<other|self>`` after aligning ``other`` to this state's mode order."""
        if other.mode_order != self.mode_order:
            other = other.reorder(self.mode_order)
        return complex(np.vdot(other.amplitudes, self.amplitudes))


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """A 2x2 unitary acting on one polarization qubit."""

    matrix: np.ndarray
    exact: tuple | None = None
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"local unitary must be 2x2, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if err > NORM_TOL:
            raise ValueError(f"matrix is not unitary (max deviation {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.exact is not None:
            entries = tuple(ExactComplex.coerce(x) for x in self.exact)
            if len(entries) != 4:
                raise ValueError("exact entries must be given row-major, 4 values")
            object.__setattr__(self, "exact", entries)

    @classmethod
    def identity(cls) -> "LocalUnitary":
        return cls(np.eye(2), (1, 0, 0, 1), "I")

    def __matmul__(self, other: "LocalUnitary") -> "LocalUnitary":
        exact = None
        if self.exact is not None and other.exact is not None:
            a, b, c, d = self.exact
            e, f, g, h = other.exact
            exact = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return LocalUnitary(self.matrix @ other.matrix, exact)

    def __repr__(self):
        return f"LocalUnitary({self.name or self.matrix.tolist()})"


def rotation_rx() -> LocalUnitary:
    """``(1/sqrt2) [[1, 1], [1, -1]]``, applied by a party whose low bit is 0."""
    h = Surd.inv_sqrt2()
    return LocalUnitary(
        np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
        (h, h, h, -h),
        "R(x)",
    )


def rotation_ry() -> LocalUnitary:
    """``(1/sqrt2) [[1, i], [i, 1]]``, applied by a party whose low bit is 1."""
    h = ExactComplex(Surd.inv_sqrt2())
    ih = ExactComplex(Surd(), Surd.inv_sqrt2())
    return LocalUnitary(
        np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2),
        (h, ih, ih, h),
        "R(y)",
    )


def _apply_exact(ket: ExactKet, ops: Sequence[LocalUnitary]) -> ExactKet:
    amps = list(ket.amplitudes)
    n = ket.n_qubits
    for k, op in enumerate(ops):
        u00, u01, u10, u11 = op.exact
        shift = n - 1 - k
        for idx in range(len(amps)):
            if (idx >> shift) & 1:
                continue
            j = idx | (1 << shift)
            a0, a1 = amps[idx], amps[j]
            if not a0 and not a1:
                continue
            amps[idx] = u00 * a0 + u01 * a1
            amps[j] = u10 * a0 + u11 * a1
    return ExactKet(tuple(amps))


def _apply_matrices(amplitudes: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    n = len(mats)
    tensor = amplitudes.reshape((2,) * n)
    for k, m in enumerate(mats):
        tensor = np.moveaxis(np.tensordot(m, tensor, axes=([1], [k])), 0, k)
    return tensor.reshape(-1)


def apply_locals(state: PureState, ops: Sequence[LocalUnitary]) -> PureState:
    """Apply ``ops[0] (x) ops[1] (x) ...`` with ``ops[k]`` acting on ``mode_order[k]``."""
    ops = list(ops)
    if len(ops) != state.n_qubits:
        raise ValueError(f"need {state.n_qubits} local unitaries, got {len(ops)}")
    for op in ops:
        if not isinstance(op, LocalUnitary):
            raise TypeError(f"expected LocalUnitary, got {type(op).__name__}")
    amps = _apply_matrices(state.amplitudes, [op.matrix for op in ops])
    exact = None
    if state.exact is not None and all(op.exact is not None for op in ops):
        exact = _apply_exact(state.exact, ops)
    return PureState(state.mode_order, amps, exact)


@dataclass(frozen=True, eq=False)
class NoisyState:
    """``weight * |psi><psi| + (1 - weight) * I / 2**n``."""

    pure: PureState
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "weight", check_probability_weight(self.weight))

    @property
    def mode_order(self) -> tuple:
        return self.pure.mode_order

    @property
    def n_qubits(self) -> int:
        return self.pure.n_qubits

    def density_matrix(self) -> np.ndarray:
        psi = self.pure.amplitudes
        dim = psi.size
        return self.weight * np.outer(psi, psi.conj()) + (1 - self.weight) * np.eye(dim) / dim


def mix_with_white_noise(state: PureState, weight: float) -> NoisyState:
    """Synthetic degradation model: admix the maximally mixed state."""
    return NoisyState(state, weight)


StateLike = Union[PureState, NoisyState]


def as_noisy(state: StateLike) -> NoisyState:
    return state if isinstance(state, NoisyState) else NoisyState(state, 1.0)


HV_BASIS = np.eye(2, dtype=complex)
PM_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def check_basis(basis) -> np.ndarray:
    b = np.asarray(basis, dtype=complex)
    if b.shape != (2, 2):
        raise ValueError(f"a measurement basis is a 2x2 matrix of column vectors, got {b.shape}")
    err = np.max(np.abs(b.conj().T @ b - np.eye(2)))
    if err > NORM_TOL:
        raise ValueError(f"measurement basis is not orthonormal (deviation {err:.3g})")
    return b


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Born probabilities over the ``2**n`` joint outcomes."""

    mode_order: tuple
    probabilities: np.ndarray
    symbols: tuple = ("0", "1")

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float).ravel()
        order = tuple(self.mode_order)
        if p.size != 2 ** len(order):
            raise ValueError("probability table size does not match the mode count")
        if np.any(p < -SUM_TOL) or np.any(p > 1 + SUM_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "mode_order", order)
        object.__setattr__(self, "symbols", tuple(self.symbols))

    @property
    def n_qubits(self) -> int:
        return len(self.mode_order)

    def labels(self) -> list[str]:
        return [outcome_label(i, self.n_qubits, self.symbols) for i in range(self.probabilities.size)]

    def __getitem__(self, label: str) -> float:
        return float(self.probabilities[label_to_index(label, self.symbols)])

    def as_dict(self) -> dict:
        return dict(zip(self.labels(), self.probabilities.tolist()))

    def parity_probability(self, value: int) -> float:
        mask = np.array([parity(i) == value for i in range(self.probabilities.size)])
        return float(self.probabilities[mask].sum())


def born_distribution(state: StateLike, bases, symbols=("0", "1")) -> OutcomeDistribution:
    """Joint outcome probabilities with ``bases[k]`` measured on ``mode_order[k]``.

    ``bases`` is one 2x2 matrix per mode (columns are the outcome vectors) or
    a single matrix used for every mode.
    """
    noisy = as_noisy(state)
    n = noisy.n_qubits
    b = np.asarray(bases, dtype=complex)
    mats = [b] * n if b.shape == (2, 2) else list(bases)
    if len(mats) != n:
        raise ValueError(f"need {n} measurement bases, got {len(mats)}")
    mats = [check_basis(m).conj().T for m in mats]
    amps = _apply_matrices(noisy.pure.amplitudes, mats)
    p = np.abs(amps) ** 2
    p = noisy.weight * p + (1.0 - noisy.weight) / p.size
    return OutcomeDistribution(noisy.mode_order, p / p.sum(), symbols)


def exact_computational_probabilities(state: PureState) -> list[Fraction | Surd]:
    """Exact H/V-basis probabilities; rational entries returned as Fraction."""
    if state.exact is None:
        raise ValueError("state carries no exact representation")
    return [p.to_fraction() if p.is_rational else p for p in state.exact.probabilities()]
