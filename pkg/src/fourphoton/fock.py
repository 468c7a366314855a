"""Creation-operator algebra for the pulsed down-conversion source.

Polynomials in photon creation operators are expanded and collected in exact
arithmetic.  Acting on the vacuum, a monomial ``prod_k (m_k^dag)^{n_k}`` is
the Fock state with squared norm ``prod_k n_k!``; that factor is what makes
post-selection weights physical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .exact import ExactComplex, Surd
from .qstate import ExactKet, PureState

MODE_NAMES = ("a", "b", "c", "d", "e", "f")
POLARIZATIONS = ("H", "V")

# a -> (c + e)/sqrt2, b -> (d + f)/sqrt2; no reflection phase.
DEFAULT_SPLITTERS = {"a": ("c", "e"), "b": ("d", "f")}
OUTPUT_ORDER = ("c", "d", "e", "f")


class ModeLabel(NamedTuple):
    name: str
    polarization: str

    def __str__(self):
        return f"{self.name}{self.polarization}"


def mode(name: str, polarization: str) -> ModeLabel:
    if name not in MODE_NAMES:
        raise ValueError(f"unknown mode {name!r}; expected one of {MODE_NAMES}")
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {polarization!r}")
    return ModeLabel(name, polarization)


# A monomial is a sorted tuple of (ModeLabel, occupation) pairs.
Monomial = tuple

_TOKEN = re.compile(r"^([a-z])([HV])(?:\^(\d+))?$")


def parse_monomial(text: str) -> Monomial:
    """``"aH^2 bH^2"`` or ``"aH*bH*aV*bV"`` -> canonical monomial."""
    counts: dict[ModeLabel, int] = {}
    for tok in re.split(r"[\s*]+", text.strip()):
        if not tok or tok == "1":
            continue
        m = _TOKEN.match(tok)
        if m is None:
            raise ValueError(f"cannot parse operator token {tok!r}")
        label = mode(m.group(1), m.group(2))
        counts[label] = counts.get(label, 0) + int(m.group(3) or 1)
    return make_monomial(counts)


def make_monomial(counts: Mapping[ModeLabel, int] | Iterable[tuple[ModeLabel, int]]) -> Monomial:
    items = counts.items() if isinstance(counts, Mapping) else counts
    merged: dict[ModeLabel, int] = {}
    for label, n in items:
        if n < 0:
            raise ValueError("occupation numbers must be non-negative")
        if n:
            merged[label] = merged.get(label, 0) + n
    return tuple(sorted(merged.items()))


def format_monomial(mono: Monomial) -> str:
    if not mono:
        return "1"
    return " ".join(f"{lab}^{n}" if n > 1 else str(lab) for lab, n in mono)


def _mul_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    return make_monomial(list(m1) + list(m2))


def monomial_norm_squared(mono: Monomial) -> int:
    """Squared norm of ``mono |0>`` for bosonic modes."""
    return math.prod(math.factorial(n) for _, n in mono)


class OperatorPolynomial:
    """Immutable formal sum of creation-operator monomials with exact coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | None = None):
        collected: dict[Monomial, ExactComplex] = {}
        for mono, coeff in (terms or {}).items():
            if isinstance(mono, str):
                mono = parse_monomial(mono)
            else:
                mono = make_monomial(mono)
            c = collected.get(mono, ExactComplex()) + ExactComplex.coerce(coeff)
            collected[mono] = c
        self._terms = {m: c for m, c in sorted(collected.items()) if c}

    @classmethod
    def generator(cls, label: ModeLabel) -> "OperatorPolynomial":
        return cls({((label, 1),): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __getitem__(self, mono) -> ExactComplex:
        if isinstance(mono, str):
            mono = parse_monomial(mono)
        return self._terms.get(make_monomial(mono), ExactComplex())

    def __eq__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __add__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        merged = dict(self._terms)
        for m, c in other._terms.items():
            merged[m] = merged.get(m, ExactComplex()) + c
        return OperatorPolynomial(merged)

    def __mul__(self, other):
        if not isinstance(other, OperatorPolynomial):
            c = ExactComplex.coerce(other)
            return OperatorPolynomial({m: v * c for m, v in self._terms.items()})
        out: dict[Monomial, ExactComplex] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                key = _mul_monomials(m1, m2)
                out[key] = out.get(key, ExactComplex()) + c1 * c2
        return OperatorPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "OperatorPolynomial":
        if k < 0:
            raise ValueError("negative powers are not defined")
        result = OperatorPolynomial({(): 1})
        for _ in range(k):
            result = result * self
        return result

    def modes(self) -> set[str]:
        return {lab.name for mono in self._terms for lab, _ in mono}

    def degrees(self) -> set[int]:
        return {sum(n for _, n in mono) for mono in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def norm_squared(self) -> Surd:
        """Squared norm of ``self |0>``; distinct monomials are orthogonal Fock states."""
        total = Surd()
        for mono, c in self._terms.items():
            total = total + c.abs2() * monomial_norm_squared(mono)
        return total

    def coefficient_weight(self) -> Surd:
        """Sum of squared coefficient moduli, ignoring bosonic factors."""
        total = Surd()
        for c in self._terms.values():
            total = total + c.abs2()
        return total

    def __repr__(self):
        body = ", ".join(f"{format_monomial(m)}: {c!r}" for m, c in self._terms.items())
        return f"OperatorPolynomial({{{body}}})"


def spdc_emission(order: int = 2) -> OperatorPolynomial:
    """``(aH bH + aV bV) ** order`` -- the pair-creation operator to a given order."""
    pair = OperatorPolynomial({"aH bH": 1, "aV bV": 1})
    return pair**order


def spdc_second_order() -> OperatorPolynomial:
    return spdc_emission(2)


def apply_beam_splitters(
    poly: OperatorPolynomial, splitters: Mapping[str, Sequence[str]] = DEFAULT_SPLITTERS
) -> OperatorPolynomial:
    """Substitute every input-mode operator by the balanced sum of its two outputs."""
    images: dict[ModeLabel, OperatorPolynomial] = {}
    half = Surd.inv_sqrt2()
    for name, outs in splitters.items():
        if len(outs) != 2:
            raise ValueError(f"splitter for {name!r} must have two output modes")
        for pol in POLARIZATIONS:
            images[ModeLabel(name, pol)] = OperatorPolynomial(
                {((mode(outs[0], pol), 1),): half, ((mode(outs[1], pol), 1),): half}
            )

    result = OperatorPolynomial()
    for mono, coeff in poly:
        term = OperatorPolynomial({(): coeff})
        for label, n in mono:
            if label not in images:
                raise ValueError(
                    f"mode {label.name!r} is not a beam-splitter input "
                    f"(inputs: {sorted(splitters)})"
                )
            term = term * images[label] ** n
        result = result + term
    return result


@dataclass(frozen=True, eq=False)
class PostSelection:
    """Conditional state plus the fraction of squared norm that survived."""

    state: PureState
    weight: Fraction | Surd

    def __iter__(self):
        yield self.state
        yield self.weight


def postselect_one_per_mode(poly: OperatorPolynomial, order: Sequence[str] = OUTPUT_ORDER) -> PostSelection:
    """Keep the terms with exactly one photon in each listed mode.

    The surviving terms become a polarization qubit state over ``order``
    (bit 0 = H, bit 1 = V).
    """
    order = tuple(order)
    if not poly.is_homogeneous() or poly.degrees() - {len(order)}:
        raise ValueError(
            f"post-selection onto {len(order)} modes needs a homogeneous polynomial "
            f"of degree {len(order)}, got degrees {sorted(poly.degrees())}"
        )
    amps = [ExactComplex() for _ in range(2 ** len(order))]
    kept = False
    for mono, coeff in poly:
        names = [lab.name for lab, _ in mono]
        if any(n != 1 for _, n in mono) or sorted(names) != sorted(order):
            continue
        pol_of = {lab.name: lab.polarization for lab, _ in mono}
        idx = int("".join("0" if pol_of[m] == "H" else "1" for m in order), 2)
        amps[idx] = amps[idx] + coeff
        kept = True
    if not kept or not any(amps):
        raise ValueError("post-selection annihilates state")
    ket = ExactKet(tuple(amps))
    weight = ket.norm_squared() / poly.norm_squared()
    return PostSelection(
        PureState.from_exact(order, ket),
        weight.to_fraction() if weight.is_rational else weight,
    )


def four_photon_state() -> PureState:
    """Post-selected fourfold-coincidence state over modes (c, d, e, f)."""
    return postselect_one_per_mode(apply_beam_splitters(spdc_second_order())).state


def ghz_state(mode_order: Sequence[str] = ("c", "e", "d", "f")) -> PureState:
    n = len(mode_order)
    h = Surd.inv_sqrt2()
    amps = [0] * 2**n
    amps[0] = h
    amps[-1] = h
    return PureState.from_exact(tuple(mode_order), ExactKet(tuple(amps)))


def epr_psi_plus_pair(mode_order: Sequence[str] = ("c", "e", "d", "f")) -> PureState:
    """``|Psi+>`` on the first two modes times ``|Psi+>`` on the last two."""
    half = Fraction(1, 2)
    amps = [0] * 16
    for first in ("01", "10"):
        for second in ("01", "10"):
            amps[int(first + second, 2)] = half
    return PureState.from_exact(tuple(mode_order), ExactKet(tuple(amps)))


class GhzEprOverlap(NamedTuple):
    ghz_amplitude: complex
    epr_amplitude: complex
    residual_norm: float


def ghz_epr_decompose(state: PureState) -> GhzEprOverlap:
    """Overlaps with ``|GHZ>_cedf`` and ``|Psi+>_ce (x) |Psi+>_df`` plus the leftover norm."""
    if state.n_qubits != 4:
        raise ValueError(f"decomposition needs a 4-mode state, got {state.n_qubits} modes")
    if set(state.mode_order) != set(OUTPUT_ORDER):
        raise ValueError(f"state must be over modes {OUTPUT_ORDER}, got {state.mode_order}")
    psi = state.reorder(("c", "e", "d", "f"))
    ghz = ghz_state()
    epr = epr_psi_plus_pair()
    g = complex(np.vdot(ghz.amplitudes, psi.amplitudes))
    e = complex(np.vdot(epr.amplitudes, psi.amplitudes))
    residual = psi.amplitudes - g * ghz.amplitudes - e * epr.amplitudes
    return GhzEprOverlap(g, e, float(np.linalg.norm(residual)))
