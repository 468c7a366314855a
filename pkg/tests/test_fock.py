import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from fourphoton.exact import Surd
from fourphoton.fock import (
    OperatorPolynomial,
    apply_beam_splitters,
    epr_psi_plus_pair,
    ghz_epr_decompose,
    ghz_state,
    postselect_one_per_mode,
    spdc_emission,
    spdc_second_order,
)
from fourphoton.qstate import PureState

FOUR_PHOTON_LABELS = ("0000", "0011", "0110", "1001", "1100", "1111")  # HHHH HHVV HVVH VHHV VVHH VVVV
FOUR_PHOTON_RATIOS = {"0000": 1, "0011": Fraction(1, 2), "0110": Fraction(1, 2),
              "1001": Fraction(1, 2), "1100": Fraction(1, 2), "1111": 1}


def branch_oracle(pair_terms):
    """Independent enumeration of every substitution branch.

    ``pair_terms`` is a list of (coefficient, [ (mode, pol), ... ]) creation
    strings on modes a/b.  Each a goes to c or e, each b to d or f, weight
    1/sqrt2 per operator; returns one-per-mode amplitudes over (c,d,e,f)
    with the 1/sqrt2 factors collected as a power of 1/2 (every string here
    has an even number of operators).
    """
    amps = {}
    for coeff, ops in pair_terms:
        targets = [("c", "e") if m == "a" else ("d", "f") for m, _ in ops]
        for choice in itertools.product(*targets):
            if sorted(choice) != ["c", "d", "e", "f"]:
                continue
            pol = {mode: ops[k][1] for k, mode in enumerate(choice)}
            label = "".join("0" if pol[m] == "H" else "1" for m in "cdef")
            amps[label] = amps.get(label, 0) + Fraction(coeff) * Fraction(1, 2 ** (len(ops) // 2))
    return amps


def test_second_order_expansion():
    p = spdc_second_order()
    assert len(p) == 3
    assert p["aH^2 bH^2"] == 1
    assert p["aV^2 bV^2"] == 1
    assert p["aH bH aV bV"] == 2


def test_first_order_expansion():
    p = spdc_emission(1)
    assert p == OperatorPolynomial({"aH bH": 1, "aV bV": 1})


def test_coefficient_weight_is_six():
    assert spdc_second_order().coefficient_weight() == 6


def test_monomials_are_canonical():
    p = OperatorPolynomial({"bH aH": 1, "aH*bH": 2})
    assert len(p) == 1
    assert p["aH bH"] == 3
    assert OperatorPolynomial({"aH": 1, "aH ": -1}) == OperatorPolynomial()


def test_substitution_single_pair():
    out = apply_beam_splitters(OperatorPolynomial({"aH bH": 1}))
    half = Fraction(1, 2)
    assert out == OperatorPolynomial({"cH dH": half, "cH fH": half, "eH dH": half, "eH fH": half})


def test_substitution_empty():
    assert apply_beam_splitters(OperatorPolynomial()) == OperatorPolynomial()


def test_substitution_rejects_unknown_mode():
    with pytest.raises(ValueError, match="not a beam-splitter input"):
        apply_beam_splitters(OperatorPolynomial({"cH dH": 1}))


@pytest.mark.parametrize(
    "poly",
    [
        OperatorPolynomial({"aH bH": 1}),
        OperatorPolynomial({"aH bH": 1, "aV bV": 1}),
        OperatorPolynomial({"aH bV": 3, "aV bH": -2}),
        OperatorPolynomial({"aH aV": 1}),
    ],
)
def test_substitution_preserves_norm_degree_two(poly):
    assert apply_beam_splitters(poly).norm_squared() == poly.norm_squared()


def test_substitution_preserves_norm_second_order():
    p = spdc_second_order()
    assert p.norm_squared() == 12  # 2!2! + 2!2! + 2^2
    assert apply_beam_splitters(p).norm_squared() == 12


def test_pipeline_matches_branch_oracle():
    oracle = branch_oracle(
        [
            (1, [("a", "H"), ("a", "H"), ("b", "H"), ("b", "H")]),
            (1, [("a", "V"), ("a", "V"), ("b", "V"), ("b", "V")]),
            (2, [("a", "H"), ("b", "H"), ("a", "V"), ("b", "V")]),
        ]
    )
    assert oracle == FOUR_PHOTON_RATIOS
    sel = postselect_one_per_mode(apply_beam_splitters(spdc_second_order()))
    ket = sel.state.exact
    for idx, amp in enumerate(ket.amplitudes):
        label = format(idx, "04b")
        assert amp == oracle.get(label, 0)


def test_four_photon_state_normalised():
    sel = postselect_one_per_mode(apply_beam_splitters(spdc_second_order()))
    state = sel.state
    assert state.exact.norm_squared() == 3
    probs = state.exact.probabilities()
    assert probs[0b0000] == Fraction(1, 3)
    assert probs[0b0011] == Fraction(1, 12)
    assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-12
    assert state.amplitude("HHHH") == pytest.approx(1 / np.sqrt(3), abs=1e-15)
    assert state.amplitude("HHVV") == pytest.approx(1 / (2 * np.sqrt(3)), abs=1e-15)
    assert sel.weight == Fraction(1, 4)


def test_single_term_postselection_weight():
    # oracle: a^2 b^2 |0> has squared norm 2!2! = 4; branches a->(c,e) or (e,c)
    # and b->(d,f) or (f,d) give 4 * (1/sqrt2)^4 = 1 on |HHHH>
    oracle = branch_oracle([(1, [("a", "H"), ("a", "H"), ("b", "H"), ("b", "H")])])
    assert oracle == {"0000": 1}
    sel = postselect_one_per_mode(apply_beam_splitters(OperatorPolynomial({"aH^2 bH^2": 1})))
    assert abs(sel.state.amplitude("HHHH")) == pytest.approx(1.0)
    assert sel.weight == Fraction(oracle["0000"] ** 2, 4)


def test_postselection_annihilation():
    # both photons of each pair in the same input mode never reach all four outputs
    poly = apply_beam_splitters(OperatorPolynomial({"aH^2 aV^2": 1}))
    with pytest.raises(ValueError, match="annihilates"):
        postselect_one_per_mode(poly)


def test_postselection_degree_mismatch():
    with pytest.raises(ValueError):
        postselect_one_per_mode(apply_beam_splitters(spdc_emission(1)))


def test_decomposition_of_four_photon_state(psi4):
    g, e, r = ghz_epr_decompose(psi4)
    assert abs(g - np.sqrt(2 / 3)) < 1e-12
    assert abs(e - np.sqrt(1 / 3)) < 1e-12
    assert r < 1e-12


def test_decomposition_of_ghz():
    g, e, r = ghz_epr_decompose(ghz_state(("c", "d", "e", "f")))
    assert abs(g - 1) < 1e-12 and abs(e) < 1e-12 and r < 1e-12


def test_decomposition_of_basis_state():
    g, e, r = ghz_epr_decompose(PureState.basis_state("cdef", "HHHV"))
    assert abs(g) < 1e-12 and abs(e) < 1e-12 and abs(r - 1) < 1e-12


def test_decomposition_wrong_size():
    with pytest.raises(ValueError):
        ghz_epr_decompose(PureState.basis_state("cde", "HHH"))


def test_references_orthogonal():
    assert abs(ghz_state().inner(epr_psi_plus_pair())) < 1e-15


def test_decomposition_norm_budget(psi4):
    rng = np.random.default_rng(11)
    for _ in range(50):
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        s = PureState.from_amplitudes("cdef", v)
        g, e, r = ghz_epr_decompose(s)
        assert abs(abs(g) ** 2 + abs(e) ** 2 + r**2 - 1) < 1e-12


def test_reconstruction_fidelity(psi4):
    g, e, _ = ghz_epr_decompose(psi4)
    rebuilt = g * ghz_state().amplitudes + e * epr_psi_plus_pair().amplitudes
    rebuilt_state = PureState("cedf", rebuilt).reorder("cdef")
    fidelity = abs(np.vdot(rebuilt_state.amplitudes, psi4.amplitudes)) ** 2
    assert abs(fidelity - 1) < 1e-12


def test_derivation_is_fast():
    t0 = time.perf_counter()
    postselect_one_per_mode(apply_beam_splitters(spdc_second_order()))
    assert time.perf_counter() - t0 < 1.0


def test_surd_coefficients_stay_exact():
    out = apply_beam_splitters(OperatorPolynomial({"aH": 1}))
    assert out["cH"] == Surd.inv_sqrt2()
