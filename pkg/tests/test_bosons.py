import math
from fractions import Fraction

import pytest

from darkwells.bosons import (
    ZERO_AMPLITUDE,
    BosonFockState,
    FockDistribution,
    SurdAmplitude,
    distribution_rows,
    distribution_to_json_dict,
    emission_distribution,
    equal_fill_even_distribution,
    flat_approximation,
    gaussian_approximation,
    one_well_distribution,
    retained_state_split,
    rotate_fock,
    state_overlap,
    write_distribution_csv,
)
from darkwells.fermions import two_electron_asymptotic
from darkwells.model import NoBoundStateError, WellPair
from darkwells.rotation import dark_state

from oracles import boson_rotation_oracle


def test_surd_equality_across_factorizations():
    a = SurdAmplitude(Fraction(2), Fraction(3, 4))
    b = SurdAmplitude(Fraction(1), Fraction(3))
    assert a == b and hash(a) == hash(b)
    assert a.square() == 3
    assert float(a) == pytest.approx(math.sqrt(3.0))
    assert SurdAmplitude(Fraction(-1, 2), Fraction(8)) == SurdAmplitude(
        Fraction(-2), Fraction(1, 2)
    )
    assert a != SurdAmplitude(Fraction(-1), Fraction(3))


def test_surd_zero_is_canonical():
    assert SurdAmplitude(Fraction(0), Fraction(7)) == ZERO_AMPLITUDE
    assert SurdAmplitude(Fraction(3), Fraction(0)) == ZERO_AMPLITUDE
    assert ZERO_AMPLITUDE.sign == 0
    with pytest.raises(ValueError):
        SurdAmplitude(Fraction(1), Fraction(-1))


def test_rotation_matches_operator_oracle_exactly():
    # zero-tolerance comparison: sign and squared amplitude as rationals
    for y in (1, Fraction(1, 4), Fraction(9, 7)):
        for eta in (1, -1):
            for n1 in range(5):
                for n2 in range(5 - n1):
                    if n1 + n2 == 0:
                        continue
                    state = rotate_fock(n1, n2, y, eta=eta)
                    want = boson_rotation_oracle(n1, n2, y, eta=eta)
                    for n_dark, (sign, square) in want.items():
                        amp = state.amplitude(n_dark, n1 + n2 - n_dark)
                        assert amp.sign == sign
                        assert amp.square() == square


def test_single_particle_rotation_is_the_dark_vector():
    for y in (0.25, 1.0, 4.0):
        for eta in (1, -1):
            pair = WellPair.from_widths(1.0, y, eta=eta)
            state = rotate_fock(1, 0, Fraction(y), eta=eta)
            dark = dark_state(pair)
            assert float(state.amplitude(1, 0)) == pytest.approx(dark[0], abs=1e-13)
            assert float(state.amplitude(0, 1)) == pytest.approx(
                math.sqrt(1.0 - dark[0] ** 2), abs=1e-13
            )


def test_one_boson_per_well_at_equal_widths():
    state = rotate_fock(1, 1, 1)
    assert state.amplitude(1, 1) == ZERO_AMPLITUDE
    assert state.amplitude(0, 2) == SurdAmplitude(Fraction(1), Fraction(1, 2))
    assert state.amplitude(2, 0) == SurdAmplitude(Fraction(-1), Fraction(1, 2))


def test_two_bosons_per_well_at_equal_widths():
    state = rotate_fock(2, 2, 1)
    assert state.amplitude(1, 3) == ZERO_AMPLITUDE
    assert state.amplitude(3, 1) == ZERO_AMPLITUDE
    assert state.amplitude(0, 4) == SurdAmplitude(Fraction(1), Fraction(3, 8))
    assert state.amplitude(4, 0) == SurdAmplitude(Fraction(1), Fraction(3, 8))
    assert state.amplitude(2, 2) == SurdAmplitude(Fraction(-1, 2), Fraction(1))


@pytest.mark.parametrize("y", [Fraction(1, 4), 1, 4])
def test_two_boson_emission_law(y):
    dist = emission_distribution(rotate_fock(1, 1, y))
    denom = (1 + Fraction(y)) ** 2
    assert dist.probability(0) == 2 * Fraction(y) / denom
    assert dist.probability(1) == (1 - Fraction(y)) ** 2 / denom
    assert dist.probability(2) == 2 * Fraction(y) / denom


def test_bosons_bunch_where_fermions_do_not():
    # equal widths: the fermion pair always emits exactly one particle,
    # the boson pair never emits exactly one
    boson = emission_distribution(rotate_fock(1, 1, 1))
    assert boson.probability(1) == 0
    assert boson.probability(0) == Fraction(1, 2)
    fermion = two_electron_asymptotic(1.0)
    assert fermion[0].reservoir_count == 1 and fermion[0].probability == 1.0


def test_fermion_like_limit_of_thin_second_well():
    y = Fraction(1, 10**6)
    dist = emission_distribution(rotate_fock(1, 1, y))
    assert float(dist.probability(1)) == pytest.approx(0.999996, abs=1e-6)


def test_one_well_binomial_law():
    dist = one_well_distribution(3, 1)
    assert [dist.probability(m) for m in range(4)] == [
        Fraction(1, 8),
        Fraction(3, 8),
        Fraction(3, 8),
        Fraction(1, 8),
    ]
    # starting from one well is the same as rotating |N, 0>
    for y in (Fraction(1, 4), Fraction(5, 3)):
        via_state = emission_distribution(rotate_fock(3, 0, y))
        assert via_state.probabilities == one_well_distribution(3, y).probabilities


def test_equal_fill_law_even_counts_only():
    n1 = equal_fill_even_distribution(1)
    assert n1.probability(0) == Fraction(1, 2)
    assert n1.probability(1) == 0
    assert n1.probability(2) == Fraction(1, 2)
    n2 = equal_fill_even_distribution(2)
    assert n2.probability(0) == Fraction(3, 8)
    assert n2.probability(2) == Fraction(1, 4)
    assert n2.probability(4) == Fraction(3, 8)
    assert n2.probability(1) == 0 and n2.probability(3) == 0
    # closed form against the general rotation machinery
    assert n2.probabilities == emission_distribution(rotate_fock(2, 2, 1)).probabilities


def test_retained_split_examples():
    split = retained_state_split(2, Fraction(1, 4))
    assert split.probability(0) == Fraction(16, 25)
    assert split.probability(1) == Fraction(8, 25)
    assert split.probability(2) == Fraction(1, 25)
    assert retained_state_split(0, 1).probabilities == {0: Fraction(1)}
    even = retained_state_split(3, 1)
    assert even.probability(1) == Fraction(3, 8)
    with pytest.raises(ValueError):
        retained_state_split(-1, 1)
    with pytest.raises(ValueError):
        retained_state_split(2, 0)


def test_rotated_states_are_orthonormal():
    total = 6
    states = [rotate_fock(n1, total - n1, Fraction(9, 7)) for n1 in range(total + 1)]
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            want = 1.0 if i == j else 0.0
            assert state_overlap(a, b) == pytest.approx(want, abs=1e-12)


def test_gaussian_approximation_quality():
    approx, rel = gaussian_approximation(50, 1.0, 25)
    assert rel < 0.05
    assert approx == pytest.approx(
        float(one_well_distribution(50, 1).probability(25)), rel=0.05
    )
    with pytest.raises(ValueError):
        gaussian_approximation(50, 1.0, 51)
    with pytest.raises(ValueError):
        gaussian_approximation(50, 0.0, 25)


def test_flat_approximation_quality():
    approx, rel = flat_approximation(100, 50)
    assert approx == pytest.approx(1.0 / (50.0 * math.pi), rel=1e-12)
    assert rel < 0.05
    with pytest.raises(ValueError):
        flat_approximation(100, 0)
    with pytest.raises(ValueError):
        flat_approximation(100, 100)


def test_state_validation():
    half = SurdAmplitude(Fraction(1), Fraction(1, 2))
    with pytest.raises(ValueError, match="basis"):
        BosonFockState(total=1, basis="sites", amplitudes={(1, 0): half})
    with pytest.raises(ValueError, match="norm"):
        BosonFockState(total=1, basis="wells", amplitudes={(1, 0): half})
    with pytest.raises(ValueError, match="inconsistent"):
        BosonFockState(total=2, basis="wells", amplitudes={(1, 0): half})
    with pytest.raises(ValueError):
        BosonFockState(total=0, basis="wells", amplitudes={})
    ok = BosonFockState(
        total=1, basis="wells", amplitudes={(1, 0): half, (0, 1): half}
    )
    assert ok.float_amplitudes() == {
        (1, 0): pytest.approx(math.sqrt(0.5)),
        (0, 1): pytest.approx(math.sqrt(0.5)),
    }


def test_distribution_validation():
    with pytest.raises(ValueError, match="negative"):
        FockDistribution(probabilities={0: Fraction(-1, 2), 1: Fraction(3, 2)})
    with pytest.raises(ValueError, match="sum"):
        FockDistribution(probabilities={0: Fraction(1, 2)})
    with pytest.raises(ValueError, match="integer"):
        FockDistribution(probabilities={-1: Fraction(1)})
    dist = FockDistribution(probabilities={0: Fraction(1, 4), 2: Fraction(3, 4)})
    assert dist.max_count == 2
    assert dist.probability(1) == 0
    assert dist.as_floats() == {0: 0.25, 2: 0.75}


def test_rotation_argument_validation():
    with pytest.raises(ValueError):
        rotate_fock(0, 0, 1)
    with pytest.raises(ValueError):
        rotate_fock(1, 0, 0)
    with pytest.raises(ValueError):
        rotate_fock(1, 0, 1, eta=2)
    with pytest.raises(NoBoundStateError):
        emission_distribution(rotate_fock(1, 1, 1), epsilon=0.2)
    wells = BosonFockState(
        total=1,
        basis="wells",
        amplitudes={(1, 0): SurdAmplitude(Fraction(1), Fraction(1))},
    )
    with pytest.raises(ValueError, match="dark"):
        emission_distribution(wells)
    with pytest.raises(ValueError, match="different"):
        state_overlap(wells, rotate_fock(1, 0, 1))


def test_distribution_serialization(tmp_path):
    dist = emission_distribution(rotate_fock(1, 1, Fraction(1, 4)))
    doc = distribution_to_json_dict(dist)
    assert doc["counts"] == [0, 1, 2]
    assert doc["probabilities"][1] == pytest.approx(9.0 / 25.0)
    assert distribution_rows(dist)[0] == (0, 8.0 / 25.0)
    path = tmp_path / "law.csv"
    write_distribution_csv(path, dist, header_lines=["x y"])
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "# x y"
    assert lines[1] == "m,probability"
    assert lines[2].split(",") == ["0", f"{8.0 / 25.0:.17g}"]
