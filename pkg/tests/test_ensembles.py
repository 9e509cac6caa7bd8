import itertools
import math

import numpy as np
import pytest

from cpn_lab.ensembles import (
    Amplitude,
    Family,
    SignalEnsemble,
    SlotSymbol,
    hamming_7_4_codewords,
    make_coded,
    make_mppm,
    parse_codeword_lines,
    read_codeword_file,
)

A1 = Amplitude(1.0)


def as_bits(ens):
    return ens.bits()


def test_amplitude_n_bar():
    a = Amplitude.from_n_bar(2.5)
    assert a.n_bar == pytest.approx(2.5, rel=1e-15)
    assert Amplitude(0.0).n_bar == 0.0
    with pytest.raises(ValueError):
        Amplitude(-0.1)
    with pytest.raises(ValueError):
        Amplitude.from_n_bar(-1)


def test_mppm_2_4_matches_listed_order():
    ens = make_mppm(4, 2, A1)
    assert as_bits(ens) == ["1100", "1010", "1001", "0110", "0101", "0011"]
    assert ens.priors == (1 / 6,) * 6
    assert ens.family is Family.OOK


def test_ppm_4():
    assert as_bits(make_mppm(4, 1, A1)) == ["1000", "0100", "0010", "0001"]


def test_mppm_full_occupancy():
    ens = make_mppm(3, 3, A1)
    assert as_bits(ens) == ["111"]
    assert ens.priors == (1.0,)


@pytest.mark.parametrize("m,l", [(6, 2), (5, 3), (7, 1), (8, 4)])
def test_mppm_counts(m, l):
    ens = make_mppm(m, l, A1)
    assert ens.n_codewords == math.comb(m, l)
    for word in ens.codewords:
        assert sum(s is SlotSymbol.PLUS_ALPHA for s in word) == l
    assert math.fsum(ens.priors) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m,l", [(4, 0), (4, 5), (0, 1)])
def test_mppm_bad_parameters(m, l):
    with pytest.raises(ValueError):
        make_mppm(m, l, A1)


def test_coded_symbol_mapping():
    ook = make_coded(["0000000", "1000000"], "ook", A1)
    assert ook.codewords[0] == (SlotSymbol.VACUUM,) * 7
    bpsk = make_coded(["01"], Family.BPSK, A1)
    assert bpsk.codewords[0] == (SlotSymbol.MINUS_ALPHA, SlotSymbol.PLUS_ALPHA)
    np.testing.assert_array_equal(bpsk.amplitudes(), [[-1.0, 1.0]])


def test_coded_hamming_bpsk():
    ens = make_coded(hamming_7_4_codewords(), "bpsk", A1)
    assert (ens.n_codewords, ens.m_slots) == (16, 7)
    assert ens.priors == (1 / 16,) * 16


def test_coded_errors():
    with pytest.raises(ValueError, match="duplicate"):
        make_coded(["01", "01"], "ook", A1)
    with pytest.raises(ValueError, match="length"):
        make_coded(["01", "011"], "ook", A1)
    with pytest.raises(ValueError, match="sum"):
        make_coded(["0", "1"], "ook", A1, priors=[0.5, 0.6])
    with pytest.raises(ValueError):
        make_coded(["0", "1"], "ook", A1, priors=[1.5, -0.5])
    with pytest.raises(ValueError):
        make_coded(["0", "1"], "ook", A1, priors=[1.0])


def test_family_symbol_consistency():
    with pytest.raises(ValueError, match="not allowed"):
        SignalEnsemble(1, ((SlotSymbol.MINUS_ALPHA,),), (1.0,), A1, Family.OOK)
    with pytest.raises(ValueError, match="not allowed"):
        SignalEnsemble(1, ((SlotSymbol.VACUUM,),), (1.0,), A1, Family.BPSK)


def test_nonuniform_priors_accepted():
    ens = make_coded(["0", "1"], "ook", A1, priors=[0.3, 0.7])
    assert ens.priors == (0.3, 0.7)


# Hamming code checks use an independent GF(2) matrix product
G = np.array(
    [
        [1, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ]
)


def test_hamming_generator_products():
    words = hamming_7_4_codewords()
    for i, msg in enumerate(itertools.product((0, 1), repeat=4)):
        expected = "".join(map(str, (np.array(msg) @ G) % 2))
        assert words[i] == expected
    assert words[0] == "0000000"
    assert words[-1] == "1111111"


def test_hamming_minimum_distance():
    words = hamming_7_4_codewords()
    dists = [
        sum(a != b for a, b in zip(u, v)) for u, v in itertools.combinations(words, 2)
    ]
    assert len(dists) == 120
    assert min(dists) == 3


def test_hamming_linearity():
    words = set(hamming_7_4_codewords())
    for u in words:
        for v in words:
            s = "".join(str(int(a) ^ int(b)) for a, b in zip(u, v))
            assert s in words


def test_hamming_weight_distribution():
    weights = sorted(w.count("1") for w in hamming_7_4_codewords())
    assert {w: weights.count(w) for w in set(weights)} == {0: 1, 3: 7, 4: 7, 7: 1}


def test_permute_slots():
    ens = make_mppm(4, 1, A1)
    perm = ens.permute_slots([3, 2, 1, 0])
    assert perm.bits() == ["0001", "0010", "0100", "1000"]
    with pytest.raises(ValueError):
        ens.permute_slots([0, 0, 1, 2])


def test_codeword_file(tmp_path):
    path = tmp_path / "code.txt"
    path.write_text("# my code\n000\n\n011  # weight two\n101\n")
    assert read_codeword_file(path) == ["000", "011", "101"]
    with pytest.raises(ValueError, match="line 2"):
        parse_codeword_lines(["01", "0a"])
