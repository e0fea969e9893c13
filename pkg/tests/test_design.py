import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverings import CoverageBitmap, CoveringDesign, DesignParams, density, read_design, verify, write_design
from coverings.errors import BudgetError, DesignFormatError, ParameterError
from oracles import assert_covering, brute_uncovered, tsets_of_blocks

FANO = [(0, 1, 3), (1, 2, 4), (2, 3, 5), (3, 4, 6), (0, 4, 5), (1, 5, 6), (0, 2, 6)]


@pytest.fixture
def fano():
    return CoveringDesign(DesignParams(7, 3, 2), FANO)


class TestParams:
    @pytest.mark.parametrize("v,k,t", [(3, 4, 2), (5, 2, 3), (5, 3, 0), (0, 0, 0)])
    def test_invalid(self, v, k, t):
        with pytest.raises(ParameterError):
            DesignParams(v, k, t)

    def test_block_validation(self):
        p = DesignParams(5, 3, 2)
        with pytest.raises(ParameterError):
            CoveringDesign(p, [(0, 0, 1)])
        with pytest.raises(ParameterError):
            CoveringDesign(p, [(0, 1, 5)])
        with pytest.raises(ParameterError):
            CoveringDesign.from_array(p, np.array([[0, 1, 1]]))


class TestDensity:
    def test_affine_plane_order_3(self):
        lines = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8),
                 (0, 4, 8), (1, 5, 6), (2, 3, 7), (0, 5, 7), (1, 3, 8), (2, 4, 6)]
        d = CoveringDesign(DesignParams(9, 3, 2), lines)
        assert density(d) == Fraction(12 * 3, 36) == 1

    def test_k_equals_t(self):
        d = CoveringDesign(DesignParams(6, 3, 3), list(itertools.combinations(range(6), 3)))
        assert density(d) == 1

    def test_all_pairs(self):
        d = CoveringDesign(DesignParams(4, 2, 2), list(itertools.combinations(range(4), 2)))
        assert density(d) == 1


class TestBitmap:
    def test_mark_counts(self):
        bm = CoverageBitmap(DesignParams(6, 3, 2))
        assert bm.mark_block((0, 1, 2)) == 3
        assert bm.mark_block((0, 1, 2)) == 0
        assert bm.mark_block((1, 2, 3)) == 2
        assert bm.covered_count == 5

    def test_clean(self):
        bm = CoverageBitmap(DesignParams(6, 3, 2))
        assert bm.block_is_clean((1, 2, 3))
        bm.mark_block((0, 1, 2))
        assert not bm.block_is_clean((1, 2, 3))
        assert bm.block_is_clean((3, 4, 5))

    def test_mark_tset(self):
        bm = CoverageBitmap(DesignParams(6, 3, 2))
        assert bm.mark_tset((3, 4))
        assert not bm.mark_tset((3, 4))
        assert bm.is_covered((3, 4)) and not bm.is_covered((2, 4))

    def test_budget(self):
        with pytest.raises(BudgetError):
            CoverageBitmap(DesignParams(1000, 3, 3), budget=10**6)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_matches_set_union_oracle(self, data):
        v = data.draw(st.integers(3, 12))
        t = data.draw(st.integers(1, min(4, v)))
        k = data.draw(st.integers(t, min(v, t + 3)))
        bm = CoverageBitmap(DesignParams(v, k, t))
        seen = set()
        blocks = data.draw(st.lists(st.sets(st.integers(0, v - 1), min_size=k, max_size=k), max_size=15))
        for b in blocks:
            b = tuple(sorted(b))
            fresh = set(itertools.combinations(b, t)) - seen
            assert bm.block_is_clean(b) == (not set(itertools.combinations(b, t)) & seen)
            assert bm.mark_block(b) == len(fresh)
            seen |= fresh
            assert bm.covered_count == len(seen)
        assert bm.covered_count <= bm.total


class TestVerify:
    def test_fano(self, fano):
        rep = verify(fano)
        assert rep.is_covering and rep.checked == 21 and rep.uncovered_found == ()
        assert brute_uncovered(fano) == []

    @pytest.mark.parametrize("drop", range(7))
    def test_fano_minus_block(self, drop):
        d = CoveringDesign(DesignParams(7, 3, 2), FANO[:drop] + FANO[drop + 1 :])
        rep = verify(d)
        assert not rep.is_covering
        assert rep.n_uncovered == 3
        assert sorted(rep.uncovered_found) == sorted(brute_uncovered(d)) == sorted(itertools.combinations(FANO[drop], 2))

    def test_all_ksets(self):
        d = CoveringDesign(DesignParams(8, 4, 3), list(itertools.combinations(range(8), 4)))
        assert assert_covering(d).is_covering

    def test_agrees_with_double_loop(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            v = int(rng.integers(4, 13))
            t = int(rng.integers(1, 4))
            k = int(rng.integers(t, min(v, t + 3) + 1))
            n = int(rng.integers(0, 25))
            blocks = [tuple(sorted(rng.choice(v, k, replace=False).tolist())) for _ in range(n)]
            d = CoveringDesign(DesignParams(v, k, t), blocks)
            rep = verify(d, max_report=10**6)
            assert sorted(rep.uncovered_found) == brute_uncovered(d)
            assert rep.is_covering == (not brute_uncovered(d))
            if rep.is_covering:
                assert density(d) >= 1

    def test_exhaustive_budget_refusal(self, fano):
        with pytest.raises(BudgetError, match="sampled"):
            verify(fano, budget=10)

    def test_sampled_finds_holes_but_never_certifies(self, fano):
        rep = verify(fano, "sampled", n=2000, rng=np.random.default_rng(1))
        assert rep.is_covering is None and rep.n_uncovered == 0
        broken = CoveringDesign(fano.params, FANO[1:])
        rep = verify(broken, "sampled", n=2000, rng=np.random.default_rng(1))
        assert rep.n_uncovered > 0
        assert set(rep.uncovered_found) <= set(itertools.combinations(FANO[0], 2))


class TestSerialization:
    def test_roundtrip(self, fano):
        text = write_design(fano)
        assert text.startswith('{"v":7,"k":3,"t":2,"blocks":7}\n')
        assert text.endswith("\n")
        back = read_design(text)
        assert back == fano.canonical()
        assert write_design(back) == text

    def test_canonical_order(self):
        d = CoveringDesign(DesignParams(5, 2, 1), [(4, 3), (1, 0), (2, 1)])
        assert write_design(d).splitlines()[1:] == ["0 1", "1 2", "3 4"]

    def test_empty(self):
        d = CoveringDesign(DesignParams(5, 3, 2), [])
        assert write_design(d) == '{"v":5,"k":3,"t":2,"blocks":0}\n'
        assert read_design(write_design(d)) == d

    @pytest.mark.parametrize(
        "text,where",
        [
            ('{"v":5,"k":3,"t":2,"blocks":1}\n0 0 1\n', "line 2"),
            ('{"v":5,"k":3,"t":2,"blocks":1}\n0 1 5\n', "line 2"),
            ('{"v":5,"k":3,"t":2,"blocks":1}\n0 1\n', "line 2"),
            ('{"v":5,"k":3,"t":2,"blocks":2}\n0 1 2\n', "announces"),
            ('{"v":5,"k":3,"t":2,"blocks":1}\n0 x 2\n', "line 2"),
            ('{"v":5,"k":3}\n', "line 1"),
            ('{"v":5,"k":3,"t":2,"blocks":0}', "newline"),
        ],
    )
    def test_rejects(self, text, where):
        with pytest.raises(DesignFormatError, match=where):
            read_design(text)
