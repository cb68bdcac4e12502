"""Window repair in 1D and majority-vote repair of periodic 2D systems."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import noisysft.automaton1d as a1d
from noisysft.core import GOLDEN_MEAN, Grid, NoiseMask, SftParseError, word_sft
from noisysft.noise import Bernoulli, sample_mask
from noisysft.repair import (
    PeriodicSft,
    infer_offset,
    local_global_constant,
    parse_periodic,
    repair_1d,
    repair_periodic,
)

LONELY_ONE = word_sft("01", ["11", "010"])
TWO_THREE = word_sft("012", ["00", "02", "11", "21", "22"])

CHECKER_TEXT = """
dim 2
alphabet a b
forbid (0,0)=a (0,1)=a
forbid (0,0)=b (0,1)=b
forbid (0,0)=a (1,0)=a
forbid (0,0)=b (1,0)=b
period 2
base a b b a
"""

STRIPES_TEXT = """
dim 2
alphabet a b c
forbid (0,0)=a (0,1)=b
forbid (0,0)=a (0,1)=c
forbid (0,0)=b (0,1)=a
forbid (0,0)=b (0,1)=c
forbid (0,0)=c (0,1)=a
forbid (0,0)=c (0,1)=b
forbid (0,0)=a (1,0)=a
forbid (0,0)=a (1,0)=c
forbid (0,0)=b (1,0)=a
forbid (0,0)=b (1,0)=b
forbid (0,0)=c (1,0)=b
forbid (0,0)=c (1,0)=c
period 3
base a a a b b b c c c
"""


def random_admissible_word(auto, length, rng):
    """Uniformish random walk over live states."""
    live = a1d.live_states(auto)
    states = sorted(live)
    cur = states[rng.integers(len(states))]
    out = list(auto.states[cur])
    while len(out) < length:
        succ = [(b, j) for b, j in auto.edges[cur] if j in live]
        b, cur = succ[rng.integers(len(succ))]
        out.append(b)
    return tuple(out[:length])


def noisy_copy(word, mask_data, nsym, rng):
    out = np.array(word, dtype=np.int64)
    idx = np.flatnonzero(mask_data)
    out[idx] = rng.integers(0, nsym, size=len(idx))
    return out


class TestRepairConstants:
    def test_golden_mean(self):
        rc = a1d.repair_constants(a1d.build_automaton(GOLDEN_MEAN))
        assert (rc.word_len, rc.n0, rc.C, rc.D, rc.E) == (1, 1, 1, 1, 2)

    def test_lonely_one(self):
        rc = a1d.repair_constants(a1d.build_automaton(LONELY_ONE))
        assert (rc.word_len, rc.n0, rc.C, rc.D, rc.E) == (2, 1, 2, 2, 3)

    def test_two_three(self):
        rc = a1d.repair_constants(a1d.build_automaton(TWO_THREE))
        assert (rc.word_len, rc.n0, rc.C, rc.D, rc.E) == (1, 4, 1, 2, 3)


class TestRepair1D:
    def test_zero_noise_is_identity(self):
        word = tuple([0, 1] * 20)
        grid = Grid((0,), np.array(word))
        mask = NoiseMask((0,), np.zeros(40, dtype=np.uint8))
        rep = repair_1d(GOLDEN_MEAN, grid, mask)
        assert not rep.changed.any()
        assert rep.changed_fraction == 0.0
        assert not rep.boundary_gap
        assert rep.end_rewrites == 0
        assert rep.interior == (1, 39)

    def test_single_violation_fixed_locally(self):
        auto = a1d.build_automaton(GOLDEN_MEAN)
        data = np.array([0, 1] * 30)
        data[30] = 1  # 11 at 29..30
        mask = np.zeros(60, dtype=np.uint8)
        mask[30] = 1
        rep = repair_1d(auto, Grid((0,), data), NoiseMask((0,), mask))
        assert a1d.is_globally_admissible(auto, rep.interior_word())
        changed = np.flatnonzero(rep.changed)
        assert len(changed) > 0
        e = rep.constants.E
        assert all(abs(i - 30) <= e for i in changed)

    def test_all_obscured_reports_boundary_gap(self):
        data = np.ones(50, dtype=np.int64)
        mask = np.ones(50, dtype=np.uint8)
        rep = repair_1d(GOLDEN_MEAN, Grid((0,), data), NoiseMask((0,), mask))
        assert rep.boundary_gap
        assert rep.interior_word() == (0,) * 48

    def test_box_too_small(self):
        data = np.zeros(5, dtype=np.int64)
        with pytest.raises(ValueError, match="too small"):
            repair_1d(GOLDEN_MEAN, Grid((0,), data),
                      NoiseMask((0,), np.zeros(5, dtype=np.uint8)))

    def test_origin_carries_through(self):
        word = tuple([0, 1] * 20)
        grid = Grid((-7,), np.array(word))
        mask = NoiseMask((-7,), np.zeros(40, dtype=np.uint8))
        rep = repair_1d(GOLDEN_MEAN, grid, mask)
        assert rep.grid.origin == (-7,)
        assert rep.interior == (-6, 32)

    @pytest.mark.parametrize("sft", [GOLDEN_MEAN, LONELY_ONE, TWO_THREE],
                             ids=["golden-mean", "lonely-one", "two-three"])
    def test_repair_guarantees_on_random_trials(self, sft):
        auto = a1d.build_automaton(sft)
        rc = a1d.repair_constants(auto)
        nsym = len(auto.sft.alphabet)
        length = 400
        for trial in range(15):
            rng = np.random.default_rng(1000 + trial)
            word = random_admissible_word(auto, length, rng)
            mask = sample_mask(Bernoulli(0.03), (length,), seed=trial)
            data = noisy_copy(word, mask.data, nsym, rng)
            rep = repair_1d(auto, Grid((0,), data), NoiseMask((0,), mask.data))
            assert not rep.boundary_gap
            assert a1d.is_globally_admissible(auto, rep.interior_word())
            # locality: interior changes happen within E of an obscured cell
            # or within C of the interior edge (end peeling)
            obscured = np.flatnonzero(mask.data)
            for i in np.flatnonzero(rep.changed):
                if i < rc.C or i >= length - rc.C:
                    continue
                near_noise = len(obscured) and np.min(np.abs(obscured - i)) <= rc.E
                near_end = i < rc.C + rc.C or i >= length - 2 * rc.C
                assert near_noise or near_end, f"far rewrite at {i}"
            assert rep.end_rewrites <= 2 * rc.C

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        auto = a1d.build_automaton(GOLDEN_MEAN)
        word = random_admissible_word(auto, 200, rng)
        mask = sample_mask(Bernoulli(0.05), (200,), seed=3)
        data = noisy_copy(word, mask.data, 2, rng)
        reps = [repair_1d(auto, Grid((0,), data.copy()),
                          NoiseMask((0,), mask.data.copy())) for _ in range(2)]
        assert np.array_equal(reps[0].grid.data, reps[1].grid.data)
        assert reps[0].interior == reps[1].interior
        assert reps[0].end_rewrites == reps[1].end_rewrites

    def test_refined_constant_still_repairs(self):
        auto = a1d.build_automaton(LONELY_ONE)
        basic = a1d.repair_constants(auto)
        refined = a1d.repair_constants(auto, refined=True)
        assert refined.C <= basic.C
        rng = np.random.default_rng(2)
        word = random_admissible_word(auto, 300, rng)
        mask = sample_mask(Bernoulli(0.04), (300,), seed=11)
        data = noisy_copy(word, mask.data, 2, rng)
        rep = repair_1d(auto, Grid((0,), data), NoiseMask((0,), mask.data),
                        refined=True)
        assert a1d.is_globally_admissible(auto, rep.interior_word())


class TestPeriodicSft:
    def test_parse_checkerboard(self):
        p = parse_periodic(CHECKER_TEXT)
        assert p.period == 2
        assert p.dim == 2
        assert p.base.tolist() == [[0, 1], [1, 0]]
        p.validate()

    def test_orbit_and_canonical(self):
        p = parse_periodic(CHECKER_TEXT)
        assert p.orbit() == [(0, 0), (0, 1)]
        assert p.canonical_offset((1, 0)) == (0, 1)
        assert p.canonical_offset((1, 1)) == (0, 0)

    def test_tiling_values(self):
        p = parse_periodic(CHECKER_TEXT)
        g = p.tiling((0, 0), (0, 0), (3, 4))
        assert g.data.tolist() == [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
        # translating the offset shifts the pattern
        g1 = p.tiling((0, 1), (0, 0), (2, 2))
        assert g1.data.tolist() == [[1, 0], [0, 1]]

    def test_tiling_origin_consistency(self):
        p = parse_periodic(CHECKER_TEXT)
        big = p.tiling((0, 0), (0, 0), (8, 8))
        sub = p.tiling((0, 0), (3, 5), (2, 2))
        assert np.array_equal(sub.data, big.data[3:5, 5:7])

    def test_stripes_orbit(self):
        p = parse_periodic(STRIPES_TEXT)
        assert p.orbit() == [(0, 0), (1, 0), (2, 0)]
        p.validate()

    def test_parse_errors(self):
        with pytest.raises(SftParseError, match="period and base"):
            parse_periodic("dim 2\nalphabet a b\nbase a b b a\n")
        with pytest.raises(SftParseError, match="base"):
            parse_periodic("dim 2\nalphabet a b\nperiod 2\nbase a b b\n")
        with pytest.raises(SftParseError, match="unknown directive"):
            parse_periodic(CHECKER_TEXT + "\nwibble 3\n")

    def test_validate_rejects_bad_base(self):
        bad = CHECKER_TEXT.replace("base a b b a", "base a a b a")
        with pytest.raises(ValueError, match="3-period box"):
            parse_periodic(bad)

    def test_local_global_constants(self):
        assert local_global_constant(parse_periodic(CHECKER_TEXT)) == 1
        assert local_global_constant(parse_periodic(STRIPES_TEXT)) == 2


class TestInferOffset:
    def setup_method(self):
        self.p = parse_periodic(CHECKER_TEXT)
        self.c = local_global_constant(self.p)

    def test_exact_window(self):
        g = self.p.tiling((0, 0), (0, 0), (9, 9))
        assert infer_offset(self.p, g, (4, 4), self.c) == (0, 0)
        g1 = self.p.tiling((1, 0), (0, 0), (9, 9))
        assert infer_offset(self.p, g1, (4, 4), self.c) == (0, 1)

    def test_garbage_window_is_ambiguous(self):
        data = np.zeros((9, 9), dtype=np.int64)  # constant 'a' matches nothing
        assert infer_offset(self.p, Grid((0, 0), data), (4, 4), self.c) is None

    def test_window_outside_box(self):
        g = self.p.tiling((0, 0), (0, 0), (9, 9))
        with pytest.raises(ValueError, match="exceeds"):
            infer_offset(self.p, g, (0, 0), self.c)

    @settings(max_examples=40, deadline=None)
    @given(off=st.tuples(st.integers(0, 1), st.integers(0, 1)),
           cell=st.tuples(st.integers(1, 10), st.integers(1, 10)))
    def test_equivariance(self, off, cell):
        g = self.p.tiling(off, (0, 0), (12, 12))
        got = infer_offset(self.p, g, cell, self.c)
        assert got == self.p.canonical_offset(off)

    def test_stripes_needs_wider_window(self):
        p = parse_periodic(STRIPES_TEXT)
        c = local_global_constant(p)
        g = p.tiling((1, 0), (0, 0), (11, 11))
        assert infer_offset(p, g, (5, 5), c) == (1, 0)


class TestRepairPeriodic:
    def setup_method(self):
        self.p = parse_periodic(CHECKER_TEXT)

    def empty_mask(self, shape):
        return NoiseMask((0, 0), np.zeros(shape, dtype=np.uint8))

    def test_identity_on_clean_tiling(self):
        g = self.p.tiling((0, 1), (0, 0), (20, 20))
        rep = repair_periodic(self.p, g, self.empty_mask((20, 20)))
        assert rep.offset == (0, 1)
        assert rep.changed_fraction == 0.0
        assert not rep.no_votes
        ref = self.p.tiling((0, 1), rep.grid.origin, rep.grid.shape)
        assert np.array_equal(rep.grid.data, ref.data)

    def test_single_flip_recovered(self):
        shape = (24, 24)
        clean = self.p.tiling((0, 0), (0, 0), shape)
        noisy = np.array(clean.data)
        noisy[10, 10] ^= 1
        mask = np.zeros(shape, dtype=np.uint8)
        mask[10, 10] = 1
        rep = repair_periodic(self.p, Grid((0, 0), noisy),
                              NoiseMask((0, 0), mask))
        assert rep.offset == (0, 0)
        ref = self.p.tiling((0, 0), rep.grid.origin, rep.grid.shape)
        assert np.array_equal(rep.grid.data, ref.data)
        assert rep.changed_fraction == pytest.approx(1 / rep.grid.data.size)

    def test_majority_wins(self):
        shape = (30, 30)
        a = self.p.tiling((0, 0), (0, 0), shape).data
        b = self.p.tiling((0, 1), (0, 0), shape).data
        mixed = np.array(a)
        mixed[22:, :] = b[22:, :]  # minority patch of the other translate
        rep = repair_periodic(self.p, Grid((0, 0), mixed),
                              self.empty_mask(shape))
        assert rep.offset == (0, 0)
        assert rep.vote_counts[(0, 0)] > rep.vote_counts[(0, 1)] > 0

    def test_all_obscured_falls_back_lex_greatest(self):
        shape = (16, 16)
        g = self.p.tiling((0, 0), (0, 0), shape)
        mask = NoiseMask((0, 0), np.ones(shape, dtype=np.uint8))
        rep = repair_periodic(self.p, g, mask)
        assert rep.no_votes
        assert rep.offset == (0, 1)  # lex-greatest orbit element
        ref = self.p.tiling((0, 1), rep.grid.origin, rep.grid.shape)
        assert np.array_equal(rep.grid.data, ref.data)

    def test_mismatched_boxes_raise(self):
        g = self.p.tiling((0, 0), (0, 0), (16, 16))
        with pytest.raises(ValueError, match="mask box"):
            repair_periodic(self.p, g, self.empty_mask((16, 17)))

    def test_noisy_recovery_stripes(self):
        p = parse_periodic(STRIPES_TEXT)
        shape = (36, 36)
        clean = p.tiling((2, 0), (0, 0), shape)
        mask = sample_mask(Bernoulli(0.01), shape, seed=8)
        rng = np.random.default_rng(8)
        noisy = np.array(clean.data)
        idx = np.argwhere(mask.data)
        for i, j in idx:
            noisy[i, j] = rng.integers(0, 3)
        rep = repair_periodic(p, Grid((0, 0), noisy), mask)
        assert rep.offset == (2, 0)
        ref = p.tiling((2, 0), rep.grid.origin, rep.grid.shape)
        assert np.array_equal(rep.grid.data, ref.data)

    def test_idempotent(self):
        shape = (20, 20)
        clean = self.p.tiling((0, 0), (0, 0), shape)
        mask = sample_mask(Bernoulli(0.02), shape, seed=5)
        noisy = np.array(clean.data)
        noisy[np.nonzero(mask.data)] ^= 1
        rep = repair_periodic(self.p, Grid((0, 0), noisy), mask)
        again = repair_periodic(self.p, rep.grid,
                                NoiseMask(rep.grid.origin,
                                          np.zeros(rep.grid.shape,
                                                   dtype=np.uint8)))
        assert again.offset == rep.offset
        assert again.changed_fraction == 0.0
