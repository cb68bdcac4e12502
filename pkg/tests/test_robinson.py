import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisysft import robinson as rb
from noisysft.core import Grid, NoiseMask, SftParseError
from noisysft.noise import parse_model, sample_mask


class TestTileset:
    def test_counts(self):
        tiles = rb.tileset()
        assert len(tiles) == 56
        assert sum(1 for t in tiles if t.parity == rb.BUMPY) == 4
        classic = rb.classic_projection()
        assert len(classic) == 32
        assert sum(1 for t in classic if t[0] == rb.BUMPY) == 4

    def test_ids_are_sorted_positions(self):
        for i, t in enumerate(rb.tileset()):
            assert t.id == i
            assert rb.TILE_INDEX[t.tuple] == i

    def test_bumpy_tiles_are_crosses(self):
        for t in rb.tileset():
            if t.parity == rb.BUMPY:
                assert t.kind == "cross"

    def test_realized_in_macros(self):
        seen = set()
        for n in range(1, 7):
            for o in range(4):
                seen |= set(int(v) for v in rb.build_macro(n, o).ravel())
        assert len(seen) == 48

    @given(st.integers(0, 55))
    def test_rotation_period_four(self, t):
        assert int(rb.ROT[rb.ROT[rb.ROT[rb.ROT[t]]]]) == t

    @given(st.integers(0, 55))
    def test_colour_swap_involution(self, t):
        tile = rb.TILES[t]
        assert rb.colour_swap(rb.colour_swap(tile)) == tile

    @given(st.integers(0, 55), st.integers(0, 55))
    def test_matches_agrees_with_tables(self, a, b):
        assert rb.matches(a, b, "E") == bool(rb.H_OK[a, b])
        assert rb.matches(a, b, "N") == bool(rb.V_OK[b, a])

    def test_matches_rejects_other_directions(self):
        with pytest.raises(ValueError):
            rb.matches(0, 0, "W")

    def test_make_cross_accepts_names(self):
        assert rb.make_cross("se") == rb.make_cross(0)
        assert rb.make_cross("NW", rb.DENTED) == rb.make_cross(2, rb.DENTED)

    def test_adjacent_tiles_of_a_macro_match(self):
        g = rb.build_macro(2, 0)
        assert rb.matches(int(g[1, 0]), int(g[1, 1]), "E")
        assert rb.matches(int(g[1, 0]), int(g[0, 0]), "N")

    def test_square_rule(self):
        g = rb.build_macro(2, 0)
        assert rb.square_ok([int(g[0, 0]), int(g[0, 1]),
                             int(g[1, 0]), int(g[1, 1])])
        corners = [int(g[r, c]) for r in (0, 2) for c in (0, 2)]
        assert not rb.square_ok(corners)


class TestMacros:
    def test_shapes_and_cache(self):
        for n in range(1, 6):
            g = rb.build_macro(n, 0)
            assert g.shape == (2 ** n - 1, 2 ** n - 1)
            assert g is rb.build_macro(n, 0)
            assert not g.flags.writeable

    def test_scale_one_is_a_bumpy_cross(self):
        for o in range(4):
            g = rb.build_macro(1, o)
            assert g.shape == (1, 1)
            assert int(g[0, 0]) == rb.make_cross(o, rb.BUMPY)

    def test_centre_is_requested_dented_cross(self):
        for n in (2, 3, 4):
            mid = 2 ** (n - 1) - 1
            for o in range(4):
                assert rb.build_macro(n, o)[mid, mid] == \
                    rb.make_cross(o, rb.DENTED)

    def test_corners_hold_previous_scale(self):
        for n in (2, 3, 4, 5):
            g = rb.build_macro(n, 0)
            q = 2 ** (n - 1) - 1
            for (qr, qc), o in (((0, 0), 0), ((0, 1), 3),
                                ((1, 0), 1), ((1, 1), 2)):
                sub = g[qr * (q + 1):qr * (q + 1) + q,
                        qc * (q + 1):qc * (q + 1) + q]
                assert np.array_equal(sub, rb.build_macro(n - 1, o))

    def test_all_orientations_admissible(self):
        for n in range(1, 7):
            for o in range(4):
                assert rb.is_admissible(rb.build_macro(n, o))

    def test_rotation_equivariance(self):
        for n in range(1, 6):
            for o in range(4):
                assert np.array_equal(rb.rotate_grid(rb.build_macro(n, o)),
                                      rb.build_macro(n, (o + 1) % 4))

    def test_budget_and_range_errors(self):
        with pytest.raises(ValueError):
            rb.build_macro(0)
        with pytest.raises(ValueError):
            rb.build_macro(13)

    def test_orient_by_name(self):
        assert np.array_equal(rb.build_macro(3, "ne"), rb.build_macro(3, 1))

    def test_detected_centres_spacing(self):
        g = rb.build_macro(4, 0)
        centres = rb.detect_macro_centres(g, 2)
        assert centres == [(r, c) for r in (1, 5, 9, 13)
                           for c in (1, 5, 9, 13)]
        rows = sorted({r for r, _ in centres})
        assert min(np.diff(rows)) >= 4


class TestEdgeWords:
    def test_small_literals(self):
        assert rb.edge_words(1) == rb.EdgeWords(1, "0", "1")
        assert rb.edge_words(2) == rb.EdgeWords(2, "100", "110")
        assert rb.edge_words(3).l == "1100100"
        assert rb.edge_words(3).t == "1101100"

    def test_algebra_to_twenty(self):
        for n in range(1, 21):
            ew = rb.edge_words(n)
            assert len(ew.l) == len(ew.t) == 2 ** n - 1
            mirror_comp_l = "".join("1" if ch == "0" else "0"
                                    for ch in ew.l[::-1])
            assert ew.t == mirror_comp_l
            mirror_comp_t = "".join("1" if ch == "0" else "0"
                                    for ch in ew.t[::-1])
            assert ew.t != mirror_comp_t
            diff = [i for i, (a, b) in enumerate(zip(ew.l, ew.t)) if a != b]
            assert diff == [2 ** (n - 1) - 1]

    def test_recurrence_matches_concatenation(self):
        for n in range(1, 12):
            a, b = rb.edge_words(n), rb.edge_words(n + 1)
            assert b.l == a.t + "0" + a.l
            assert b.t == a.t + "1" + a.l

    def test_read_off_matches(self):
        for n in range(1, 7):
            assert rb.read_edge_words(rb.build_macro(n, 0)) == \
                rb.edge_words(n)


class TestAdmissibility:
    def test_flip_breaks_and_mask_exempts(self):
        g = np.array(rb.build_macro(3, 0))
        g[0, 0] = rb.make_cross(1, rb.BUMPY)
        found = rb.violations(g)
        assert found
        mask = np.zeros(g.shape, dtype=np.uint8)
        mask[0, 0] = 1
        assert rb.is_admissible(g, mask)

    def test_limit_short_circuits(self):
        g = np.zeros((6, 6), dtype=np.int8)
        assert len(rb.violations(g, limit=3)) == 3

    def test_absolute_coordinates(self):
        base = np.array(rb.build_macro(2, 0))
        base[0, 1] = base[0, 0]
        found = rb.violations(Grid((10, 20), base))
        cells = {c for _, cs in found for c in cs}
        assert all(r >= 10 and c >= 20 for r, c in cells)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            rb.violations(np.array([[99]]))
        with pytest.raises(ValueError):
            rb.violations(np.zeros((2, 2, 2), dtype=np.int8))

    def test_lattice_rule_catches_misplaced_cross(self):
        g = np.array(rb.build_macro(3, 0))
        # overwrite a strip cell with a bumpy cross off the class lattice
        g[3, 1] = rb.make_cross(0, rb.BUMPY)
        kinds = {rule for rule, _ in rb.violations(g)}
        assert "lattice" in kinds or "square" in kinds

    def test_centre_rule_reported(self):
        # four inward crosses around a non-cross centre
        g = np.array(rb.build_macro(2, 0))
        g[1, 1] = int(g[0, 1])  # replace the dented cross by a strip tile
        kinds = {rule for rule, _ in rb.violations(g)}
        assert "centre" in kinds

    def test_single_cell_and_empty(self):
        assert rb.is_admissible(np.array([[0]], dtype=np.int8))
        assert rb.is_admissible(rb._PEEL_WITNESS_9)


class TestAlignment:
    def test_scale_one_pairs(self):
        rep = rb.check_alignment(1)
        assert sorted(rep[("h", 0)]) == sorted(
            [("NE", "NW"), ("NW", "NE"), ("SE", "SW"), ("SW", "SE")])
        assert sorted(rep[("v", 0)]) == sorted(
            [("NE", "SE"), ("NW", "SW"), ("SE", "NE"), ("SW", "NW")])

    def test_scale_two_pairs(self):
        rep = rb.check_alignment(2)
        assert sorted(rep[("h", 0)]) == sorted(
            [("SE", "SW"), ("NE", "NW"), ("NW", "SE"),
             ("NW", "NE"), ("SW", "SE"), ("SW", "NE")])
        assert sorted(rep[("v", 0)]) == sorted(
            [("SE", "NE"), ("NE", "SE"), ("NE", "SW"),
             ("NW", "SE"), ("NW", "SW"), ("SW", "NW")])
        for axis in ("h", "v"):
            for dy in (1, 2):
                assert rep[(axis, dy)] == []

    def test_large_scale_rejected(self):
        with pytest.raises(ValueError):
            rb.check_alignment(3)


class TestForcing:
    def test_inward_pin_forces_macros(self):
        sols = rb.solve_window(
            [(r, c) for r in range(3) for c in range(3)],
            {(0, 0): rb.make_cross(0, rb.BUMPY)})
        assert len(sols) == 4
        macros = [rb._macro_as_fixed(2, o) for o in range(4)]
        assert all(s in macros for s in sols)

    def test_outward_pin_is_loose(self):
        sols = rb.solve_window(
            [(r, c) for r in range(3) for c in range(3)],
            {(0, 0): rb.make_cross(1, rb.BUMPY)})
        assert len(sols) == 52
        macros = [rb._macro_as_fixed(2, o) for o in range(4)]
        assert not any(s in macros for s in sols)

    def test_budget_raises(self):
        from noisysft.core import BudgetExceeded
        with pytest.raises(BudgetExceeded):
            rb.solve_window([(r, c) for r in range(3) for c in range(3)],
                            {}, budget=50)


class TestPeel:
    def test_constants(self):
        assert [rb.peel_constant(n) for n in (1, 2, 3, 4)] == [1, 3, 7, 15]

    def test_witness_is_certified(self):
        w = rb._PEEL_WITNESS_9
        assert rb.is_admissible(w)
        macros = [rb.build_macro(2, o) for o in range(4)]
        assert any(np.array_equal(w[3:6, 3:6], m) for m in macros)
        defects = rb.cross_lattice_defects(w[2:7, 2:7], (3, 3), (2, 2))
        assert defects == [((2, 4), "dented")]
        assert rb.cross_lattice_defects(w[3:6, 3:6], (3, 3), (3, 3)) == []

    def test_macro_window_has_no_defects(self):
        g = rb.build_macro(4, 0)
        assert rb.cross_lattice_defects(g, (0, 0)) == []

    def test_defect_checker_flags_bad_class(self):
        g = np.array([[rb.make_cross(1, rb.BUMPY)]])
        assert rb.cross_lattice_defects(g, (0, 0), (0, 0)) \
            == [((0, 0), "bumpy")]
        assert rb.cross_lattice_defects(g, (0, 0), (2, 0)) == []

    def test_report_shape(self):
        rep = rb.peel_verify(n=3)
        assert set(rep["forcing"]) == {
            (corner, name) for corner in
            ((0, 0), (0, 2), (2, 0), (2, 2)) for name in rb.ORIENT_NAMES}
        with pytest.raises(ValueError):
            rb.peel_verify(n=2)
        with pytest.raises(ValueError):
            rb.peel_verify(mode="guess")


class TestTextFormat:
    def test_round_trip(self):
        g = rb.build_macro(3, 2)
        again = rb.parse_text(rb.write_text(g))
        assert np.array_equal(again, g)

    def test_header_and_shape_errors(self):
        with pytest.raises(SftParseError):
            rb.parse_text("")
        with pytest.raises(SftParseError):
            rb.parse_text("tiles 3 3\n0 0 0\n0 0 0\n0 0 0\n")
        with pytest.raises(SftParseError):
            rb.parse_text("robinson-v1 3 2\n0 0 0\n")
        with pytest.raises(SftParseError):
            rb.parse_text("robinson-v1 2 1\n0 0 0\n")
        with pytest.raises(SftParseError):
            rb.parse_text("robinson-v1 2 1\n0 77\n")

    def test_grid_input(self):
        text = rb.write_text(Grid((5, 5), rb.build_macro(2, 1)))
        assert text.startswith("robinson-v1 3 3\n")


class TestSvg:
    def test_smoke(self):
        svg = rb.render_svg(rb.build_macro(3, 0))
        assert svg.startswith("<svg")
        assert svg.count("<rect") >= 49
        assert "</svg>" in svg

    def test_mask_shading_and_size_guard(self):
        mask = np.zeros((3, 3), dtype=np.uint8)
        mask[1, 1] = 1
        svg = rb.render_svg(rb.build_macro(2, 0), mask)
        assert 'opacity="0.55"' in svg
        with pytest.raises(ValueError):
            rb.render_svg(np.zeros((300, 300), dtype=np.int8))


class TestReference:
    def test_windows_are_admissible(self):
        rng = np.random.default_rng(41)
        for _ in range(5):
            t = tuple(int(v) for v in rng.integers(0, 512, size=2))
            o = tuple(int(v) for v in rng.integers(0, 800, size=2))
            win = rb.reference_window(o, (64, 64), t)
            assert rb.is_admissible(win)

    def test_cross_lattices_respect_translate(self):
        t = (37, 101)
        win = rb.reference_window((0, 0), (128, 128), t)
        assert rb.cross_lattice_defects(win, (t[0] % 4, t[1] % 4)) == []
        orient = rb.BUMPY_ORIENT[win]
        rr, cc = np.nonzero(orient >= 0)
        assert ((rr - t[0]) % 2 == 0).all()
        assert ((cc - t[1]) % 2 == 0).all()

    def test_range_guard(self):
        with pytest.raises(ValueError):
            rb.reference_window((-600, 0), (10, 10), (0, 0))
        with pytest.raises(ValueError):
            rb.reference_window((1200, 0), (400, 400), (0, 0))


class TestInferTranslate:
    def test_exact_windows(self):
        rng = np.random.default_rng(97)
        for n in (1, 2, 3):
            period = 2 ** (n + 1)
            for _ in range(4):
                t = tuple(int(v) for v in rng.integers(0, 512, size=2))
                o = tuple(int(v) for v in rng.integers(0, 500, size=2))
                win = rb.reference_window(o, (96, 96), t)
                got, no_votes = rb.infer_translate(Grid(o, win), None, n)
                assert not no_votes
                assert got == (t[0] % period, t[1] % period)

    def test_all_obscured_flags(self):
        win = rb.reference_window((0, 0), (32, 32), (0, 0))
        mask = np.ones((32, 32), dtype=np.uint8)
        got, no_votes = rb.infer_translate(win, mask, 1)
        assert no_votes
        assert got == (0, 0)


class TestRepair:
    def _noisy_instance(self, n, eps, shape, seed):
        rng = np.random.default_rng(seed)
        t_in = tuple(int(v) for v in rng.integers(0, 512, size=2))
        clean = rb.reference_window((0, 0), shape, t_in)
        mask = sample_mask(parse_model(f"bernoulli:{eps}"), shape,
                           seed=seed)
        noisy = np.array(clean)
        hit = mask.data.astype(bool)
        noisy[hit] = rng.integers(0, rb.NTILES, size=int(hit.sum()))
        return t_in, Grid((0, 0), noisy), mask

    def test_zero_noise_changes_only_grout(self):
        for n in (2, 3):
            t_in = (389, 77)
            shape = (160, 160)
            g = Grid((0, 0), rb.reference_window((0, 0), shape, t_in))
            m = NoiseMask((0, 0), np.zeros(shape, dtype=np.uint8))
            rep = rb.robinson_repair(g, m, n, seed=1)
            period = 2 ** (n + 1)
            assert rep.translate == (t_in[0] % period, t_in[1] % period)
            assert not rep.no_votes
            assert rb.is_admissible(rep.grid.data)
            size = 2 ** n
            inner = tuple(slice(rep.c, s - rep.c) for s in shape)
            diff = g.data[inner] != rep.grid.data
            rows = np.arange(rep.grid.origin[0],
                             rep.grid.origin[0] + diff.shape[0])
            cols = np.arange(rep.grid.origin[1],
                             rep.grid.origin[1] + diff.shape[1])
            grout = ((rows[:, None] - t_in[0]) % size == size - 1) | \
                    ((cols[None, :] - t_in[1]) % size == size - 1)
            assert not (diff & ~grout).any()
            assert rep.changed_fraction <= 2.0 ** (1 - n) + rep.slack + 1e-12

    def test_noisy_recovery(self):
        t_in, g, m = self._noisy_instance(2, 1e-3, (256, 256), seed=8)
        rep = rb.robinson_repair(g, m, 2, seed=8)
        assert rep.translate == (t_in[0] % 8, t_in[1] % 8)
        assert rb.is_admissible(rep.grid.data)
        assert rep.changed_fraction <= 0.5 + rep.slack

    def test_determinism(self):
        _, g, m = self._noisy_instance(2, 1e-3, (200, 200), seed=3)
        a = rb.robinson_repair(g, m, 2, seed=9)
        b = rb.robinson_repair(g, m, 2, seed=9)
        assert a.translate == b.translate
        assert np.array_equal(a.grid.data, b.grid.data)

    def test_box_errors(self):
        g = Grid((0, 0), np.zeros((20, 20), dtype=np.int8))
        m = NoiseMask((0, 0), np.zeros((20, 20), dtype=np.uint8))
        with pytest.raises(ValueError):
            rb.robinson_repair(g, m, 3)  # c=16 needs a box of 33+
        m2 = NoiseMask((0, 0), np.zeros((24, 20), dtype=np.uint8))
        g2 = Grid((0, 0), np.zeros((24, 24), dtype=np.int8))
        with pytest.raises(ValueError):
            rb.robinson_repair(g2, m2, 1)

    def test_slack_shrinks_with_box(self):
        assert rb.robinson_slack(3, 20) > 0.0
        assert rb.robinson_slack(3, 992) == 0.0
        assert rb.robinson_slack(2, 40) >= rb.robinson_slack(2, 2000) >= 0.0
        assert rb.robinson_bound(0.0, 2) == pytest.approx(0.5)
        assert rb.robinson_bound(1e-3, 2) == pytest.approx(
            96 * 17 ** 2 * 1e-3 + 0.5)


class TestVerifySuite:
    def test_groups_run_clean(self):
        checks = rb.verify_suite(groups=("tileset", "align"))
        assert checks and all(ok for _, ok, _ in checks)
