import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disorderlab import geometry as g


class TestBoxSites:
    def test_l3_is_3x3(self):
        assert g.box_sites(g.BoxSpec((0, 0), 3)) == {
            (x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)
        }

    def test_l1_singleton(self):
        assert g.box_sites(g.BoxSpec((0, 0), 1)) == {(0, 0)}

    def test_fractional_l(self):
        # threshold floor((6.6-1)/2) = 2 -> 5x5 block
        assert len(g.box_sites(g.BoxSpec((0, 0), 6.6))) == 25

    def test_l_below_one_rejected(self):
        with pytest.raises(g.GeometryError):
            g.BoxSpec((0, 0), 0.5)

    @given(
        l=st.floats(min_value=1, max_value=40, allow_nan=False),
        cx=st.integers(-5, 5),
        cy=st.integers(-5, 5),
    )
    @settings(max_examples=60, deadline=None)
    def test_site_count_formula(self, l, cx, cy):
        spec = g.BoxSpec((cx, cy), l)
        assert len(g.box_sites(spec)) == (2 * math.floor((l - 1) / 2) + 1) ** 2

    def test_reported_length(self):
        assert g.BoxSpec((0, 0), 11).side_length == 10
        assert g.BoxSpec((0, 0), 6.6).side_length == 4


class TestBoundaries:
    def test_single_site(self):
        inner, outer, edges = g.boundaries({(0, 0)})
        assert inner == {(0, 0)}
        assert len(outer) == 4
        assert len(edges) == 4

    def test_domino(self):
        inner, outer, edges = g.boundaries({(0, 0), (1, 0)})
        assert inner == {(0, 0), (1, 0)}
        assert len(outer) == 6
        assert len(edges) == 6

    def test_3x3_block(self):
        S = g.box_sites(g.BoxSpec((0, 0), 3))
        inner, outer, edges = g.boundaries(S)
        assert len(inner) == 8
        assert len(outer) == 12
        assert len(edges) == 12

    @given(st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), max_size=25))
    @settings(max_examples=60, deadline=None)
    def test_boundary_invariants(self, S):
        inner, outer, edges = g.boundaries(S)
        assert inner <= S
        assert not (outer & S)
        for e in edges:
            a, b = tuple(e)
            assert {a, b} & inner and {a, b} & outer
            assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


class TestTilted:
    def test_single_cell(self):
        assert g.tilted_sites(g.TiltedRect((0, 0), (0, 0))) == {(0, 0)}

    def test_two_by_two(self):
        assert g.tilted_sites(g.TiltedRect((1, 2), (1, 2))) == {(1, 0), (2, 0)}

    @pytest.mark.parametrize("a", [1, 2, 5, 9])
    def test_strip_cardinality(self, a):
        # one parity-valid t per s in a two-wide strip
        assert len(g.tilted_sites(g.TiltedRect((1, a), (1, 2)))) == a

    @given(
        i1=st.integers(-6, 6), iw=st.integers(0, 8),
        j1=st.integers(-6, 6), jw=st.integers(0, 8),
    )
    @settings(max_examples=60, deadline=None)
    def test_tilted_map_lands_in_intervals(self, i1, iw, j1, jw):
        R = g.TiltedRect((i1, i1 + iw), (j1, j1 + jw))
        for (x, y) in g.tilted_sites(R):
            s, t = x + y, x - y
            assert i1 <= s <= i1 + iw and j1 <= t <= j1 + jw
            assert (s - t) % 2 == 0

    def test_diagonal_plus(self):
        R = g.TiltedRect((0, 0), (-2, 2))
        assert g.diagonal_trace(0, "+", R) == {(0, 0), (1, -1), (-1, 1)}

    def test_diagonal_outside_interval_empty(self):
        R = g.TiltedRect((0, 0), (-2, 2))
        assert g.diagonal_trace(5, "+", R) == set()

    def test_diagonal_count(self):
        # D_k^+ in R_{[k,k],[-m,m]} has m+1 sites for even m
        for k in (0, 2):
            for m in (2, 4, 6):
                R = g.TiltedRect((k, k), (-m, m))
                assert len(g.diagonal_trace(k, "+", R)) == m + 1


class TestSparsity:
    def test_empty_theta_sparse(self):
        R = g.TiltedRect((0, 5), (0, 5))
        assert g.is_sparse(set(), R, 0.0)

    def test_full_theta_not_sparse(self):
        R = g.TiltedRect((0, 5), (0, 5))
        assert not g.is_sparse(g.tilted_sites(R), R, 0.99)

    def test_single_site_on_short_diagonal(self):
        R = g.TiltedRect((0, 4), (0, 4))
        diag = g.diagonal_trace(2, "+", R)
        assert len(diag) == 3
        theta = {next(iter(diag))}
        assert g.is_sparse(theta, R, 0.4, "plus")

    def test_both_equals_plus_and_minus(self):
        R = g.TiltedRect((0, 6), (0, 6))
        theta = {(1, 1), (2, 0), (3, 1)}
        for eta in (0.0, 0.2, 0.5, 1.0):
            both = g.is_sparse(theta, R, eta, "both")
            assert both == (
                g.is_sparse(theta, R, eta, "plus") and g.is_sparse(theta, R, eta, "minus")
            )


class TestRegularity:
    def test_empty_theta_never_certified(self):
        E = g.tilted_sites(g.TiltedRect((0, 9), (0, 9)))
        fam = [g.TiltedRect((0, 3), (0, 3))]
        assert g.regularity_verdict(set(), E, 0.1, fam) is False

    def test_full_theta_certified(self):
        sq = g.TiltedRect((0, 9), (0, 9))
        E = g.tilted_sites(sq)
        assert g.regularity_verdict(E, E, 0.5, [sq]) is True

    def test_disjointness_enforced(self):
        sq = g.TiltedRect((0, 3), (0, 3))
        E = g.tilted_sites(g.TiltedRect((0, 9), (0, 9)))
        with pytest.raises(ValueError):
            g.regularity_verdict(E, E, 0.1, [sq, sq])

    def test_greedy_search_finds_violation_for_dense_theta(self):
        sq = g.TiltedRect((0, 9), (0, 9))
        E = g.tilted_sites(sq)
        fam = g.find_regularity_violation(E, E, 0.3)
        assert fam is not None
        assert g.regularity_verdict(E, E, 0.3, fam)

    def test_theta1_greedy_finds_no_violation_at_spec_scale(self):
        # frozen frame set in Q_47 at r=11, eps0=0.2: no witness at eta=eps0^(1/4)
        Q = g.BoxSpec((0, 0), 47)
        sites = g.box_sites(Q)
        th = g.theta1(11, 0.2, sites)
        eta = 0.2 ** 0.25
        assert g.find_regularity_violation(th, sites, eta, min_side=3, max_side=20) is None


class TestRGeometry:
    def test_spec_example_r11(self):
        geo = g.r_geometry(11, 0.2, (0, 0))
        assert geo.r_prime == 9
        assert len(geo.omega) == 25
        assert len(geo.omega_tilde) == 49
        assert len(geo.q_sites) == 121
        assert geo.frame == geo.q_sites - geo.omega

    def test_degenerate_r3(self):
        with pytest.raises(g.GeometryError):
            g.r_geometry(3, 0.2, (0, 0))

    def test_even_r_rejected(self):
        with pytest.raises(g.GeometryError):
            g.r_geometry(10, 0.2, (0, 0))

    def test_bit_separation_remark(self):
        # OmegaTilde of one bit avoids the closed neighborhood of any other bit
        geo1 = g.r_geometry(11, 0.2, (0, 0))
        for b in [(9, 0), (0, 9), (9, 9), (-9, 0), (18, 9)]:
            geo2 = g.r_geometry(11, 0.2, b)
            q2_closed = geo2.q_sites | g.boundaries(geo2.q_sites)[1]
            assert not (geo1.omega_tilde & q2_closed)


class TestRDyadic:
    def test_scale_arithmetic(self):
        box = g.r_dyadic_box(11, 0.2, 1, (0, 0))
        assert box.l == 4 * 9 + 11 == 47

    def test_is_r_dyadic(self):
        assert g.is_r_dyadic(47, (18, -18), 11, 0.2)
        assert g.is_r_dyadic(29, (9, 9), 11, 0.2)
        assert not g.is_r_dyadic(47, (9, 0), 11, 0.2)  # off the 2r' sublattice
        assert not g.is_r_dyadic(45, (0, 0), 11, 0.2)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_decomposition_union(self, k):
        box = g.r_dyadic_box(11, 0.2, k, (0, 0))
        union = set()
        for b in g.bit_centers_inside(box, 11, 0.2):
            union |= g.box_sites(g.BoxSpec(b, 11))
        assert union == g.box_sites(box)

    def test_bits_outside_do_not_touch(self):
        # non-contained bit => its OmegaTilde misses the dyadic box entirely
        box = g.r_dyadic_box(11, 0.2, 1, (0, 0))
        inside = set(g.bit_centers_inside(box, 11, 0.2))
        box_set = g.box_sites(box)
        for i in range(-4, 5):
            for j in range(-4, 5):
                b = (9 * i, 9 * j)
                if b in inside:
                    continue
                geo = g.r_geometry(11, 0.2, b)
                if g.box_sites(g.BoxSpec(b, 11)) <= box_set:
                    continue
                assert not (geo.omega_tilde & box_set)


class TestTheta1:
    def test_frame_region_is_kept(self):
        geo = g.r_geometry(11, 0.2, (0, 0))
        assert g.theta1(11, 0.2, geo.frame) == geo.frame

    def test_omega_of_lattice_bit_misses_theta1(self):
        geo = g.r_geometry(11, 0.2, (9, 9))
        assert g.theta1(11, 0.2, geo.omega) == set()

    def test_matches_bruteforce_union(self):
        region = g.box_sites(g.BoxSpec((0, 0), 29))
        brute = set()
        for i in range(-4, 5):
            for j in range(-4, 5):
                try:
                    geo = g.r_geometry(11, 0.2, (9 * i, 9 * j))
                except g.GeometryError:
                    continue
                brute |= geo.frame & region
        assert g.theta1(11, 0.2, region) == brute

    def test_theta1_sparse_near_bit_interiors(self):
        # tilted squares meeting the shrunken core of a bit see few frame sites
        th = g.theta1(11, 0.2, g.box_sites(g.BoxSpec((0, 0), 47)))
        core = g.box_sites(g.BoxSpec((0, 0), 5))
        eta = 0.2 ** 0.25
        for side in (4, 6, 8):
            sq = g.TiltedRect((0, side - 1), (0, side - 1))
            if g.tilted_sites(sq) & core:
                assert g.is_sparse(th, sq, eta)


class TestCoverDefects:
    def test_single_defect_kept_at_initial_scale(self):
        Q = g.r_dyadic_box(11, 0.2, 3, (0, 0))
        defect = g.r_dyadic_box(11, 0.2, 0, (0, 0))
        k3, covers = g.cover_defects(Q, [defect], 11, 0.2, k1=1)
        assert k3 == 1 and len(covers) == 1
        assert g.cover_margin(defect, covers[0], Q) >= covers[0].l / 8

    def test_two_far_defects_disjoint_covers(self):
        Q = g.r_dyadic_box(11, 0.2, 4, (0, 0))
        d1 = g.r_dyadic_box(11, 0.2, 0, (-72, -72))
        d2 = g.r_dyadic_box(11, 0.2, 0, (72, 72))
        k3, covers = g.cover_defects(Q, [d1, d2], 11, 0.2, k1=1)
        assert k3 == 1 and len(covers) == 2
        assert not g._boxes_overlap(covers[0], covers[1])

    def test_two_near_defects_merge_and_pad(self):
        Q = g.r_dyadic_box(11, 0.2, 4, (0, 0))
        d1 = g.r_dyadic_box(11, 0.2, 0, (0, 0))
        d2 = g.r_dyadic_box(11, 0.2, 0, (18, 0))
        k3, covers = g.cover_defects(Q, [d1, d2], 11, 0.2, k1=1)
        assert len(covers) == 2
        for i, c1 in enumerate(covers):
            for c2 in covers[i + 1:]:
                assert not g._boxes_overlap(c1, c2)
        for d in (d1, d2):
            assert any(
                g.cover_margin(d, c, Q) >= c.l / 8 for c in covers
            )

    def test_impossible_cover_raises(self):
        Q = g.r_dyadic_box(11, 0.2, 1, (0, 0))
        defect = g.r_dyadic_box(11, 0.2, 1, (0, 0))  # defect as big as Q
        with pytest.raises(g.GeometryError):
            g.cover_defects(Q, [defect], 11, 0.2, k1=1, max_growth=2)
