#!/usr/bin/env python3

import partialmactestlib
partialmactestlib.preload_local_partialmac()

import math
import numpy as np
import partialmac
from partialmac import SubUserId as S
import unittest


def two_user(g01=0.5, g10=0.5, g00=1.0, g11=1.0, noise=(1.0, 1.0)):
    return partialmac.Channel([[g00, g01], [g10, g11]], noise)


class TestDecodedSets(unittest.TestCase):

    def test_one_user(self):
        self.assertEqual(partialmac.enumerate_decoded_sets(0, 1), (frozenset({S(0, 0)}),))

    def test_two_users(self):
        own = {S(0, 0), S(0, 1)}
        self.assertEqual(partialmac.enumerate_decoded_sets(0, 2), (
            frozenset(own),
            frozenset(own | {S(1, 0)}),
            frozenset(own | {S(1, 1)}),
            frozenset(own | {S(1, 0), S(1, 1)}),
            ))

    def test_three_users(self):
        sets = partialmac.enumerate_decoded_sets(1, 3)
        self.assertEqual(len(sets), 64)
        self.assertEqual(len(set(sets)), 64)
        own = set(partialmac.own_sub_users(1, 3))
        self.assertTrue(all(own <= s for s in sets))

    def test_size_limit(self):
        with self.assertRaises(partialmac.SizeLimitError):
            partialmac.enumerate_decoded_sets(0, 5)

    def test_bad_receiver(self):
        with self.assertRaises(ValueError):
            partialmac.enumerate_decoded_sets(2, 2)

    def test_masks(self):
        members = {S(0, 1), S(1, 0)}
        mask = partialmac.subset_mask(members, 2)
        self.assertEqual(mask, 0b0110)
        self.assertEqual(partialmac.mask_members(mask, 2), members)


class TestConstraints(unittest.TestCase):

    def test_constraint_count(self):
        self.assertEqual(partialmac.constraint_count(1), 1)
        self.assertEqual(partialmac.constraint_count(2), 24)
        self.assertEqual(partialmac.constraint_count(3), 1344)
        self.assertEqual(partialmac.constraint_count(3), 3 * (2 ** 9 - 2 ** 6))
        with self.assertRaises(partialmac.SizeLimitError):
            partialmac.constraint_count(6)

    def test_single_user(self):
        ch = partialmac.Channel([[1.0]], [1.0])
        polytope = partialmac.partial_mac_constraints(0, {S(0, 0)}, [[3.0]], ch)
        self.assertEqual(len(polytope.constraints), 1)
        self.assertAlmostEqual(polytope.constraints[0].rhs, 2.0, places=15)

    def test_own_set(self):
        p = partialmac.PowerAllocation([[1.0, 2.0], [1.0, 1.0]])
        polytope = partialmac.partial_mac_constraints(0, {S(0, 0), S(0, 1)}, p, two_user())
        self.assertEqual(len(polytope.constraints), 3)
        pair = [c for c in polytope.constraints if c.subset == 0b0011]
        self.assertEqual(len(pair), 1)
        self.assertAlmostEqual(pair[0].rhs, math.log2(1 + 3 / 2), places=12)
        self.assertAlmostEqual(pair[0].rhs, 1.321928, places=6)

    def test_full_set(self):
        p = partialmac.PowerAllocation([[1.0, 2.0], [1.0, 1.0]])
        polytope = partialmac.partial_mac_constraints(0, set(partialmac.all_sub_users(2)), p, two_user())
        self.assertEqual(len(polytope.constraints), 12)

    def test_every_subset_meets_own(self):
        p = partialmac.PowerAllocation([[1.0, 2.0], [1.0, 1.0]])
        ch = two_user()
        for i in range(2):
            own_mask = partialmac.subset_mask(partialmac.own_sub_users(i, 2), 2)
            for decoded_set in partialmac.enumerate_decoded_sets(i, 2):
                polytope = partialmac.partial_mac_constraints(i, decoded_set, p, ch)
                a = len(decoded_set)
                self.assertEqual(len(polytope.constraints), 2 ** a - 2 ** (a - 2))
                decoded_mask = partialmac.subset_mask(decoded_set, 2)
                for c in polytope.constraints:
                    self.assertTrue(c.subset & own_mask)
                    self.assertEqual(c.subset & ~decoded_mask, 0)
                    self.assertGreaterEqual(c.rhs, 0.0)

    def test_rhs_matches_direct_formula(self):
        lcg = partialmac.Lcg(5)
        ch = two_user(g01=0.2, g10=0.7, noise=(0.9, 1.1))
        for trial in range(5):
            p = partialmactestlib.seeded_powers(lcg, 2)
            for i in range(2):
                for decoded_set in partialmac.enumerate_decoded_sets(i, 2):
                    decoded = {(s.user, s.component) for s in decoded_set}
                    for c in partialmac.partial_mac_constraints(i, decoded_set, p, ch).constraints:
                        subset = [(s.user, s.component) for s in c.members(2)]
                        expected = partialmactestlib.subset_rhs(i, subset, decoded, p, ch)
                        self.assertAlmostEqual(c.rhs, expected, delta=1e-12)

    def test_decoded_set_must_hold_own(self):
        with self.assertRaises(ValueError):
            partialmac.partial_mac_constraints(0, {S(0, 0), S(1, 0)}, [[1, 1], [1, 1]], two_user())


class TestMembership(unittest.TestCase):

    def test_zero_rates(self):
        p = partialmac.PowerAllocation([[1.0, 1.0], [1.0, 1.0]])
        member, witness = partialmac.receiver_membership(0, partialmac.RateAllocation.zeros(2), p, two_user())
        self.assertTrue(member)
        self.assertEqual(witness, {S(0, 0), S(0, 1)})
        self.assertTrue(partialmac.ic_membership(partialmac.RateAllocation.zeros(2), p, two_user()))

    def test_single_user_over_cap(self):
        ch = partialmac.Channel([[1.0]], [1.0])
        member, witness = partialmac.receiver_membership(0, [[2.0 + 1e-3]], [[3.0]], ch, tol=1e-9)
        self.assertFalse(member)
        self.assertIsNone(witness)
        self.assertTrue(partialmac.receiver_membership(0, [[2.0]], [[3.0]], ch, tol=1e-9)[0])

    def test_mac_sum_capacity_corner(self):
        ch = partialmactestlib.mac_channel()
        p = partialmac.PowerAllocation([[1.5, 0.0], [1.5, 0.0]])
        r = partialmac.RateAllocation([[math.log2(2.5), 0.0], [math.log2(1 + 1.5 / 2.5), 0.0]])
        self.assertAlmostEqual(r.total(), 2.0, places=12)
        self.assertTrue(partialmac.ic_membership(r, p, ch, tol=1e-9))

    def test_exceeds_other_receivers_cap(self):
        ch = two_user(g11=0.1)
        p = partialmac.PowerAllocation([[1.0, 1.0], [1.0, 1.0]])
        r = partialmac.RateAllocation([[0.0, 0.0], [0.0, math.log2(1 + 0.1) + 0.01]])
        self.assertTrue(partialmac.receiver_membership(0, r, p, ch)[0])
        self.assertFalse(partialmac.receiver_membership(1, r, p, ch)[0])
        self.assertFalse(partialmac.ic_membership(r, p, ch))

    def test_agrees_with_oracle(self):
        lcg = partialmac.Lcg(0)
        disagreements = 0
        members = 0
        for sc in partialmactestlib.seeded_scenarios(20, seed=0):
            ch = sc.channel
            for sample in range(50):
                p = partialmactestlib.seeded_powers(lcg, 2)
                r = partialmac.RateAllocation([[lcg.uniform(0.0, 0.8) for j in range(2)] for k in range(2)])
                verdict = partialmac.ic_membership(r, p, ch, tol=1e-9)
                members += verdict
                if verdict != partialmactestlib.ic_membership_oracle(r, p, ch, tol=1e-9):
                    disagreements += 1
        self.assertEqual(disagreements, 0)
        # the samples straddle the boundary
        self.assertGreater(members, 0)
        self.assertLess(members, 1000)

    def test_agrees_with_sic_vertex_hull(self):
        # strong cross gains, so decoding foreign sub-users matters
        lcg = partialmac.Lcg(5)
        members = checked = 0
        for sc in partialmactestlib.seeded_scenarios(10, seed=4, cross=(0.5, 3.0)):
            ch = sc.channel
            for sample in range(30):
                p = partialmactestlib.seeded_powers(lcg, 2)
                r = partialmac.RateAllocation([[lcg.uniform(0.0, 0.8) for j in range(2)] for k in range(2)])
                for i in range(2):
                    verdict = partialmac.receiver_membership(i, r, p, ch, tol=1e-9)[0]
                    with self.subTest(receiver=i, r=r.r.tolist(), p=p.p.tolist()):
                        self.assertEqual(verdict, partialmactestlib.sic_hull_membership_oracle(i, r, p, ch, tol=1e-9))
                        self.assertEqual(verdict, partialmactestlib.receiver_membership_oracle(i, r, p, ch, tol=1e-9))
                    members += verdict
                    checked += 1
        self.assertGreater(members, 0)
        self.assertLess(members, checked)

    def test_downward_closure(self):
        lcg = partialmac.Lcg(1)
        ch = two_user(g01=0.3, g10=0.2)
        checked = 0
        for trial in range(40):
            p = partialmactestlib.seeded_powers(lcg, 2)
            r = partialmac.RateAllocation([[lcg.uniform(0.0, 0.8) for j in range(2)] for k in range(2)])
            if partialmac.ic_membership(r, p, ch):
                checked += 1
                smaller = partialmac.RateAllocation(r.r * np.array([[0.5, 1.0], [0.0, 0.9]]))
                self.assertTrue(partialmac.ic_membership(smaller, p, ch))
        self.assertGreater(checked, 0)

    def test_sic_points_are_vertices(self):
        lcg = partialmac.Lcg(2)
        ch = two_user(g01=0.4, g10=0.8, noise=(1.0, 0.6))
        for trial in range(30):
            cfg = partialmac.config_from_id(lcg.randrange(38 * 38), 2)
            p = partialmactestlib.seeded_powers(lcg, 2)
            r = partialmac.sub_user_rates(cfg, p, ch)
            for i in range(2):
                polytope = partialmac.partial_mac_constraints(i, cfg.decoded_set(i), p, ch)
                self.assertTrue(polytope.contains(r, tol=1e-9))
            self.assertTrue(partialmac.ic_membership(r, p, ch, tol=1e-9))

    def test_scale_invariance(self):
        lcg = partialmac.Lcg(4)
        ch = two_user(g01=0.3, g10=0.6)
        for trial in range(20):
            p = partialmactestlib.seeded_powers(lcg, 2)
            r = partialmac.RateAllocation([[lcg.uniform(0.0, 0.8) for j in range(2)] for k in range(2)])
            scaled = partialmac.PowerAllocation(p.p * 3.0)
            self.assertEqual(
                partialmac.ic_membership(r, p, ch),
                partialmac.ic_membership(r, scaled, ch.scaled_noise(3.0)))


class TestAlternatives(unittest.TestCase):

    def test_counts(self):
        self.assertEqual(partialmac.alternative_count(1), 1)
        self.assertEqual(partialmac.alternative_count(2), 38)
        expected = sum(math.comb(6, m) * math.factorial(3 + m) for m in range(7))
        self.assertEqual(partialmac.alternative_count(3), expected)

    def test_index_matches_enumeration(self):
        for i in range(2):
            alternatives = list(partialmac.receiver_alternatives(i, 2))
            self.assertEqual(len(alternatives), 38)
            self.assertEqual(len(set(alternatives)), 38)
            for index, order in enumerate(alternatives):
                self.assertEqual(partialmac.receiver_alternative_index(i, order, 2), index)

    def test_invalid_order(self):
        with self.assertRaises(ValueError):
            partialmac.receiver_alternative_index(0, (S(0, 0), S(1, 0)), 2)


class TestBoundaryScan(unittest.TestCase):

    def test_zero_power(self):
        sample = partialmac.boundary_scan_2user(two_user(), 0.0, 4)
        self.assertEqual(len(sample), 1)
        np.testing.assert_array_equal(sample.points[0], [0.0, 0.0])

    def test_rejects_other_sizes(self):
        with self.assertRaises(ValueError):
            partialmac.boundary_scan_2user(partialmac.Channel([[1.0]], [1.0]), 1.0, 4)
        with self.assertRaises(ValueError):
            partialmac.boundary_scan_2user(two_user(), 1.0, 1)

    def test_mac_corners_and_sum_rate(self):
        sample = partialmac.boundary_scan_2user(partialmactestlib.mac_channel(), 3.0, 64)
        r1 = sample.points[:, 0]
        r2 = sample.points[:, 1]
        self.assertAlmostEqual(r1[0], 0.0, delta=1e-6)
        self.assertAlmostEqual(r2[0], 2.0, delta=1e-6)
        self.assertAlmostEqual(r1[-1], 2.0, delta=1e-6)
        self.assertAlmostEqual(r2[-1], 0.0, delta=1e-6)
        for t in np.linspace(0.1, 1.9, 10):
            self.assertAlmostEqual(np.interp(t, r1, r2), 2.0 - t, delta=1e-6)

    def test_interference_free_maxima(self):
        ch = two_user(g01=0.0, g10=0.0)
        sample = partialmac.boundary_scan_2user(ch, 4.0, 5)
        r1 = sample.points[:, 0]
        r2 = sample.points[:, 1]
        self.assertAlmostEqual(r1.max(), math.log2(5), places=12)
        self.assertAlmostEqual(r2.max(), math.log2(5), places=12)
        # an even split reaches (log2 3, log2 3)
        self.assertGreaterEqual(np.interp(math.log2(3), r1, r2), math.log2(3) - 1e-9)

    def test_convex_and_sorted(self):
        sample = partialmac.boundary_scan_2user(two_user(g01=0.4, g10=0.3), 5.0, 12)
        points = sample.points
        self.assertTrue(np.all(np.diff(points[:, 0]) > 0))
        self.assertTrue(np.all(np.diff(points[:, 1]) < 0))
        for a, b, c in zip(points, points[1:], points[2:]):
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
            self.assertLess(cross, 1e-12)

    def test_points_are_achievable(self):
        ch = two_user(g01=0.4, g10=0.3)
        sample = partialmac.boundary_scan_2user(ch, 5.0, 12)
        for point, config_id, flat in zip(sample.points, sample.config_ids, sample.powers):
            cfg = partialmac.config_from_id(int(config_id), 2)
            p = partialmac.PowerAllocation.from_flat(flat, 2)
            self.assertAlmostEqual(p.total(), 5.0, places=9)
            r = partialmac.sub_user_rates(cfg, p, ch)
            np.testing.assert_allclose(partialmac.user_rates(r), point, rtol=0, atol=1e-12)
            self.assertTrue(partialmac.ic_membership(r, p, ch, tol=1e-9))

    def test_rows(self):
        sample = partialmac.boundary_scan_2user(two_user(), 2.0, 4)
        rows = list(sample.rows())
        self.assertEqual(len(rows), len(sample))
        self.assertEqual(tuple(rows[0]), ('r1_bits', 'r2_bits', 'config_id', 'p11', 'p12', 'p21', 'p22'))
        self.assertIsInstance(rows[0]['config_id'], int)


if __name__ == '__main__': # pragma: nocover
    unittest.main()
