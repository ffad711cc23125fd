#!/usr/bin/env python3

import partialmactestlib
partialmactestlib.preload_local_partialmac()

import numpy as np
import partialmac
import unittest


def asymmetric_scenario():
    ch = partialmac.Channel([[1.0, 0.1], [0.1, 4.0]], [1.0, 1.0])
    return partialmac.Scenario(ch, [1.0, 1.0])


class TestOmaMinPower(unittest.TestCase):

    def test_even_split(self):
        solution = partialmac.oma_min_power(partialmactestlib.symmetric_scenario(), [0.5, 0.5])
        np.testing.assert_allclose(solution.user_power, [1.5, 1.5], rtol=1e-12)
        self.assertAlmostEqual(solution.total_power, 3.0, places=12)

    def test_one_user(self):
        sc = partialmac.Scenario(partialmac.Channel([[1.0]], [1.0]), [2.0])
        self.assertAlmostEqual(partialmac.oma_min_power(sc, [1.0]).total_power, 3.0, places=12)

    def test_idle_user(self):
        sc = partialmactestlib.symmetric_scenario(rate_min=(1.0, 0.0))
        solution = partialmac.oma_min_power(sc, [1.0, 0.0])
        np.testing.assert_allclose(solution.user_power, [1.0, 0.0])

    def test_no_time(self):
        with self.assertRaises(partialmac.InfeasibleError) as cm:
            partialmac.oma_min_power(partialmactestlib.symmetric_scenario(), [1.0, 0.0])
        self.assertEqual(cm.exception.detail['user'], 1)

    def test_bad_fractions(self):
        sc = partialmactestlib.symmetric_scenario()
        with self.assertRaises(ValueError):
            partialmac.oma_min_power(sc, [0.6, 0.6])
        with self.assertRaises(ValueError):
            partialmac.oma_min_power(sc, [1.0])
        with self.assertRaises(ValueError):
            partialmac.oma_min_power(sc, [-0.5, 0.5])

    def test_unused_time(self):
        sc = partialmactestlib.symmetric_scenario()
        self.assertGreater(
            partialmac.oma_min_power(sc, [0.4, 0.4]).total_power,
            partialmac.oma_min_power(sc, [0.5, 0.5]).total_power)


class TestOmaOptimize(unittest.TestCase):

    def test_symmetric(self):
        solution = partialmac.oma_optimize_fractions(partialmactestlib.symmetric_scenario(), 64)
        np.testing.assert_allclose(solution.fractions, [0.5, 0.5], atol=1e-6)
        self.assertAlmostEqual(solution.total_power, 3.0, delta=1e-9)
        self.assertAlmostEqual(solution.fractions.sum(), 1.0, places=12)

    def test_matches_fine_scan(self):
        sc = asymmetric_scenario()
        solution = partialmac.oma_optimize_fractions(sc, 64)
        scan = min(
            partialmac.oma_min_power(sc, [a, 1.0 - a]).total_power
            for a in np.arange(1, 10000) * 1e-4)
        self.assertLessEqual(solution.total_power, scan + 1e-12)
        self.assertAlmostEqual(solution.total_power, scan, delta=1e-4)

    def test_coarse_grid_still_refines(self):
        sc = asymmetric_scenario()
        coarse = partialmac.oma_optimize_fractions(sc, 3)
        fine = partialmac.oma_optimize_fractions(sc, 64)
        self.assertAlmostEqual(coarse.total_power, fine.total_power, delta=1e-7)

    def test_three_users(self):
        ch = partialmac.Channel(np.eye(3), [1.0, 1.0, 1.0])
        solution = partialmac.oma_optimize_fractions(partialmac.Scenario(ch, [1.0, 1.0, 1.0]), 16)
        np.testing.assert_allclose(solution.fractions, [1 / 3] * 3, atol=1e-6)

    def test_idle_user_gets_no_time(self):
        sc = partialmactestlib.symmetric_scenario(rate_min=(1.0, 0.0))
        solution = partialmac.oma_optimize_fractions(sc, 16)
        np.testing.assert_allclose(solution.fractions, [1.0, 0.0])
        self.assertAlmostEqual(solution.total_power, 1.0, places=12)

    def test_no_requirements(self):
        sc = partialmactestlib.symmetric_scenario(rate_min=(0.0, 0.0))
        self.assertEqual(partialmac.oma_optimize_fractions(sc, 16).total_power, 0.0)

    def test_monotone_in_rate(self):
        previous = 0.0
        for rate in (0.25, 0.5, 1.0, 1.5):
            sc = partialmac.Scenario(asymmetric_scenario().channel, [rate, 1.0])
            total = partialmac.oma_optimize_fractions(sc, 32).total_power
            self.assertGreater(total, previous)
            previous = total

    def test_no_direct_gain(self):
        ch = partialmac.Channel([[0.0, 0.1], [0.1, 1.0]], [1.0, 1.0])
        with self.assertRaises(partialmac.InfeasibleError):
            partialmac.oma_optimize_fractions(partialmac.Scenario(ch, [1.0, 1.0]), 16)

    def test_bad_grid(self):
        with self.assertRaises(ValueError):
            partialmac.oma_optimize_fractions(partialmactestlib.symmetric_scenario(), 1)

    def test_partial_decoding_beats_oma(self):
        sc = partialmactestlib.symmetric_scenario()
        oma = partialmac.oma_optimize_fractions(sc, 64)
        minpic = partialmac.minpic_solve(sc)
        self.assertLessEqual(minpic.total_power, oma.total_power + 1e-9)


if __name__ == '__main__': # pragma: nocover
    unittest.main()
