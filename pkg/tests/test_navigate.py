"""Steering law spot values and properties, target navigation geometry,
and the avoidance/target dispatch."""

import math

import numpy as np
import pytest

from ppanav.detect import NO_OBSTACLE_DIS, ObstacleReport
from ppanav.navigate import (
    Mode,
    Navigator,
    NavParams,
    avoidance_raw,
    avoidance_steer,
    commanded_speed,
    target_steer,
)
from ppanav.world import STEER_LIMIT


def report(direction, dis):
    return ObstacleReport(200.0, 100.0, dis, direction)


class TestAvoidanceLaw:
    def test_spot_value_at_100(self):
        p = NavParams()  # k_safe 100, k_steer 20
        assert avoidance_raw(+1, 100.0, p) == -20.0

    def test_spot_value_at_200(self):
        assert avoidance_raw(+1, 200.0, NavParams()) == -10.0

    def test_mirrored_direction(self):
        assert avoidance_raw(-1, 100.0, NavParams()) == +20.0

    def test_closer_steers_harder(self):
        p = NavParams()
        assert abs(avoidance_raw(+1, 200.0, p)) < abs(avoidance_raw(+1, 100.0, p))

    def test_clamped_command_and_mode(self):
        cmd = avoidance_steer(report(+1, 100.0), NavParams())
        assert cmd.mode is Mode.AVOIDANCE
        assert cmd.theta_steer == pytest.approx(-0.2)  # raw -20 * 0.01 rad
        cmd = avoidance_steer(report(+1, 10.0), NavParams())
        assert cmd.theta_steer == -STEER_LIMIT  # raw -200 hits the clamp

    def test_zero_distance_singularity(self):
        cmd = avoidance_steer(report(+1, 0.0), NavParams())
        assert cmd.theta_steer == -STEER_LIMIT
        cmd = avoidance_steer(report(-1, 0.0), NavParams())
        assert cmd.theta_steer == +STEER_LIMIT

    def test_oddness_monotonicity_linearity(self):
        rng = np.random.default_rng(41)
        for _ in range(300):
            p = NavParams(
                k_safe=float(rng.uniform(10, 500)),
                k_steer=float(rng.uniform(1, 100)),
            )
            d = float(rng.uniform(1.0, p.d_safe - 1e-6))
            assert avoidance_raw(+1, d, p) == pytest.approx(-avoidance_raw(-1, d, p), abs=1e-9)
            d2 = d + float(rng.uniform(0.5, 50.0))
            assert abs(avoidance_raw(+1, d2, p)) < abs(avoidance_raw(+1, d, p))
            doubled = NavParams(k_safe=p.k_safe, k_steer=2 * p.k_steer)
            assert avoidance_raw(+1, d, doubled) == pytest.approx(
                2 * avoidance_raw(+1, d, p), rel=1e-12
            )


class TestTargetSteer:
    def test_aligned_target(self):
        cmd, e = target_steer((0, 0), 0.0, (2, 0), NavParams())
        assert cmd.theta_steer == 0.0 and cmd.mode is Mode.TARGET_NAV
        assert e == pytest.approx(2.0)

    def test_aligned_target_at_e_safe_boundary_is_reached(self):
        cmd, e = target_steer((0, 0), 0.0, (1, 0), NavParams())
        assert e == pytest.approx(1.0)
        assert cmd.mode is Mode.ON_TARGET and cmd.theta_steer == 0.0

    def test_perpendicular_target_clamps(self):
        cmd, _ = target_steer((0, 0), 0.0, (0, 2), NavParams())
        assert cmd.theta_steer == STEER_LIMIT

    def test_within_e_safe_is_on_target(self):
        cmd, e = target_steer((0.5, 0.5), 0.0, (1, 1), NavParams())
        assert e == pytest.approx(math.sqrt(0.5))
        assert cmd.mode is Mode.ON_TARGET and cmd.theta_steer == 0.0

    def test_heading_wrap_invariance(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            pos = tuple(rng.uniform(-5, 5, 2))
            tgt = tuple(rng.uniform(-5, 5, 2))
            h = float(rng.uniform(-math.pi, math.pi))
            a, _ = target_steer(pos, h, tgt, NavParams())
            b, _ = target_steer(pos, h + 2 * math.pi, tgt, NavParams())
            assert a.theta_steer == pytest.approx(b.theta_steer, abs=1e-9)

    def test_never_takes_the_long_way(self):
        # target slightly clockwise from behind: steer right, not left
        cmd, _ = target_steer((0, 0), math.radians(170.0), (1, -0.1), NavParams())
        assert cmd.theta_steer < 0.0


class TestDispatch:
    def test_no_obstacle_targets_navigation(self):
        nav = Navigator(NavParams(), targets=[(5.0, 0.0)])
        cmd = nav.step(ObstacleReport(), (0, 0), 0.0)
        assert cmd.mode is Mode.TARGET_NAV

    def test_near_obstacle_triggers_avoidance(self):
        nav = Navigator(NavParams(), targets=[(5.0, 0.0)])
        cmd = nav.step(report(+1, 150.0), (0, 0), 0.0)
        assert cmd.mode is Mode.AVOIDANCE

    def test_obstacle_at_d_safe_boundary_stays_target_nav(self):
        nav = Navigator(NavParams(), targets=[(5.0, 0.0)])
        cmd = nav.step(report(+1, 200.0), (0, 0), 0.0)
        assert cmd.mode is Mode.TARGET_NAV

    def test_direction_zero_in_range_coasts_straight(self):
        # dispatch is on distance alone; a sideless winner zeroes the law
        nav = Navigator(NavParams(), targets=[(5.0, 0.0)])
        cmd = nav.step(report(0, 50.0), (0, 0), 0.0)
        assert cmd.mode is Mode.AVOIDANCE
        assert cmd.theta_steer == 0.0

    def test_targets_advance_in_sequence(self):
        targets = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
        nav = Navigator(NavParams(), targets=targets)
        modes = []
        clear = ObstacleReport()
        for pos in [(0.9, 0.0), (1.9, 0.0), (2.9, 0.0)]:
            modes.append(nav.step(clear, pos, 0.0).mode)
        assert modes == [Mode.ON_TARGET] * 3
        assert nav.target_index == 3
        assert nav.step(clear, (3.0, 0.0), 0.0).mode is Mode.IDLE

    def test_one_advance_per_step(self):
        nav = Navigator(NavParams(), targets=[(0.1, 0.0), (0.2, 0.0)])
        nav.step(ObstacleReport(), (0.0, 0.0), 0.0)
        assert nav.target_index == 1  # both within e_safe, but only one advance

    def test_empty_targets_idles(self):
        nav = Navigator(NavParams(), targets=[])
        assert nav.step(ObstacleReport(), (0, 0), 0.0).mode is Mode.IDLE

    def test_reactive_cruises_straight(self):
        nav = Navigator(NavParams(), targets=[], reactive=True)
        cmd = nav.step(ObstacleReport(), (0, 0), 0.0)
        assert cmd.mode is Mode.TARGET_NAV and cmd.theta_steer == 0.0
        assert nav.step(report(-1, 80.0), (0, 0), 0.0).mode is Mode.AVOIDANCE

    def test_sentinel_report_composes_with_guard(self):
        # the no-obstacle sentinel distance always exceeds d_safe
        nav = Navigator(NavParams(), targets=[(5.0, 0.0)])
        cmd = nav.step(ObstacleReport(0, 0, NO_OBSTACLE_DIS, 0), (0, 0), 0.0)
        assert cmd.mode is Mode.TARGET_NAV

    def test_dispatch_exclusivity(self):
        rng = np.random.default_rng(43)
        nav = Navigator(NavParams(), targets=[(4.0, 1.0)])
        for _ in range(200):
            r = report(int(rng.choice([-1, 0, 1])), float(rng.uniform(1, 400)))
            cmd = nav.step(r, tuple(rng.uniform(-6, 6, 2)), float(rng.uniform(-3, 3)))
            assert cmd.mode in (Mode.IDLE, Mode.TARGET_NAV, Mode.AVOIDANCE, Mode.ON_TARGET)
            if cmd.mode is Mode.ON_TARGET:
                assert cmd.theta_steer == 0.0
            assert abs(cmd.theta_steer) <= STEER_LIMIT


class TestParams:
    def test_rejects_non_positive(self):
        for field in ("d_safe", "e_safe", "k_safe", "k_steer"):
            with pytest.raises(ValueError):
                NavParams(**{field: 0.0})

    def test_steer_scale_follows_d_steer(self):
        assert NavParams().steer_scale == pytest.approx(0.01)
        assert NavParams(d_steer=0.2).steer_scale == pytest.approx(0.02)

    def test_commanded_speed(self):
        assert commanded_speed(NavParams()) == pytest.approx(0.2 * math.pi)
