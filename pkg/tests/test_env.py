import numpy as np
import pytest

from firegrid.engine import BURNING, SUPPRESSED
from firegrid.env import (
    Action,
    EnvConfig,
    EpisodeLog,
    FireEnv,
    FRAME_STACK,
    Observation,
    OUTCOME_CONTAINED,
    OUTCOME_MAX_STEPS,
    RewardBreakdown,
    play,
)
from firegrid.errors import ContractError, ValidationError
from firegrid.terrain import synthetic_scenario


def scen(width=15, height=15, **kw):
    kw.setdefault("ignitions", [(height // 2, width // 2, 0)])
    kw.setdefault("moisture", 0.02)
    kw.setdefault("max_steps", 200)
    return synthetic_scenario("flat_uniform", width=width, height=height, **kw)


def fresh(width=15, height=15, **kw):
    env = FireEnv(scen(width=width, height=height, **kw))
    env.reset()
    return env


class TestLifecycle:
    def test_default_start_is_grid_center(self):
        env = FireEnv(scen(width=240, height=160))
        obs = env.reset()
        assert obs.agent_pos == (80, 120)

    def test_reset_is_deterministic(self):
        env = FireEnv(scen())
        a = env.reset()
        b = env.reset()
        assert a.agent_pos == b.agent_pos
        assert a.over_burning == b.over_burning
        assert np.array_equal(a.stacked(), b.stacked())

    def test_agent_start_out_of_bounds_rejected(self):
        env = FireEnv(scen())
        with pytest.raises(ValidationError):
            env.reset(agent_start=(15, 0))

    def test_step_before_reset_rejected(self):
        env = FireEnv(scen())
        with pytest.raises(ContractError):
            env.step(Action.UP)

    def test_step_after_done_rejected(self):
        env = FireEnv(scen())
        env.reset(agent_start=(7, 7))
        _, _, done, _ = env.step(Action.DROP)
        assert done
        with pytest.raises(ContractError):
            env.step(Action.UP)

    def test_over_burning_at_ignition_cell(self):
        env = FireEnv(scen())
        obs = env.reset(agent_start=(7, 7))
        assert obs.over_burning
        obs = env.reset(agent_start=(0, 0))
        assert not obs.over_burning


class TestMovement:
    def test_all_four_directions(self):
        env = fresh()
        env.reset(agent_start=(5, 5))
        for action, expected in ((Action.UP, (4, 5)), (Action.DOWN, (5, 5)),
                                 (Action.LEFT, (5, 4)), (Action.RIGHT, (5, 5))):
            obs, _, _, _ = env.step(action)
            assert obs.agent_pos == expected

    def test_clamped_at_edges(self):
        env = fresh()
        env.reset(agent_start=(0, 0))
        obs, _, _, _ = env.step(Action.UP)
        assert obs.agent_pos == (0, 0)
        obs, _, _, _ = env.step(Action.LEFT)
        assert obs.agent_pos == (0, 0)
        env.reset(agent_start=(14, 14))
        obs, _, _, _ = env.step(Action.DOWN)
        assert obs.agent_pos == (14, 14)
        obs, _, _, _ = env.step(Action.RIGHT)
        assert obs.agent_pos == (14, 14)

    def test_integer_actions_accepted(self):
        env = fresh()
        env.reset(agent_start=(5, 5))
        obs, _, _, _ = env.step(0)
        assert obs.agent_pos == (4, 5)


class TestObservation:
    def test_stack_shape_and_initial_copies(self):
        env = FireEnv(scen())
        obs = env.reset()
        assert len(obs.frames) == FRAME_STACK
        assert obs.stacked().shape == (FRAME_STACK, 2, 15, 15)
        for i in range(1, FRAME_STACK):
            assert np.array_equal(obs.frames[0], obs.frames[i])

    def test_newest_frame_tracks_engine(self):
        env = FireEnv(scen())
        obs = env.reset()
        for _ in range(20):
            obs, _, _, _ = env.step(Action.UP)
        phase = obs.frames[0][0]
        expected = np.zeros_like(phase)
        grid = env.engine.phase_grid()
        expected[grid == 1] = np.float32(2.0 / 3.0)
        expected[grid == 2] = np.float32(1.0)
        expected[grid == 3] = np.float32(1.0 / 3.0)
        assert np.array_equal(phase, expected)
        assert np.array_equal(
            obs.frames[0][1],
            env.engine.intensity_grid())

    def test_frames_are_newest_first(self):
        env = FireEnv(scen())
        env.reset()
        prev = None
        for _ in range(16):
            obs, _, _, _ = env.step(Action.UP)
            if prev is not None:
                assert np.array_equal(obs.frames[1], prev)
            prev = obs.frames[0].copy()

    def test_channel_values_in_unit_range(self):
        env = FireEnv(scen())
        obs = env.reset()
        for _ in range(40):
            obs, _, _, _ = env.step(Action.DOWN)
        stack = obs.stacked()
        assert stack.min() >= 0.0
        assert stack.max() <= 1.0

    def test_over_burning_matches_phase_channel(self):
        env = FireEnv(scen())
        obs = env.reset(agent_start=(7, 7))
        for _ in range(30):
            r, c = obs.agent_pos
            code = obs.frames[0][0][r, c]
            assert obs.over_burning == (code == np.float32(2.0 / 3.0))
            obs, _, done, _ = env.step(Action.RIGHT)
            if done:
                break


class TestRewards:
    def test_point_fire_containment(self):
        env = FireEnv(scen())
        env.reset(agent_start=(7, 7))
        obs, reward, done, info = env.step(Action.DROP)
        assert reward.extinguish == 1.0
        assert reward.waste_penalty == 0.0
        assert reward.idle_penalty == 0.0
        assert done
        assert env.log.outcome == OUTCOME_CONTAINED
        assert info["extinguished"] == 1

    def test_waste_penalty_on_empty_drop(self):
        env = FireEnv(scen())
        env.reset(agent_start=(0, 0))
        _, reward, _, _ = env.step(Action.DROP)
        assert reward.extinguish == 0.0
        assert reward.waste_penalty == -0.05
        assert reward.idle_penalty == 0.0

    def test_idle_penalty_on_moves(self):
        env = FireEnv(scen())
        env.reset(agent_start=(0, 0))
        _, reward, _, _ = env.step(Action.RIGHT)
        assert reward.idle_penalty == -0.005
        assert reward.extinguish == 0.0

    def test_proximity_bonus_within_radius(self):
        env = FireEnv(scen())
        env.reset(agent_start=(7, 12))   # Chebyshev 5 from the fire
        _, reward, _, _ = env.step(Action.UP)
        assert reward.proximity == 0.01
        env.reset(agent_start=(7, 14))   # Chebyshev 7, moving away keeps > 5
        _, reward, _, _ = env.step(Action.DOWN)
        assert reward.proximity == 0.0

    def test_containment_term_counts_ignitions_and_burnt_area(self):
        env = FireEnv(scen())
        env.reset(agent_start=(0, 0))
        seen_ignition_penalty = False
        for _ in range(40):
            _, reward, done, info = env.step(Action.DOWN)
            expected = -0.02 * info["newly_ignited"] \
                - 0.001 * info["burnt_count"] / (15 * 15)
            assert reward.containment == pytest.approx(expected, abs=1e-15)
            if info["newly_ignited"]:
                seen_ignition_penalty = True
            if done:
                break
        assert seen_ignition_penalty

    def test_total_is_exact_sum(self):
        env = FireEnv(scen())
        env.reset(agent_start=(7, 9))
        for i in range(60):
            action = Action.DROP if i % 3 == 0 else Action.LEFT
            _, reward, done, _ = env.step(action)
            assert reward.total == (reward.extinguish + reward.containment
                                    + reward.proximity + reward.idle_penalty
                                    + reward.waste_penalty)
            if done:
                break

    def test_custom_coefficients_apply(self):
        cfg = EnvConfig(waste_penalty=0.5, idle_penalty=0.1)
        env = FireEnv(scen(), config=cfg)
        env.reset(agent_start=(0, 0))
        _, reward, _, _ = env.step(Action.DROP)
        assert reward.waste_penalty == -0.5
        _, reward, _, _ = env.step(Action.RIGHT)
        assert reward.idle_penalty == -0.1

    def test_idle_policy_scores_below_successful_extinguisher(self):
        # Idle: park in the corner and never drop.
        idle_env = FireEnv(scen())
        idle_log = play(idle_env, lambda obs: Action.UP, agent_start=(0, 0))
        # Active: sit on the fire and put it out immediately.
        active_env = FireEnv(scen())
        active_log = play(active_env, lambda obs: Action.DROP,
                          agent_start=(7, 7))
        assert any(d["extinguished_count"] > 0 for d in active_log.drops)
        assert idle_log.reward_total <= active_log.reward_total


class TestEpisodeLog:
    def test_log_contents_after_containment(self):
        env = FireEnv(scen())
        env.reset(agent_start=(7, 6))
        env.step(Action.RIGHT)
        _, _, done, _ = env.step(Action.DROP)
        log = env.log
        assert done
        assert log.agent_start == (7, 6)
        assert log.actions == [int(Action.RIGHT), int(Action.DROP)]
        assert len(log.drops) == 1
        assert log.drops[0]["step"] == 2
        assert log.drops[0]["row"] == 7
        assert log.drops[0]["col"] == 7
        assert log.drops[0]["extinguished_count"] == 1
        assert log.outcome == OUTCOME_CONTAINED
        assert log.contained_at == 2

    def test_trajectories_align_with_steps(self):
        env = FireEnv(scen())
        env.reset(agent_start=(0, 0))
        steps = 0
        done = False
        while not done and steps < 200:
            _, _, done, _ = env.step(Action.DOWN)
            steps += 1
        log = env.log
        assert len(log.actions) == steps
        assert len(log.burnt_trajectory) == steps
        assert len(log.burning_trajectory) == steps
        assert all(b2 >= b1 for b1, b2 in
                   zip(log.burnt_trajectory, log.burnt_trajectory[1:]))

    def test_max_steps_outcome(self):
        env = FireEnv(scen(max_steps=3))
        env.reset(agent_start=(0, 0))
        done = False
        while not done:
            _, _, done, _ = env.step(Action.UP)
        assert env.log.outcome == OUTCOME_MAX_STEPS
        assert env.log.contained_at is None

    def test_round_trip_through_dict(self):
        env = FireEnv(scen())
        play(env, lambda obs: Action.DROP, agent_start=(7, 7))
        log = env.log
        back = EpisodeLog.from_dict(log.to_dict())
        assert back.to_dict() == log.to_dict()


class TestSuppressionThroughEnv:
    def test_drop_footprint_shows_in_phase_channel(self):
        env = FireEnv(scen())
        env.reset(agent_start=(2, 2))
        obs, _, _, _ = env.step(Action.DROP)
        box = obs.frames[0][0][0:5, 0:5]
        assert (box == np.float32(1.0 / 3.0)).sum() == 25
        grid = env.engine.phase_grid()
        assert (grid[0:5, 0:5] == SUPPRESSED).all()

    def test_full_playout_with_circling_drops_reduces_burn(self):
        # Sanity: dropping near the fire beats ignoring it on final burnt area.
        passive = FireEnv(scen())
        play(passive, lambda obs: Action.UP, agent_start=(0, 0))
        active = FireEnv(scen())

        def douse(obs):
            return Action.DROP

        play(active, douse, agent_start=(7, 7))
        p_burnt = passive.log.burnt_trajectory[-1] if passive.log.burnt_trajectory else 0
        a_burnt = active.log.burnt_trajectory[-1] if active.log.burnt_trajectory else 0
        assert a_burnt <= p_burnt
