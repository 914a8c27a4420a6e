import numpy as np
import pytest

import vvcgym
from vvcgym import Box, ClosedEnv, Discrete, LaunchError, RemoteError


def noop(env):
    out = []
    for slot, space in zip(env.slot_specs, env.action_space.spaces):
        if slot["kind"] == "cap":
            out.append(1)
        elif slot["kind"] == "reg":
            out.append(space.n - 1)
        else:
            out.append((space.n - 1) // 2 if isinstance(space, Discrete) else 0.0)
    return out


def test_make_and_spaces():
    with vvcgym.make("13Bus") as env:
        assert env.action_dim == 6
        assert len(env.action_space) == 6
        kinds = [s["kind"] for s in env.slot_specs]
        assert kinds == ["cap", "cap", "reg", "reg", "reg", "bat"]
        assert env.action_space.spaces[0] == Discrete(2)
        assert env.action_space.spaces[2] == Discrete(33)
        assert env.action_space.spaces[5] == Discrete(33)
        assert env.observation_space.shape == (env.obs_dim,)


def test_continuous_battery_slot():
    with vvcgym.make("13Bus_cbat", worker_idx=0) as env:
        bat = env.action_space.spaces[-1]
        assert isinstance(bat, Box)
        assert (bat.low, bat.high) == (-1.0, 1.0)
        assert bat.contains(0.3) and not bat.contains(1.5)


def test_reset_step_episode():
    with vvcgym.make("13Bus") as env:
        obs = env.reset()
        assert obs.shape == (env.obs_dim,)
        for i in range(24):
            obs, reward, done, info = env.step(noop(env))
            assert isinstance(reward, float)
            assert done == (i == 23)
            assert "f_volt" in info
        with pytest.raises(RemoteError) as exc:
            env.step(noop(env))
        assert exc.value.code == "EpisodeOver"


def test_five_tuple_mode():
    with vvcgym.make("13Bus", five_tuple=True) as env:
        env.reset()
        obs, reward, terminated, truncated, info = env.step(noop(env))
        assert truncated is False and terminated is False
        assert isinstance(info, dict)


def test_action_space_sampling_round_trips():
    rng = np.random.default_rng(0)
    with vvcgym.make("13Bus") as env:
        env.reset()
        for _ in range(10):
            act = env.action_space.sample(rng)
            assert env.action_space.contains(act)
            env.step(act)
            if env.done:
                env.reset()


def test_seed_controls_nothing_client_side_but_round_trips():
    with vvcgym.make("13Bus") as env:
        env.seed(42)  # accepted by the server without error
        env.reset(1)


def test_unknown_system_passthrough():
    with pytest.raises(RemoteError) as exc:
        vvcgym.make("NoSuchBus")
    assert exc.value.code == "UnknownSystem"


def test_unknown_profile_passthrough():
    with vvcgym.make("13Bus") as env:
        with pytest.raises(RemoteError) as exc:
            env.reset(10_000)
        assert exc.value.code == "UnknownProfile"


def test_launch_error(monkeypatch):
    monkeypatch.setenv("VVC_BIN", "/no/such/binary")
    with pytest.raises(LaunchError):
        vvcgym.make("13Bus")


def test_close_reaps_child_and_blocks_reuse():
    env = vvcgym.make("13Bus")
    proc = env._proc
    env.close()
    assert proc.poll() is not None  # no zombie
    with pytest.raises(ClosedEnv):
        env.reset()
    env.close()  # idempotent


def test_handles_are_independent():
    with vvcgym.make("13Bus", worker_idx=1) as a, vvcgym.make("13Bus", worker_idx=2) as b:
        oa = a.reset(0)
        ob = b.reset(1)
        assert not np.array_equal(oa, ob)
        a.step(noop(a))
        assert np.array_equal(b.reset(1), ob)  # b unaffected by a's step
