import pytest

from voltvar.circuit import validate_radial

from voltvar.devices import CONTINUOUS
from voltvar.errors import (DuplicateName, InvalidSpec, MalformedScale,
                            UnknownSystem)
from voltvar.registry import (EnvName, EnvSpec, format_env_name, get_spec,
                              list_envs, make_env, parse_env_name, register,
                              registered_systems)


def test_bundled_systems_present():
    systems = registered_systems()
    for name in ("13Bus", "34Bus", "123Bus", "8500Node"):
        assert name in systems


def test_parse_name_variants():
    assert parse_env_name("13Bus") == EnvName("13Bus")
    assert parse_env_name("13Bus_cbat") == EnvName("13Bus", cbat=True)
    assert parse_env_name("13Bus_soc") == EnvName("13Bus", soc=True)
    assert parse_env_name("13Bus_cbat_soc") == EnvName("13Bus", cbat=True, soc=True)
    assert parse_env_name("13Bus_s2.5") == EnvName("13Bus", scale=2.5)
    assert parse_env_name("34Bus_cbat_soc_s1.5") == \
        EnvName("34Bus", cbat=True, soc=True, scale=1.5)


def test_parse_format_round_trip():
    for name in ("13Bus", "34Bus_cbat", "123Bus_soc", "13Bus_cbat_soc",
                 "34Bus_s2", "13Bus_cbat_soc_s2.5"):
        assert format_env_name(parse_env_name(name)) == name


def test_parse_errors():
    with pytest.raises(UnknownSystem):
        parse_env_name("99Bus")
    with pytest.raises(MalformedScale):
        parse_env_name("13Bus_sxyz")
    with pytest.raises(MalformedScale):
        parse_env_name("13Bus_s-1")


def test_register_rejects_duplicates():
    spec = get_spec("13Bus")
    with pytest.raises(DuplicateName):
        register("13Bus", spec)
    with pytest.raises(InvalidSpec):
        EnvSpec("x", "x.json", max_episode_steps=0).validate()


def test_list_envs_covers_variants():
    names = list_envs()
    for base in registered_systems():
        for variant in (base, f"{base}_cbat", f"{base}_soc", f"{base}_cbat_soc"):
            assert variant in names


def test_make_env_13bus_weights():
    env = make_env("13Bus")
    cfg = env.config
    assert cfg.w_power == 10.0
    assert cfg.w_cap == 1.0 / 33
    assert cfg.w_reg == 1.0 / 33
    assert cfg.w_dis == 6.0 / 33
    assert cfg.w_soc == 0.0
    assert cfg.horizon == 24
    assert cfg.bat_mode == 33
    assert env.profiles.n_profiles == 48


def test_make_env_soc_variant_swaps_pair():
    env = make_env("13Bus_soc")
    assert env.config.w_dis == 1.0 / 33
    assert env.config.w_soc == 100.0 / 33
    env34 = make_env("34Bus_soc")
    assert env34.config.w_dis == 4.0 / 33
    assert env34.config.w_soc == 500.0 / 33


def test_make_env_cbat_is_continuous():
    env = make_env("13Bus_cbat")
    assert env.config.bat_mode == CONTINUOUS
    assert all(s.type == "continuous" for s in env.action_slots() if s.kind == "bat")


def test_make_env_scale_multiplies_profiles():
    base = make_env("13Bus")
    scaled = make_env("13Bus_s2.5")
    key = base.profiles.keys[0]
    assert scaled.profiles.multiplier(0, key, 5) == \
        pytest.approx(2.5 * base.profiles.multiplier(0, key, 5))


def test_worker_isolation():
    a = make_env("13Bus", worker_idx=1)
    b = make_env("13Bus", worker_idx=2)
    a.reset(0)
    b.reset(0)
    assert a.random_action() != b.random_action()
    # same worker index gives the same stream
    c = make_env("13Bus", worker_idx=1)
    c.reset(0)
    assert make_env("13Bus", worker_idx=1).random_action() == c.random_action()


def test_generated_systems_load_and_count():
    env123 = make_env("123Bus")
    assert len(env123.circuit.buses) == 123
    assert env123.cap_ids and env123.reg_ids and env123.bat_ids
    assert not validate_radial(env123.circuit)


def test_spec_fidelity_all_systems():
    expect = {
        "13Bus": (10.0, 6.0 / 33, 1.0 / 33, 100.0 / 33),
        "34Bus": (1.0, 10.0 / 33, 4.0 / 33, 500.0 / 33),
        "123Bus": (10.0, 7.0 / 33, 5.0 / 33, 500.0 / 33),
        "8500Node": (1.0, 200.0 / 33, 200.0 / 33, 10000.0 / 33),
    }
    for base, (pw, dw, sdw, ssw) in expect.items():
        spec = get_spec(base)
        assert spec.power_w == pw
        assert spec.dis_w == dw
        assert spec.soc_variant_dis_w == sdw
        assert spec.soc_variant_soc_w == ssw
        assert spec.cap_w == 1.0 / 33 and spec.reg_w == 1.0 / 33
        assert spec.max_episode_steps == 24
        assert spec.reg_act_num == 33 and spec.bat_act_num == 33
