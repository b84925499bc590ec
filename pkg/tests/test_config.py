import pytest

from insmap.config import RunConfig, dump_config, load_config, parse_config, with_overrides

from conftest import NOISELESS_CFG


def test_parse_and_override(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nseed = 3\nstrategy = max-gap  # trailing\n\nlidar.max_range = 2.5\n"
                 "slam_params.particles = 100\n")
    cfg = load_config(p)
    assert (cfg.seed, cfg.strategy, cfg.lidar.max_range, cfg.slam_params.particles) == (3, "max-gap", 2.5, 100)
    assert cfg.motion == RunConfig().motion


def test_dump_round_trips():
    cfg = with_overrides(RunConfig(), {"seed": "9", "motion.slip_probability": "0.2", "slam": "particle"})
    assert with_overrides(RunConfig(), parse_config(dump_config(cfg))) == cfg


def test_noiseless_file_matches_constructor():
    assert load_config(NOISELESS_CFG) == RunConfig.noiseless()


@pytest.mark.parametrize("text,exc", [
    ("nope = 1", KeyError), ("lidar.nope = 1", KeyError), ("seed.x = 1", KeyError),
    ("seed 3", ValueError), ("seed = x", ValueError), ("strategy = random", ValueError),
    ("slam = ekf", ValueError), ("max_steps = 0", ValueError), ("lidar.max_range = -1", ValueError),
])
def test_bad_config(text, exc):
    with pytest.raises(exc):
        with_overrides(RunConfig(), parse_config(text))
