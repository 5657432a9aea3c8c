import json

import pytest

from barriernet.config import RunConfig, config_from_dict, parse_config, parse_config_text
from barriernet.errors import ConfigError

MINIMAL = "[lichnerowicz]\ntau2 = 12\nsigma2 = \"1\"\n"


def test_minimal_config_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.grid.n == (257,)
    assert (cfg.schedule.eps_0, cfg.schedule.ratio, cfg.schedule.count) == (0.5, 0.5, 8)
    assert cfg.iteration.tol_sup == 1e-10
    assert cfg.mollifier.kind == "vanishing-moment" and cfg.mollifier.K == 4
    assert cfg.mollifier.extension == "natural"


def test_problem_terms_parsed():
    text = """
[grid]
n = 33
[problem]
a = "1 + x"
rho = "1"
[[problem.terms]]
exponent = 3
coefficient = "1"
[[problem.terms]]
exponent = -1
coefficient = -2
"""
    spec = parse_config_text(text).problem_spec()
    assert spec.exponents == [-1, 3]


def test_duplicate_exponents_rejected():
    text = '[problem]\n[[problem.terms]]\nexponent = 0\ncoefficient = "1"\n[[problem.terms]]\nexponent = 0\ncoefficient = "2"\n'
    with pytest.raises(ConfigError, match="distinct"):
        parse_config_text(text)


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"turbo.*line 4"):
        parse_config_text(MINIMAL + "turbo = true\n")


def test_unknown_section_rejected():
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL + "[warp]\nspeed = 9\n")


def test_malformed_expression_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text('[lichnerowicz]\nsigma2 = "sqrt(x)"\n')


def test_missing_problem_block():
    with pytest.raises(ConfigError):
        parse_config_text("[grid]\nn = 33\n").problem_spec()


def test_short_schedule_rejected():
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL + "[schedule]\ncount = 2\n")


def test_malformed_toml():
    with pytest.raises(ConfigError):
        parse_config_text("[grid\nn = 3")


def test_two_dimensional_default_kernel():
    cfg = parse_config_text("[grid]\ndim = 2\nextents = [[0, 1], [0, 1]]\nn = [9, 9]\n" + MINIMAL)
    assert cfg.mollifier.kind == "positive-bump"


def test_manifest_round_trip(tmp_path):
    cfg = parse_config_text(MINIMAL + "[grid]\nn = 65\n[critical]\nm = 7\ni = 2\n")
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"config_hash": cfg.hash(), "config": cfg.to_dict()}))
    again = parse_config(path)
    assert again == cfg
    assert again.hash() == cfg.hash()
    assert config_from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_toml_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(MINIMAL)
    assert isinstance(parse_config(path), RunConfig)
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.toml")
