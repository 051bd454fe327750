import pytest

from tripletstdp.config import ConfigError, load_config
from tripletstdp.presets import HIPPOCAMPAL_STYLE, VISUAL_CORTEX_STYLE
from tripletstdp.rules import PairParams, SuppressionParams


def test_defaults():
    cfg = load_config(None)
    assert cfg.version == 1 and cfg.seed == 0
    assert cfg.rule.build() == HIPPOCAMPAL_STYLE
    assert cfg.window.dt_ms[0] == -100.0 and 0.0 not in cfg.window.dt_ms


def test_shipped_configs_load(configs_dir):
    for path in sorted(configs_dir.glob("*.yaml")):
        load_config(path).rule.build()


def test_default_yaml_matches_built_in_defaults(configs_dir):
    assert load_config(configs_dir / "default.yaml") == load_config(None)


def test_aliases_map_to_model_names():
    cfg = load_config({"rule": {"preset": "visual-cortex-style",
                                "params": {"I_pot2": 0.02, "I_tp2": 0.04}}})
    p = cfg.rule.build()
    assert p.a3_plus == 0.02 and p.tau_y == 0.04
    assert p.a2_minus == VISUAL_CORTEX_STYLE.a2_minus


def test_alias_and_model_name_clash():
    with pytest.raises(ConfigError, match="rule.params"):
        load_config({"rule": {"params": {"I_pot1": 0.01, "a2_plus": 0.02}}})


def test_pair_and_suppressive_rules():
    pair = load_config({"rule": {"kind": "pair"}}).rule.build()
    assert isinstance(pair, PairParams) and pair.a_plus == HIPPOCAMPAL_STYLE.a2_plus
    sup = load_config({"rule": {"kind": "suppressive", "tau_s": 0.028,
                                "params": {"a_plus": 0.01}}}).rule.build()
    assert isinstance(sup, SuppressionParams) and sup.pair.a_plus == 0.01
    with pytest.raises(ConfigError, match="tau_s"):
        load_config({"rule": {"kind": "suppressive"}}).rule.build()
    with pytest.raises(ConfigError):
        load_config({"rule": {"kind": "pair", "params": {"tau_x": 0.1}}}).rule.build()


@pytest.mark.parametrize("data,key", [
    ({"windw": {}}, "windw"),
    ({"window": {"dt": [1]}}, "window.dt"),
    ({"rule": {"params": {"I_pot9": 1.0}}}, "rule.params"),
    ({"rule": {"preset": "cortex"}}, "rule.preset"),
    ({"fit": {"mask": "everything"}}, "fit.mask"),
    ({"bcm": {"mode": "sideways"}}, "bcm.mode"),
    ({"version": 2}, "version"),
    ({"seed": "abc"}, "seed"),
])
def test_errors_name_the_key(data, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(data)


def test_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("rule: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_digest_tracks_content():
    a, b = load_config({"seed": 1}), load_config({"seed": 2})
    assert a.digest() != b.digest() and a.digest() == load_config({"seed": 1}).digest()
