import pytest

from protonas.config import SEED_ENV_VAR, build_config, default_config_yaml, load_config
from protonas.errors import ConfigError


def test_defaults_round_trip():
    import yaml

    doc = yaml.safe_load(default_config_yaml())
    cfg = build_config(doc, env={})
    base = build_config(None, env={})
    assert cfg.echo() == base.echo()
    assert cfg.search.trials == 500
    assert cfg.search.population_size == 50
    assert cfg.k == 5
    assert cfg.hss.population == 2000
    assert cfg.hss.mutation_rate == 0.3
    assert cfg.hss.generations == 10000
    assert cfg.search.space.gene_count() == 14


def test_echo_carries_protocol_shape():
    echo = build_config(None, env={}).echo()
    assert echo["search"]["trials"] == 500
    assert echo["space"]["gene_count"] == 14
    assert echo["search"]["objective_count"] == 5
    assert echo["hss"]["k"] == 5


def test_seed_precedence():
    # flag > explicit file value > environment > zero
    assert build_config(None, env={}).search.base_seed == 0
    assert build_config(None, env={SEED_ENV_VAR: "7"}).search.base_seed == 7
    doc = {"search": {"base_seed": 3}}
    assert build_config(doc, env={SEED_ENV_VAR: "7"}).search.base_seed == 3
    assert build_config(doc, seed_flag=11, env={SEED_ENV_VAR: "7"}).search.base_seed == 11
    with pytest.raises(ConfigError):
        build_config(None, env={SEED_ENV_VAR: "not-a-number"})


def test_partial_documents_merge_over_defaults():
    cfg = build_config({"search": {"trials": 60}}, env={})
    assert cfg.search.trials == 60
    assert cfg.search.population_size == 50
    assert cfg.search.profile.ram_max == 1024 * 1024


def test_unknown_fields_are_rejected():
    with pytest.raises(ConfigError, match="unknown field"):
        build_config({"serach": {}}, env={})
    with pytest.raises(ConfigError, match="search.trialz"):
        build_config({"search": {"trialz": 10}}, env={})


def test_type_errors_name_the_field():
    with pytest.raises(ConfigError, match="search.trials"):
        build_config({"search": {"trials": "many"}}, env={})
    with pytest.raises(ConfigError, match="jobs"):
        build_config({"jobs": 0}, env={})
    with pytest.raises(ConfigError, match="hss.k"):
        build_config({"hss": {"k": 0}}, env={})
    with pytest.raises(ConfigError):
        build_config({"task": {"num_classes": 1}}, env={})


def test_load_config_yaml_diagnostics(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("search: [unclosed\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(bad)
    missing = tmp_path / "missing.yaml"
    with pytest.raises(ConfigError):
        load_config(missing)
    good = tmp_path / "good.yaml"
    good.write_text("search:\n  trials: 64\n  population_size: 8\n")
    assert load_config(good, env={}).search.trials == 64


def test_config_hash_changes_with_content():
    from protonas.analysis import config_digest

    a = config_digest(build_config(None, env={}).echo())
    b = config_digest(build_config({"search": {"trials": 60}}, env={}).echo())
    assert a != b
