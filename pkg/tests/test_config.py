# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import pytest

from utils.config import DEFAULTS, deep_merge, load_config, solver_kwargs
from utils.general import ConfigError

CONFIGS = 'flat.yaml', 'paper-suite.yaml', 'perturb.yaml', 'schwarzschild-n4.yaml', 'slab-n4.yaml'


def test_defaults():
    cfg = load_config()
    assert cfg['dimension'] == 4 and cfg['checks'] == ['identities']
    assert cfg['foliation']['r0'] > 2 * cfg['foliation']['T_view']
    assert cfg is not DEFAULTS and cfg['solver'] is not DEFAULTS['solver']


def test_metric_section_replaced_whole():
    cfg = load_config(overrides={'metric': {'family': 'flat'}})
    assert cfg['metric'] == {'family': 'flat'}


def test_nested_merge():
    cfg = load_config(overrides={'solver': {'rtol': 1e-8}, 'checks': 'plateau'})
    assert cfg['solver']['rtol'] == 1e-8 and cfg['solver']['atol'] == DEFAULTS['solver']['atol']
    assert cfg['checks'] == ['plateau']
    assert deep_merge({'a': {'b': 1, 'c': 2}}, {'a': {'b': 3}}) == {'a': {'b': 3, 'c': 2}}


@pytest.mark.parametrize('overrides', [{'solver': {'rtol': -1.0}},
                                       {'colour': 'green'},
                                       {'schema_version': 2},
                                       {'dimension': 9},
                                       {'dimension': 4.0},
                                       {'metric': {'family': 'kerr'}},
                                       {'metric': {'family': 'schwarzschild', 'm': -2.0}},
                                       {'checks': ['nope']},
                                       {'foliation': {'z_grid': [1.0, 0.5]}},
                                       {'foliation': {'z_grid': []}},
                                       {'foliation': {'r_factor': 1.0}},
                                       {'foliation': {'r0': 40.0}},
                                       {'foliation': {'r_steps': 1}},
                                       {'perturbation': {'t': 1.5}},
                                       {'perturbation': {'t': 0.5, 'delta': 2.0}},
                                       {'perturbation': {'centers': [[5.0, 0.0]]}},
                                       {'perturbation': {'centers': [[5.0, 0.0, 0.0, 'x']]}},
                                       {'perturbation': {'centers': []}},
                                       {'perturbation': {'count': 0}},
                                       {'perturbation': {'count': 2.5}},
                                       {'perturbation': {'lam': 300.0}},
                                       {'stability': {'tests': [{'kind': 'wave'}]}},
                                       {'stability': {'tests': [{'kind': 'bump', 'a': 3.0, 'b': 1.0}]}},
                                       {'stability': {'tests': [{'kind': 'bump', 'a': 2.0, 'b': 1e9}]}},
                                       {'stability': {'tests': 'bump'}},
                                       {'stability': {'leaf_z': -1.0}},
                                       {'solver': {'root_method': 'newton'}}])
def test_invalid_config(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_unparsable_yaml(tmp_path):
    f = tmp_path / 'bad.yaml'
    f.write_text('foliation: [1, 2\n')
    with pytest.raises(ConfigError):
        load_config(f)


def test_non_mapping_yaml(tmp_path):
    f = tmp_path / 'list.yaml'
    f.write_text('- 1\n- 2\n')
    with pytest.raises(ConfigError):
        load_config(f)


def test_missing_file_and_suffix(tmp_path):
    with pytest.raises(ConfigError):
        load_config('no-such-config.yaml')
    f = tmp_path / 'cfg.txt'
    f.write_text('dimension: 4\n')
    with pytest.raises(ConfigError):
        load_config(f)


def test_json_config(tmp_path):
    f = tmp_path / 'cfg.json'
    f.write_text('{"dimension": 5, "metric": {"family": "hat"}}')
    cfg = load_config(f)
    assert cfg['dimension'] == 5 and cfg['metric'] == {'family': 'hat'}


def test_solver_kwargs():
    cfg = load_config()
    kw = solver_kwargs(cfg, 100.0)
    assert kw['t_start'] == pytest.approx(1e-4) and kw['method'] == 'bisect' and kw['shoot_tol'] is None
    assert 't_start' not in solver_kwargs(cfg)


@pytest.mark.parametrize('name', CONFIGS)
def test_shipped_configs(name, data_dir):
    cfg = load_config(data_dir / name)
    assert cfg['schema_version'] == 1
