# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Experiment configuration: YAML (or JSON) files deep-merged over DEFAULTS and validated before any run

Usage:
    from utils.config import load_config
    cfg = load_config('data/schwarzschild-n4.yaml', {'seed': 1})
"""

import copy

import yaml

from models.ambient import FAMILIES, build_metric
from utils.general import LOGGER, ConfigError, check_yaml, colorstr, yaml_load
from utils.surfaces import InvalidTestFunction, build_test_function

SCHEMA_VERSION = 1
PREFIX = colorstr('config: ')
TASKS = 'plateau', 'foliate', 'verify', 'mass', 'stability', 'perturb', 'report'

DEFAULTS = {
    'schema_version': SCHEMA_VERSION,
    'dimension': 4,
    'metric': {'family': 'schwarzschild', 'm': 2.0},  # replaced as a whole, never merged
    'solver': {
        'rtol': 1e-10,  # DOP853 local relative tolerance
        'atol': 1e-12,
        't_start_factor': 1e-6,  # axis offset t_start = factor·max(1, r)
        'shoot_tol': None,  # |f(r) - z| target, None for 1e-9·max(1, |z|)
        'max_iter': 200,
        'max_expand': 8,
        'root_method': 'bisect'},
    'plateau': {'r': 100.0, 'z': 1.0},
    'foliation': {
        'z_grid': [0.5, 1.0, 2.0, 4.0, 8.0],
        'r0': 64.0,  # first radius must exceed 2·T_view
        'r_factor': 2.0,
        'r_steps': 16,  # sup-differences shrink like 1/r
        'T_view': 25.0,
        'tol': 1e-6},
    'checks': ['identities'],
    'mass': {'radii': [8.0 * 2 ** k for k in range(7)], 'order': 32},
    'stability': {'tests': [{'kind': 'bump', 'a': 2.0, 'b': 8.0, 'height': 1.0},
                            {'kind': 'bump', 'a': 4.0, 'b': 12.0, 'height': 0.5, 'accel': 0.25}],
                  'leaf_z': 1.0},
    'perturbation': {
        'r': 0.5,
        'lam': 20.0,
        'centers': None,  # None for a chain of `count` centers along +e1 from |q1| = 5
        'count': 2,
        't': 0.5,
        'delta': 0.1},
    'seed': 0}


def deep_merge(base, update, replace=('metric',)):
    # copy of base with update merged in recursively, dicts only; keys in replace are overwritten whole
    out = copy.deepcopy(base)
    for k, v in (update or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in replace:
            out[k] = deep_merge(out[k], v, replace)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _positive(cfg, *keys):
    for key in keys:
        section, name = key.split('.')
        v = cfg[section].get(name)
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f'{key} must be positive, got {v!r}')


def _increasing(name, seq, positive=True):
    seq = list(seq or [])
    if not seq:
        raise ConfigError(f'{name} must be a non-empty list')
    if not all(isinstance(v, (int, float)) for v in seq):
        raise ConfigError(f'{name} must contain numbers, got {seq}')
    if positive and min(seq) <= 0:
        raise ConfigError(f'{name} must be positive, got {seq}')
    if any(b <= a for a, b in zip(seq[:-1], seq[1:])):
        raise ConfigError(f'{name} must increase strictly, got {seq}')


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_perturbation(p, n):
    # bump chain section, the chain field is normalized to min v = -1 so 1 + t·δ·v > 0 needs t·δ < 1
    if not _number(p['t']) or not 0 < p['t'] < 1:
        raise ConfigError(f"perturbation.t must lie in (0, 1), got {p['t']!r}")
    if not p['t'] * p['delta'] < 1:
        raise ConfigError(f"perturbation.t·delta must stay below 1, got {p['t']}·{p['delta']}")
    if not p['lam'] * 6 * p['r'] < 700:
        raise ConfigError(f"perturbation.lam·6r={p['lam'] * 6 * p['r']:g} overflows, must stay below 700")
    centers = p['centers']
    if centers is None:
        if not isinstance(p['count'], int) or isinstance(p['count'], bool) or p['count'] < 1:
            raise ConfigError(f"perturbation.count must be an integer >= 1, got {p['count']!r}")
        return
    if not isinstance(centers, list) or not centers:
        raise ConfigError(f'perturbation.centers must be null or a non-empty list of points, got {centers!r}')
    for q in centers:
        if not isinstance(q, list) or len(q) != n or not all(_number(v) for v in q):
            raise ConfigError(f'perturbation.centers entries must be points of R^{n}, got {q!r}')


def _check_stability(s, fol):
    # stability test functions must build and fit inside the resolved range r_last/4 of the leaves
    if not _number(s['leaf_z']) or s['leaf_z'] <= 0:
        raise ConfigError(f"stability.leaf_z must be positive, got {s['leaf_z']!r}")
    tests = s['tests']
    if not isinstance(tests, list):
        raise ConfigError(f'stability.tests must be a list, got {tests!r}')
    T = fol['r0'] * fol['r_factor'] ** (fol['r_steps'] - 1) / 4
    for i, d in enumerate(tests):
        try:
            u = build_test_function(d)
        except InvalidTestFunction as e:
            raise ConfigError(f'stability.tests[{i}]: {e}') from e
        a, b = u.support
        if u.compact and not (a >= 0 and b <= T):
            raise ConfigError(f'stability.tests[{i}] support [{a:g}, {b:g}] must lie in the resolved range '
                              f'[0, {T:g}]')


def check_config(cfg):
    """
    Validate a merged config: schema version, metric family, dimension range, positive tolerances, increasing
    schedules, the perturbation and stability sections and known suite names. Raises ConfigError, returns cfg.
    """
    from utils.suites import SUITES  # suites import the config layer

    if cfg.get('schema_version') != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.get('schema_version')!r}, expected {SCHEMA_VERSION}")
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f'unknown config keys {unknown}')
    n = cfg['dimension']
    if not isinstance(n, int) or not 3 <= n <= 7:
        raise ConfigError(f'dimension must be an integer in [3, 7], got {n!r}')
    family = (cfg['metric'] or {}).get('family')
    if family not in FAMILIES:
        raise ConfigError(f"unknown metric family {family!r}, available: {sorted(FAMILIES)}")
    build_metric(cfg['metric'], n)  # parameter check, raises ConfigError
    _positive(cfg, 'solver.rtol', 'solver.atol', 'solver.t_start_factor', 'solver.shoot_tol', 'solver.max_iter',
              'foliation.T_view', 'foliation.tol', 'foliation.r0', 'plateau.r', 'mass.order',
              'perturbation.r', 'perturbation.lam', 'perturbation.delta')
    if cfg['solver']['root_method'] not in ('bisect', 'brentq'):
        raise ConfigError(f"solver.root_method must be 'bisect' or 'brentq', got {cfg['solver']['root_method']!r}")
    if not cfg['foliation']['r_factor'] > 1:
        raise ConfigError(f"foliation.r_factor must exceed 1, got {cfg['foliation']['r_factor']!r}")
    if not isinstance(cfg['foliation']['r_steps'], int) or cfg['foliation']['r_steps'] < 2:
        raise ConfigError(f"foliation.r_steps must be an integer >= 2, got {cfg['foliation']['r_steps']!r}")
    if not cfg['foliation']['r0'] > max(2.0, 2 * cfg['foliation']['T_view']):
        raise ConfigError(f"foliation.r0 must exceed max(2, 2·T_view), got {cfg['foliation']['r0']!r}")
    _increasing('foliation.z_grid', cfg['foliation']['z_grid'])
    _increasing('mass.radii', cfg['mass']['radii'])
    _check_perturbation(cfg['perturbation'], n)
    _check_stability(cfg['stability'], cfg['foliation'])
    checks = cfg['checks'] if isinstance(cfg['checks'], list) else [cfg['checks']]
    missing = [c for c in checks if c not in SUITES]
    if missing:
        raise ConfigError(f'unknown suites {missing}, available: {sorted(SUITES)}')
    cfg['checks'] = checks
    return cfg


def load_config(path=None, overrides=None):
    """
    Load a YAML/JSON config, deep-merge it over DEFAULTS, apply overrides and validate. Raises ConfigError for
    missing files, bad suffixes, unparsable YAML and failed validation.
    """
    d = {}
    if path:
        try:
            file = check_yaml(path)
            d = yaml_load(file) or {}
        except AssertionError as e:  # suffix check
            raise ConfigError(str(e)) from e
        except yaml.YAMLError as e:
            raise ConfigError(f'cannot parse {path}: {e}') from e
        if not isinstance(d, dict):
            raise ConfigError(f'{path} must hold a mapping, got {type(d).__name__}')
        LOGGER.debug(f'{PREFIX}loaded {file}')
    cfg = deep_merge(deep_merge(DEFAULTS, d), overrides)
    return check_config(cfg)


def solver_kwargs(cfg, r=None):
    # ShootingProblem keyword arguments from the solver section
    s = cfg['solver']
    kw = {'rtol': s['rtol'], 'atol': s['atol'], 'max_iter': s['max_iter'], 'max_expand': s['max_expand'],
          'method': s['root_method'], 'shoot_tol': s['shoot_tol']}
    if r is not None:
        kw['t_start'] = s['t_start_factor'] * max(1.0, r)
    return kw
