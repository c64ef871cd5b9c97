# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Check reports: named verifications with measured values, tolerance and pass/fail status
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from utils.general import LOGGER, Profile, colorstr


def _clean(x):
    # JSON-safe copy: numpy scalars and arrays to python, non-finite floats to strings
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


@dataclass
class CheckReport:
    """
    One verification. passed is derived from the measured value and the tolerance by the constructors below and
    never set independently of them.
    """
    name: str
    anchor: str
    value: float
    tolerance: float
    passed: bool
    measured: dict = field(default_factory=dict)
    runtime: float = 0.0

    def __post_init__(self):
        assert self.anchor, f'check {self.name} needs a non-empty anchor'

    @classmethod
    def residual(cls, name, anchor, value, tol, **measured):
        # passes when a non-negative residual is below tol
        return cls(name, anchor, float(value), float(tol), bool(np.isfinite(value) and value < tol), measured)

    @classmethod
    def margin(cls, name, anchor, value, tol=0.0, **measured):
        # passes when a signed margin is above -tol
        return cls(name, anchor, float(value), float(tol), bool(np.isfinite(value) and value >= -tol), measured)

    @classmethod
    def flag(cls, name, anchor, ok, **measured):
        # boolean property: value 1 when it holds
        return cls(name, anchor, float(bool(ok)), 0.5, bool(ok), measured)

    @classmethod
    def finding(cls, name, anchor, value, **measured):
        # reported value without a pass/fail gate
        return cls(name, anchor, float(value), float('inf'), True, {'gated': False, **measured})

    def to_dict(self, timings=False):
        d = {'name': self.name, 'anchor': self.anchor, 'value': self.value, 'tolerance': self.tolerance,
             'passed': self.passed, 'measured': self.measured}
        if timings:
            d['runtime'] = self.runtime
        return _clean(d)

    def log(self):
        s = colorstr('green', 'pass') if self.passed else colorstr('red', 'FAIL')
        LOGGER.info(f'{s} {self.name:<32} value={self.value:<12.4g} tol={self.tolerance:<10.3g} {self.anchor}')


def timed(fn, *args, **kwargs):
    # run a check function and stamp runtime on the returned report(s)
    with Profile() as dt:
        out = fn(*args, **kwargs)
    for r in out if isinstance(out, list) else [out]:
        if isinstance(r, CheckReport):
            r.runtime = dt.t
    return out


def save_reports(reports, file, timings=False):
    # Save a CheckReport list as a JSON array
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    with open(file, 'w') as f:
        json.dump([r.to_dict(timings) for r in reports], f, indent=2, sort_keys=True)
    return file


def save_json(d, file):
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    with open(file, 'w') as f:
        json.dump(_clean(d), f, indent=2, sort_keys=True)
    return file


def aggregate(paths):
    """
    Aggregate CheckReport JSON arrays into one summary with global pass/fail. Files that are not report arrays
    (summaries, foliation JSON) are skipped.
    """
    checks = []
    for p in sorted(Path(x) for x in paths):
        with open(p) as f:
            data = json.load(f)
        if isinstance(data, list) and all(isinstance(d, dict) and 'passed' in d for d in data):
            checks.extend({**d, 'source': p.name} for d in data)
    failed = [c['name'] for c in checks if not c['passed']]
    return {'checks': checks, 'total': len(checks), 'failed': len(failed), 'failed_names': failed,
            'passed': not failed}
