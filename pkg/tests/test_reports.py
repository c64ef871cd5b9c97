# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import json
import math

import pytest

from utils.reports import CheckReport, aggregate, save_json, save_reports, timed


def test_constructors():
    assert CheckReport.residual('a', 'anchor', 0.5, 1.0).passed
    assert not CheckReport.residual('a', 'anchor', 1.0, 1.0).passed
    assert not CheckReport.residual('a', 'anchor', math.nan, 1.0).passed
    assert CheckReport.margin('b', 'anchor', -0.1, 0.2).passed
    assert not CheckReport.margin('b', 'anchor', -0.3, 0.2).passed
    flag = CheckReport.flag('c', 'anchor', False)
    assert not flag.passed and flag.value == 0.0 and flag.tolerance == 0.5
    finding = CheckReport.finding('d', 'anchor', -7.0, k=1)
    assert finding.passed and finding.tolerance == math.inf
    assert finding.measured == {'gated': False, 'k': 1}


def test_anchor_required():
    with pytest.raises(AssertionError):
        CheckReport.residual('a', '', 0.0, 1.0)


def test_to_dict():
    r = CheckReport.residual('a', 'anchor', 0.5, 1.0, values=[1.0, math.nan], flat=math.inf)
    r.runtime = 1.5
    d = r.to_dict()
    assert 'runtime' not in d
    assert d['measured'] == {'values': [1.0, 'nan'], 'flat': 'inf'}
    assert r.to_dict(timings=True)['runtime'] == 1.5
    assert CheckReport.finding('d', 'anchor', 1.0).to_dict()['tolerance'] == 'inf'


def test_timed():
    out = timed(lambda: [CheckReport.flag('a', 'anchor', True), CheckReport.flag('b', 'anchor', True)])
    assert all(r.runtime >= 0 for r in out)
    assert timed(CheckReport.flag, 'c', 'anchor', True).name == 'c'


def test_save_and_aggregate(tmp_path):
    f1 = save_reports([CheckReport.flag('a', 'anchor', True), CheckReport.flag('b', 'anchor', False)],
                      tmp_path / 'one.json')
    f2 = save_reports([CheckReport.residual('c', 'anchor', 0.0, 1.0)], tmp_path / 'sub' / 'two.json')
    f3 = save_json({'leaves': [], 'z': 1.0}, tmp_path / 'foliation.json')
    summary = aggregate([f3, f2, f1])
    assert summary['total'] == 3 and summary['failed'] == 1
    assert summary['failed_names'] == ['b'] and not summary['passed']
    assert [c['source'] for c in summary['checks']] == ['one.json', 'one.json', 'two.json']
    assert json.loads(f1.read_text())[0]['name'] == 'a'


def test_save_reports_deterministic(tmp_path):
    reports = [CheckReport.residual('a', 'anchor', 0.25, 1.0, z=[0.5, 1.0])]
    a = save_reports(reports, tmp_path / 'a.json').read_text()
    b = save_reports(reports, tmp_path / 'b.json').read_text()
    assert a == b
