# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import time

import pytest

from models.ambient import FlatMetric
from utils.callbacks import Callbacks
from utils.config import load_config
from utils.reports import CheckReport
from utils.suites import SUITES, SuiteContext, run_suite, tag

NAMES = ['metric', 'plateau', 'identities', 'foliation', 'slab', 'asymptotics', 'perturbation', 'stability']


@pytest.fixture
def flat_ctx():
    return SuiteContext(load_config(overrides={'metric': {'family': 'flat'}}))


def test_registry():
    assert set(NAMES) | {'paper'} <= set(SUITES)
    for name in NAMES:
        assert SUITES[name] and all(fn in SUITES['paper'] for fn in SUITES[name])


def test_tag():
    reports = tag([CheckReport.flag('a', 'x', True), CheckReport.flag('b', 'x', True)], 'n4-z1')
    assert [r.name for r in reports] == ['a@n4-z1', 'b@n4-z1']


def test_context(flat_ctx):
    assert isinstance(flat_ctx.metric, FlatMetric) and flat_ctx.n == flat_ctx.cfg['dimension']
    schedule = flat_ctx.schedule
    assert len(schedule) == flat_ctx.cfg['foliation']['r_steps'] and schedule[1] > schedule[0]
    assert flat_ctx.solver(100.0)['rtol'] == flat_ctx.cfg['solver']['rtol']


def test_run_suite_order_and_timing(flat_ctx, monkeypatch):
    def first(ctx):
        time.sleep(0.01)
        return CheckReport.flag('first', 'x', True)

    checks = [first,
              lambda ctx: [CheckReport.flag('second', 'x', True), CheckReport.flag('third', 'x', False)]]
    monkeypatch.setitem(SUITES, 'dummy', checks)
    reports = run_suite('dummy', flat_ctx)
    assert [r.name for r in reports] == ['first', 'second', 'third']
    assert [r.passed for r in reports] == [True, True, False]
    assert reports[0].runtime > 0


def test_stop_run(monkeypatch):
    seen = []

    def stop(report):
        seen.append(report.name)
        callbacks.stop_run = True

    callbacks = Callbacks()
    callbacks.register_action('on_check_end', 'stop', stop)
    ctx = SuiteContext(load_config(overrides={'metric': {'family': 'flat'}}), callbacks=callbacks)
    monkeypatch.setitem(SUITES, 'dummy', [lambda ctx: CheckReport.flag('first', 'x', True),
                                          lambda ctx: CheckReport.flag('second', 'x', True)])
    assert [r.name for r in run_suite('dummy', ctx)] == ['first']
    assert seen == ['first']


def test_unknown_suite(flat_ctx):
    with pytest.raises(AssertionError):
        run_suite('missing', flat_ctx)
