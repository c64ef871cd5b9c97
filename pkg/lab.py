# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Run minleaf experiments and verification suites

Usage:
    $ python path/to/lab.py plateau --config data/flat.yaml                    # one Plateau problem, profile.csv
    $ python path/to/lab.py foliate --config data/schwarzschild-n4.yaml --jobs 4 --plots
    $ python path/to/lab.py verify --config data/paper-suite.yaml --suite identities
    $ python path/to/lab.py mass --config data/schwarzschild-n4.yaml
    $ python path/to/lab.py stability --config data/schwarzschild-n4.yaml
    $ python path/to/lab.py perturb --config data/perturb.yaml
    $ python path/to/lab.py report --out runs/                                  # aggregate every JSON under runs/

Exit status: 0 all checks pass, 1 at least one check fails, 2 configuration or numerical-infrastructure error.
"""

import argparse
import os
import sys
from pathlib import Path

FILE = Path(__file__).resolve()
ROOT = FILE.parents[0]  # minleaf root directory
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))  # add ROOT to PATH
ROOT = Path(os.path.relpath(ROOT, Path.cwd()))  # relative

from models.ambient import HatLocalizedMetric, SchwarzschildMetric
from utils.bounds import induced_mass, induced_mass_check
from utils.callbacks import Callbacks
from utils.config import TASKS, load_config
from utils.curvature import adm_mass, adm_mass_check
from utils.foliation import foliation_scan, inf_height_check, leaf_checks, oscillation_check
from utils.general import LOGGER, LabError, colorstr, increment_path, init_seeds, print_args
from utils.perturbation import curvature_oracle_check, verify_perturbed_metric
from utils.plots import emit_plotdata, plot_foliation, save_csv, save_profile
from utils.reports import CheckReport, aggregate, save_json, save_reports
from utils.shooting import ShootingProblem, solve_plateau, verify_solution
from utils.suites import SuiteContext, default_chain, run_suite, tag


def mass_target(metric):
    # known ADM mass of a family, None when only an estimate is reported
    if isinstance(metric, SchwarzschildMetric):
        return metric.m
    if isinstance(metric, HatLocalizedMetric):
        return 2.0
    return None


def task_plateau(ctx, save_dir):
    p = ctx.cfg['plateau']
    profile = solve_plateau(ShootingProblem(ctx.metric, p['r'], p['z'], **ctx.solver(p['r'])))
    ctx.callbacks.run('on_solve_end', profile)
    save_profile(profile, save_dir / 'profile.csv')
    save_json({'metric': ctx.metric.describe(), 'r': profile.r, 'z': profile.z, 'f0': profile.f0,
               'stats': profile.stats, 'events': profile.events}, save_dir / 'profile.json')
    return verify_solution(profile)


def task_foliate(ctx, save_dir, plots=False):
    leaves = ctx.leaves()
    reports = [foliation_scan(leaves=leaves), inf_height_check(leaves),
               oscillation_check(leaves, ctx.cfg['foliation']['T_view'])]
    for leaf in leaves:
        save_csv(leaf.table(), save_dir / f'leaf_z{leaf.z:g}.csv')
        reports += tag(leaf_checks(leaf), f'z{leaf.z:g}')
    save_json({'metric': ctx.metric.describe(), 'leaves': [leaf.summary() for leaf in leaves]},
              save_dir / 'foliation.json')
    f = emit_plotdata(leaves, ctx.metric.horizon, save_dir)
    if plots:
        plot_foliation(f)
    return reports


def task_verify(ctx, save_dir):
    reports = []
    for name in ctx.cfg['checks']:
        reports += run_suite(name, ctx)
    return reports


def task_mass(ctx, save_dir):
    m = ctx.cfg['mass']
    est = adm_mass(ctx.metric, m['radii'], m['order'])
    est.to_frame().to_csv(save_dir / 'adm_mass.csv', index=False, float_format='%.12g')
    target = mass_target(ctx.metric)
    reports = [adm_mass_check(est, target) if target is not None else
               CheckReport.finding('adm_mass', 'ADM mass as the limit of sphere flux integrals', est.limit,
                                   **est.summary())]
    induced = induced_mass(ctx.primary_leaf, ctx.metric)
    induced.to_frame().to_csv(save_dir / 'induced_mass.csv', index=False, float_format='%.12g')
    reports.append(induced_mass_check(induced))
    return reports


def task_stability(ctx, save_dir):
    return run_suite('stability', ctx)


def task_perturb(ctx, save_dir):
    p = ctx.cfg['perturbation']
    chain = default_chain(ctx.metric, ctx.cfg)
    save_json({'metric': ctx.metric.describe(), **chain.describe()}, save_dir / 'chain.json')
    return (verify_perturbed_metric(ctx.metric, chain, p['t'], p['delta'], seed=ctx.seed) +
            [curvature_oracle_check(ctx.metric, chain, p['t'], p['delta'], seed=ctx.seed)])


def task_report(save_dir, source):
    # aggregate every report JSON below source into summary.json
    files = sorted(p for p in Path(source).rglob('*.json') if p.name != 'summary.json')
    summary = aggregate(files)
    save_json(summary, save_dir / 'summary.json')
    for c in summary['checks']:
        s = colorstr('green', 'pass') if c['passed'] else colorstr('red', 'FAIL')
        LOGGER.info(f"{s} {c['name']:<40} {c['source']}")
    LOGGER.info(f"{summary['total']} checks, {summary['failed']} failed")
    return summary


def run(task='verify',
        config=None,  # config.yaml path, None for defaults
        out=None,  # output directory, default runs/<task>/exp{n}
        suite=None,  # suite name overriding config checks
        jobs=1,  # worker processes
        seed=None,  # seed overriding config seed
        plots=False,  # save foliation.png
        timings=False,  # write check runtimes into JSON
        callbacks=None):
    """
    Run one task. Returns (status, save_dir) with status 0 when every check passes and 1 otherwise; configuration
    and numerical-infrastructure errors propagate as LabError.
    """
    assert task in TASKS, f"unknown task '{task}', available: {TASKS}"
    callbacks = callbacks or Callbacks()
    overrides = {}
    if seed is not None:
        overrides['seed'] = int(seed)
    if suite:
        overrides['checks'] = [suite]
    cfg = load_config(config, overrides) if task != 'report' or config else None  # validated before any output

    if task == 'report':
        source = Path(out) if out else ROOT / 'runs'
        save_dir = Path(out) if out else increment_path(ROOT / 'runs' / task / 'exp')
        save_dir.mkdir(parents=True, exist_ok=True)
        summary = task_report(save_dir, source)
        callbacks.run('on_run_end', save_dir, summary)
        return (0 if summary['passed'] else 1), save_dir

    save_dir = Path(out) if out else increment_path(ROOT / 'runs' / task / 'exp')
    save_dir.mkdir(parents=True, exist_ok=True)
    init_seeds(cfg['seed'])
    ctx = SuiteContext(cfg, jobs, callbacks)
    callbacks.run('on_run_start', cfg)
    LOGGER.info(f"{colorstr(f'{task}: ')}{ctx.metric!r}, saving to {colorstr('bold', save_dir)}")

    if task == 'plateau':
        reports = task_plateau(ctx, save_dir)
    elif task == 'foliate':
        reports = task_foliate(ctx, save_dir, plots)
    elif task == 'mass':
        reports = task_mass(ctx, save_dir)
    elif task == 'stability':
        reports = task_stability(ctx, save_dir)
    elif task == 'perturb':
        reports = task_perturb(ctx, save_dir)
    else:
        reports = task_verify(ctx, save_dir)

    if task not in ('verify', 'stability'):  # suites log their own reports
        for r in reports:
            r.log()
            callbacks.run('on_check_end', r)
    save_reports(reports, save_dir / f'{task}.json', timings)
    failed = [r.name for r in reports if not r.passed]
    LOGGER.info(f'{len(reports)} checks, {len(failed)} failed{": " + ", ".join(failed) if failed else ""}')
    callbacks.run('on_run_end', save_dir, reports)
    return (1 if failed else 0), save_dir


def parse_opt():
    parser = argparse.ArgumentParser()
    parser.add_argument('task', choices=TASKS, help='plateau, foliate, verify, mass, stability, perturb or report')
    parser.add_argument('--config', type=str, default=None, help='config.yaml path, defaults when omitted')
    parser.add_argument('--out', type=str, default=None, help='output directory (report: directory to aggregate)')
    parser.add_argument('--suite', type=str, default=None, help='verification suite, i.e. identities or paper')
    parser.add_argument('--jobs', type=int, default=1, help='worker processes for independent solves')
    parser.add_argument('--seed', type=int, default=None, help='seed for sampled checks, overrides config')
    parser.add_argument('--plots', action='store_true', help='save foliation.png')
    parser.add_argument('--timings', action='store_true', help='write check runtimes into JSON reports')
    opt = parser.parse_args()
    print_args(FILE.stem, opt)
    return opt


def main(opt):
    try:
        status, _ = run(**vars(opt))
    except LabError as e:
        LOGGER.error(f"{colorstr('red', 'error: ')}{type(e).__name__}: {e}")
        return 2
    return status


if __name__ == "__main__":
    opt = parse_opt()
    sys.exit(main(opt))
