# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Plotting utils: profile CSV tables, whitespace plot-data blocks of the foliation and an optional figure
"""

from pathlib import Path

import matplotlib
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from utils.general import LOGGER

# Settings
matplotlib.rc('font', **{'size': 11})
matplotlib.use('Agg')  # for writing to files only
FLOAT_FORMAT = '%.12g'  # every text artifact, fixed so reruns are byte-identical

PLOTDATA_README = """\
foliation.dat holds whitespace-separated two-column blocks separated by one blank line.

Each leaf block starts with a comment line '# leaf z=<z> n=<n>' followed by rows
    t  f
where t >= 0 is the distance to the symmetry axis and f(t) the height of the leaf. Leaves are the graphs
x^n = f(|x'|) of rotation-invariant minimal hypersurfaces; the meridian is drawn for t >= 0 only and the full
picture is the reflection t -> -t. Blocks are ordered by ascending z.

The last block starts with '# horizon rho=<rho>' and is the parametric half circle
    t = rho·sin(theta),  f = rho·cos(theta),  theta in [0, pi]
of the horizon |x| = rho, omitted for metrics without a horizon.
"""


def save_csv(df, file, columns=('t', 'f', 'p')):
    # DataFrame to CSV with the fixed float format, header row included
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    df.loc[:, list(columns)].to_csv(file, index=False, float_format=FLOAT_FORMAT)
    return file


def save_profile(profile, file, t=None):
    # (t, f, p) samples of a solved profile, dense output at t when given
    return save_csv(profile.samples if t is None else profile.dense(t), file)


def _block(header, t, f):
    rows = '\n'.join(f'{FLOAT_FORMAT % a} {FLOAT_FORMAT % b}' for a, b in zip(t, f))
    return f'# {header}\n{rows}\n'


def emit_plotdata(leaves, horizon=1.0, save_dir='.', T=None, points=501):
    """
    Write foliation.dat (one (t, f) block per leaf in ascending z, then the horizon half circle) and README.txt into
    save_dir. Leaves are sampled on [0, T], T defaults to each leaf's T_view. Returns the data file path.
    """
    assert len(leaves), 'emit_plotdata needs at least one leaf'
    save_dir = Path(save_dir)
    save_dir.mkdir(parents=True, exist_ok=True)
    blocks = []
    for leaf in sorted(leaves, key=lambda lf: lf.z):
        t = np.linspace(0.0, leaf.T_view if T is None else T, points)
        blocks.append(_block(f'leaf z={leaf.z:g} n={leaf.n}', t, leaf(t)))
    if horizon:
        theta = np.linspace(0.0, np.pi, 181)
        blocks.append(_block(f'horizon rho={horizon:g}', horizon * np.sin(theta), horizon * np.cos(theta)))
    file = save_dir / 'foliation.dat'
    file.write_text('\n'.join(blocks))
    (save_dir / 'README.txt').write_text(PLOTDATA_README)
    return file


def read_plotdata(file):
    # [(header, DataFrame(t, f)), ...] from a foliation.dat file
    out = []
    for chunk in Path(file).read_text().strip().split('\n\n'):
        lines = chunk.strip().splitlines()
        rows = [tuple(map(float, s.split())) for s in lines[1:]]
        out.append((lines[0].lstrip('# '), pd.DataFrame(rows, columns=['t', 'f'])))
    return out


def plot_foliation(file='foliation.dat', save_dir=''):
    # Plot foliation.dat leaves and horizon, mirrored about the axis. Usage: plot_foliation('runs/foliate/exp/foliation.dat')
    save_dir = Path(file).parent if not save_dir else Path(save_dir)
    fig, ax = plt.subplots(1, 1, figsize=(8, 6), tight_layout=True)
    try:
        blocks = read_plotdata(file)
        cmap = plt.get_cmap('viridis')
        leaves = [b for b in blocks if b[0].startswith('leaf')]
        for i, (header, df) in enumerate(blocks):
            if header.startswith('horizon'):
                ax.plot(np.r_[-df['t'][::-1], df['t']], np.r_[df['f'][::-1], df['f']], 'k--', linewidth=1.5,
                        label=header)
            else:
                c = cmap(i / max(1, len(leaves) - 1))
                ax.plot(df['t'], df['f'], color=c, linewidth=1.5, label=header)
                ax.plot(-df['t'], df['f'], color=c, linewidth=1.5)
    except Exception as e:
        LOGGER.info(f'Warning: Plotting error for {file}: {e}')
    ax.set_xlabel('t')
    ax.set_ylabel('f')
    ax.set_aspect('equal', adjustable='datalim')
    ax.legend(fontsize=8)
    f = save_dir / 'foliation.png'
    fig.savefig(f, dpi=200)
    plt.close()
    return f
