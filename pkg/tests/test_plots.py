# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import numpy as np
import pandas as pd

from utils.plots import emit_plotdata, plot_foliation, read_plotdata, save_csv, save_profile


class StubLeaf:
    # leaf stand-in with a catenary-like height, enough for plot data
    def __init__(self, z, n=4, T_view=10.0):
        self.z, self.n, self.T_view = z, n, T_view

    def __call__(self, t):
        return self.z + 1.0 / (1.0 + np.asarray(t, dtype=float) ** 2)


def test_plotdata_blocks(tmp_path):
    f = emit_plotdata([StubLeaf(2.0), StubLeaf(0.5), StubLeaf(1.0)], 1.0, tmp_path, points=11)
    blocks = read_plotdata(f)
    assert [h for h, _ in blocks] == ['leaf z=0.5 n=4', 'leaf z=1 n=4', 'leaf z=2 n=4', 'horizon rho=1']
    t, fz = blocks[0][1]['t'], blocks[0][1]['f']
    assert len(t) == 11 and t.iloc[0] == 0.0 and t.iloc[-1] == 10.0
    assert fz.iloc[0] == 1.5
    horizon = blocks[-1][1]
    np.testing.assert_allclose(np.hypot(horizon['t'], horizon['f']), 1.0, rtol=1e-11)
    assert (tmp_path / 'README.txt').is_file()


def test_plotdata_without_horizon(tmp_path):
    blocks = read_plotdata(emit_plotdata([StubLeaf(1.0), StubLeaf(3.0), StubLeaf(2.0)], None, tmp_path, T=5.0))
    assert len(blocks) == 3 and all(h.startswith('leaf') for h, _ in blocks)
    assert blocks[0][1]['t'].iloc[-1] == 5.0


def test_plotdata_reproducible(tmp_path):
    leaves = [StubLeaf(0.5), StubLeaf(1.0)]
    a = emit_plotdata(leaves, 1.0, tmp_path / 'a').read_bytes()
    b = emit_plotdata(leaves, 1.0, tmp_path / 'b').read_bytes()
    assert a == b


def test_plot_foliation(tmp_path):
    f = plot_foliation(emit_plotdata([StubLeaf(0.5), StubLeaf(1.0)], 1.0, tmp_path))
    assert f == tmp_path / 'foliation.png' and f.stat().st_size > 0


def test_save_csv(tmp_path):
    df = pd.DataFrame({'t': [0.0, 0.5], 'f': [1.0, 1.0 / 3], 'p': [0.0, -0.1], 'extra': [1, 2]})
    f = save_csv(df, tmp_path / 'out' / 'profile.csv')
    lines = f.read_text().splitlines()
    assert lines[0] == 't,f,p'
    assert lines[2] == '0.5,0.333333333333,-0.1'


def test_save_profile(tmp_path, plateau4):
    df = pd.read_csv(save_profile(plateau4, tmp_path / 'profile.csv', t=np.linspace(0.0, 100.0, 5)))
    assert list(df.columns) == ['t', 'f', 'p'] and len(df) == 5
    assert abs(df['f'].iloc[-1] - 1.0) < 1e-9
