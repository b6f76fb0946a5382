from np2l import hparams


def test_grid_sizes():
    assert len(hparams.LR_GRID) == 5 and len(hparams.WD_GRID) == 8


def test_published_rows():
    assert hparams.lookup("link", "cora", "sgcn", "gae") == (3, 0.01, 0.5)
    assert hparams.lookup("link", "photo", "sgcn", "gae")[0] == 4
    assert hparams.lookup("link", "cora", "gcn", "gae") == (None, 0.01, 0.5)
    assert hparams.lookup("node", "texas", "sgcn", split=3) == (2, 0.01, 1e-3)
    assert hparams.lookup("node", "texas", "gcn", split=3) == (None, 0.05, 5e-2)


def test_fallback():
    assert hparams.lookup("link", "csbm", "sgcn", "gae", k=7) == (3, 0.01, 0.0)
    assert hparams.lookup("link", "cs", "sgncn", "vgae", k=15)[0] == 5
