import numpy as np
import pytest

import ballet


def test_loss_examples():
    assert ballet.loss([1, 1, 0], [1, 1, 0]) == 0.0
    # one point active in the first only, against two active partners
    assert ballet.loss([1, 1, 1], [1, 1, 0]) == pytest.approx(1.0)
    assert ballet.distance([1, 2], [1, 1]) == pytest.approx(1.0)
    assert ballet.loss([1, 2], [2, 1]) == 0.0


def test_dbscan_matches_kde_level_sets():
    rng = np.random.default_rng(0)
    pts = rng.uniform(size=(300, 2))
    eps, min_pts = 0.08, 5
    star = ballet.dbscan(pts, eps, min_pts, star=True)
    dens = ballet.kde_uniform(pts, eps)
    level = min_pts / (len(pts) * np.pi * eps**2)
    # level just under MinPts / (n pi eps^2) so rounding cannot drop a core point
    clusters = ballet.level_set_clusters(pts, dens, level * (1 - 1e-12), eps)
    assert np.array_equal(star > 0, clusters > 0)


def test_cluster_sky_survey():
    pts, targets, source = ballet.sky_survey(n=1500, seed=1)
    assert pts.shape == (1500, 2) and targets.shape == (10, 2)
    assert set(np.unique(source)) <= set(range(-1, 10))
    ens = ballet.fit_ensemble(pts, draws=30, seed=2, unit_domain=True)
    assert ens.shape == (30, 1500)
    out = ballet.cluster(pts, ens, nu=0.9, seed=3, alpha=0.05)
    labels = out["labels"]
    assert labels.shape == (1500,)
    assert 0 < (labels > 0).mean() < 0.5
    assert out["coverage"] >= 0.95
    assert ballet.loss(out["lower"]["labels"], labels) <= out["radius"]
    again = ballet.cluster(pts, ens, nu=0.9, seed=3)
    assert np.array_equal(again["labels"], labels)
    scores = ballet.evaluate(labels, pts, targets)
    assert 0.0 <= scores["specificity"] <= 1.0


def test_two_moons_plugin():
    pts = ballet.two_moons(1000, 0.05, seed=3)
    ens = ballet.fit_ensemble(pts, draws=20, bins=30, seed=1)
    labels = ballet.plugin(pts, ens, nu=0.1)
    sizes = np.bincount(labels)[1:]
    assert (sizes > 1).sum() == 2


def test_levels():
    dens = np.arange(1, 11) / 10
    assert ballet.noise_fraction_level(dens, 0.1) == 0.2
    assert ballet.elbow_level(np.exp(np.linspace(0, 5, 50)))["fallback"]


def test_errors():
    with pytest.raises(ballet.ConfigError):
        ballet.noise_fraction_level(np.ones(5), 1.5)
    pts = np.zeros((4, 2))
    with pytest.raises(ballet.ConfigError):
        ballet.cluster(pts, np.ones((3, 5)), nu=0.1)
    assert issubclass(ballet.NumericError, ballet.BalletError)
