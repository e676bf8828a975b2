"""Bayesian level-set clustering.

Labels use 0 for noise and 1..K for clusters. Point arrays have shape (n, d);
density ensembles have shape (draws, n).
"""

from ._ballet import (
    BalletError,
    ConfigError,
    InfeasibleError,
    IoError,
    NumericError,
    __version__,
    adaptive_delta,
    cluster,
    dbscan,
    distance,
    elbow_level,
    evaluate,
    fit_ensemble,
    kde_uniform,
    knn_density,
    level_set_clusters,
    loss,
    noise_fraction_level,
    plugin,
    simulation_study,
    sky_survey,
    two_moons,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
