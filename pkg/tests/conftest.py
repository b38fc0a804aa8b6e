import pytest

from loadcast.config import DEFAULTS


@pytest.fixture
def small_config():
    """A pipeline configuration small enough for test-suite turnaround."""
    config = dict(DEFAULTS)
    config.update(
        {
            "data.source": "synthetic",
            "synthetic.days": 45,
            "synthetic.holiday_every": 10,
            "data.train_days": 32,
            "elm.hidden_size": 150,
            "lstm.epochs_phase1": 3,
            "lstm.epochs_phase2": 2,
            "lstm.hidden_size": 8,
            "lstm.fc_size": 8,
            "nusvr.c_grid": (1.0,),
            "nusvr.tol": 1e-3,
            "ensemble.bagging.n_trees": 8,
            "ensemble.bagging.max_depth": 6,
            "ensemble.extratree.n_trees": 8,
            "ensemble.extratree.max_depth": 6,
            "ensemble.random_forest.n_trees": 8,
            "ensemble.random_forest.max_depth": 6,
            "ensemble.adaboost.n_trees": 8,
            "ensemble.sgtb.n_stages": 10,
            "ensemble.wgtb.n_stages": 10,
            "ensemble.wgtb.bag_size": 3,
            "seed": 7,
        }
    )
    return config
