import os
from pathlib import Path

import numpy as np
import pytest

from varcf import synthetic_ratings
from varcf.data import load_ratings
from varcf.metrics import PredictionPairs

REPO_ROOT = Path(__file__).resolve().parent.parent

# Candidate locations for the real FilmTrust corpus (user,item,rating CSV).
# The sandbox has no general network access, so the corpus must be placed
# here by hand; scripts/fetch_filmtrust.py documents how.
FILMTRUST_CANDIDATES = (
    os.environ.get("VARCF_FILMTRUST", ""),
    str(REPO_ROOT / "data" / "filmtrust.csv"),
    str(REPO_ROOT / "data" / "filmtrust" / "ratings.csv"),
)


MOVIELENS_CANDIDATES = (
    os.environ.get("VARCF_MOVIELENS", ""),
    str(REPO_ROOT / "data" / "movielens.csv"),
    str(REPO_ROOT / "data" / "ml-1m" / "ratings.csv"),
)


def _first_existing(candidates):
    for candidate in candidates:
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


def filmtrust_path():
    return _first_existing(FILMTRUST_CANDIDATES)


def movielens_path():
    return _first_existing(MOVIELENS_CANDIDATES)


def require_filmtrust():
    path = filmtrust_path()
    if path is None:
        pytest.skip(
            "FilmTrust corpus not available in this environment "
            "(no outbound network); place the user,item,rating CSV at "
            "data/filmtrust.csv or set VARCF_FILMTRUST "
            "(see scripts/fetch_filmtrust.py)"
        )
    return path


def require_movielens():
    path = movielens_path()
    if path is None:
        pytest.skip(
            "MovieLens 1M corpus not available in this environment "
            "(no outbound network); place the user,item,rating CSV at "
            "data/movielens.csv or set VARCF_MOVIELENS "
            "(see scripts/fetch_filmtrust.py for the conversion recipe)"
        )
    return path


def load_filmtrust():
    return load_ratings(require_filmtrust(), name="FilmTrust")


@pytest.fixture(scope="session")
def toy_dataset():
    return synthetic_ratings(40, 50, 900, seed=5)


@pytest.fixture(scope="session")
def tiny_dataset():
    return synthetic_ratings(8, 10, 60, seed=2)


def pairs_from(users, items, ratings, predictions) -> PredictionPairs:
    return PredictionPairs(
        user_ids=np.asarray(users, dtype=np.int64),
        item_ids=np.asarray(items, dtype=np.int64),
        ratings=np.asarray(ratings, dtype=np.float64),
        predictions=np.asarray(predictions, dtype=np.float64),
    )
