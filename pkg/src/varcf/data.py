"""Ratings ingestion, dense re-indexing, splitting, batching, and the
built-in dataset registry.

Raw user/item identifiers (any strings) are re-indexed densely in order
of first appearance; the raw->dense maps are kept on the dataset so they
can be persisted and reused, which keeps indices stable when a corpus is
split into separate train/test files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, EmptyDatasetError, ParseError
from .rng import RngState, derive_seed

# distinct stream tags so splitting and shuffling never share a stream
_SPLIT_TAG = 0x53504C49
_SHUFFLE_TAG = 0x53485546


@dataclass(frozen=True)
class DatasetInfo:
    """Registry entry: rating scale, relevance threshold, per-model epoch
    defaults, and the published corpus size for integrity checks."""

    name: str
    scale_min: float
    scale_max: float
    relevance_threshold: float
    default_epochs: dict[str, int]
    num_users: int | None = None
    num_items: int | None = None
    num_ratings: int | None = None


_REGISTRY = {
    "filmtrust": DatasetInfo(
        name="FilmTrust",
        scale_min=0.5,
        scale_max=4.0,
        relevance_threshold=3.0,
        default_epochs={"VDeepMF": 15, "DeepMF": 25, "VNCF": 7, "NCF": 15},
        num_users=1508,
        num_items=2071,
        num_ratings=35494,
    ),
    "movielens": DatasetInfo(
        name="MovieLens",
        scale_min=1.0,
        scale_max=5.0,
        relevance_threshold=4.0,
        default_epochs={"VDeepMF": 6, "DeepMF": 10, "VNCF": 9, "NCF": 10},
        num_users=6040,
        num_items=3706,
        num_ratings=1000209,
    ),
    "myanimelist": DatasetInfo(
        name="MyAnimeList",
        scale_min=1.0,
        scale_max=10.0,
        relevance_threshold=8.0,
        default_epochs={"VDeepMF": 9, "DeepMF": 20, "VNCF": 9, "NCF": 15},
        num_users=69600,
        num_items=9927,
        num_ratings=6337234,
    ),
    "netflix": DatasetInfo(
        name="Netflix",
        scale_min=1.0,
        scale_max=5.0,
        relevance_threshold=4.0,
        default_epochs={"VDeepMF": 3, "DeepMF": 4, "VNCF": 3, "NCF": 4},
        num_users=480189,
        num_items=17770,
        num_ratings=100480507,
    ),
}


def registry(name: str | None) -> DatasetInfo | None:
    """Look up a known corpus by name (case-insensitive); None if unknown."""
    if name is None:
        return None
    return _REGISTRY.get(name.strip().lower())


@dataclass
class RatingsDataset:
    """Re-indexed (user, item, rating) triples plus scale metadata."""

    user_ids: np.ndarray  # int64, dense in [0, num_users)
    item_ids: np.ndarray  # int64, dense in [0, num_items)
    ratings: np.ndarray  # float64
    num_users: int
    num_items: int
    scale_min: float
    scale_max: float
    relevance_threshold: float | None = None
    name: str | None = None
    user_index: dict[str, int] = field(default_factory=dict)  # raw -> dense
    item_index: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.user_ids.shape[0])

    def triples(self) -> list[tuple[int, int, float]]:
        return list(
            zip(self.user_ids.tolist(), self.item_ids.tolist(), self.ratings.tolist())
        )

    def checksum(self) -> str:
        """sha256 over the canonical dense triple list."""
        h = hashlib.sha256()
        for u, i, r in zip(self.user_ids, self.item_ids, self.ratings):
            h.update(f"{int(u)},{int(i)},{r!r}\n".encode())
        return h.hexdigest()

    def subset(self, indices: np.ndarray) -> "RatingsDataset":
        """Same metadata and index space, restricted to the given rows."""
        return RatingsDataset(
            user_ids=self.user_ids[indices],
            item_ids=self.item_ids[indices],
            ratings=self.ratings[indices],
            num_users=self.num_users,
            num_items=self.num_items,
            scale_min=self.scale_min,
            scale_max=self.scale_max,
            relevance_threshold=self.relevance_threshold,
            name=self.name,
            user_index=self.user_index,
            item_index=self.item_index,
        )

    def inverse_user_index(self) -> dict[int, str]:
        return {v: k for k, v in self.user_index.items()}

    def inverse_item_index(self) -> dict[int, str]:
        return {v: k for k, v in self.item_index.items()}


@dataclass
class SplitPair:
    train: RatingsDataset
    test: RatingsDataset
    ratio: float
    seed: int


@dataclass
class TrainingBatch:
    user_ids: np.ndarray
    item_ids: np.ndarray
    ratings: np.ndarray

    def __post_init__(self):
        if not (len(self.user_ids) == len(self.item_ids) == len(self.ratings)):
            raise DataError("batch fields must have equal lengths")

    def __len__(self) -> int:
        return int(self.user_ids.shape[0])


def _detect_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def _split_fields(line: str, delimiter: str, line_number: int) -> list[str]:
    fields = [f.strip() for f in line.rstrip("\n").rstrip("\r").split(delimiter)]
    if len(fields) not in (3, 4):
        raise ParseError(
            f"expected 3 columns (user,item,rating[,timestamp]), got {len(fields)}",
            line_number,
        )
    return fields


def load_ratings(
    path,
    name: str | None = None,
    mapping: dict | None = None,
) -> RatingsDataset:
    """Load a UTF-8 ratings file (CSV or TSV, delimiter auto-detected).

    Column order is user, item, rating, with an optional fourth timestamp
    column that is ignored.  A header row is detected by a non-numeric
    rating field on line 1.  Duplicate (user, item) pairs keep the last
    rating seen.  If ``mapping`` (as produced by :func:`mapping_dict`) is
    given, its raw->dense id assignment is reused instead of re-indexing,
    so a split file loads into the same index space as its parent corpus.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()

    start = 0
    delimiter = None
    for raw in lines:
        if raw.strip():
            delimiter = _detect_delimiter(raw)
            break
    if delimiter is None:
        raise EmptyDatasetError(f"{path}: no ratings found")

    # header detection: a first row with a non-numeric rating field counts
    # as a header only when the following row parses; a lone unparseable
    # row is a data error, not a header
    nonempty = [i for i, raw in enumerate(lines) if raw.strip()]
    first = nonempty[0]
    probe = _split_fields(lines[first], delimiter, first + 1)
    try:
        float(probe[2])
    except ValueError:
        follower_parses = False
        if len(nonempty) > 1:
            follower = _split_fields(lines[nonempty[1]], delimiter, nonempty[1] + 1)
            try:
                float(follower[2])
                follower_parses = True
            except ValueError:
                follower_parses = False
        if not follower_parses:
            raise ParseError(f"rating {probe[2]!r} is not a number", first + 1) from None
        start = first + 1

    if mapping is not None:
        user_index = {str(k): int(v) for k, v in mapping["users"].items()}
        item_index = {str(k): int(v) for k, v in mapping["items"].items()}
        frozen_index = True
    else:
        user_index, item_index = {}, {}
        frozen_index = False

    kept: dict[tuple[int, int], float] = {}
    for offset, raw in enumerate(lines[start:], start=start + 1):
        if not raw.strip():
            continue
        fields = _split_fields(raw, delimiter, offset)
        user_raw, item_raw, rating_raw = fields[0], fields[1], fields[2]
        try:
            rating = float(rating_raw)
        except ValueError:
            raise ParseError(f"rating {rating_raw!r} is not a number", offset) from None
        if not np.isfinite(rating):
            raise ParseError(f"rating {rating_raw!r} is not finite", offset)
        if frozen_index:
            if user_raw not in user_index:
                raise ParseError(f"user {user_raw!r} not present in the id mapping", offset)
            if item_raw not in item_index:
                raise ParseError(f"item {item_raw!r} not present in the id mapping", offset)
        else:
            user_index.setdefault(user_raw, len(user_index))
            item_index.setdefault(item_raw, len(item_index))
        kept[(user_index[user_raw], item_index[item_raw])] = rating

    if not kept:
        raise EmptyDatasetError(f"{path}: no ratings found")

    users = np.fromiter((k[0] for k in kept), dtype=np.int64, count=len(kept))
    items = np.fromiter((k[1] for k in kept), dtype=np.int64, count=len(kept))
    ratings = np.fromiter(kept.values(), dtype=np.float64, count=len(kept))

    info = registry(name)
    if info is not None:
        scale_min, scale_max = info.scale_min, info.scale_max
        theta = info.relevance_threshold
        name = info.name
    else:
        scale_min, scale_max = float(ratings.min()), float(ratings.max())
        theta = None

    num_users, num_items = len(user_index), len(item_index)

    return RatingsDataset(
        user_ids=users,
        item_ids=items,
        ratings=ratings,
        num_users=num_users,
        num_items=num_items,
        scale_min=scale_min,
        scale_max=scale_max,
        relevance_threshold=theta,
        name=name,
        user_index=user_index,
        item_index=item_index,
    )


def split(dataset: RatingsDataset, ratio: float, seed: int) -> SplitPair:
    """Uniform random partition at the rating level, deterministic per seed.

    Train size is round(ratio * total).  Users and items keep the parent
    index space, so test rows may reference users with no training data.
    """
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"split ratio must be in (0, 1], got {ratio}")
    total = len(dataset)
    train_size = int(np.floor(ratio * total + 0.5))
    perm = RngState(derive_seed(seed, _SPLIT_TAG)).permutation(total)
    train_idx = np.sort(perm[:train_size])
    test_idx = np.sort(perm[train_size:])
    return SplitPair(
        train=dataset.subset(train_idx),
        test=dataset.subset(test_idx),
        ratio=ratio,
        seed=seed,
    )


def batches(train: RatingsDataset, batch_size: int, seed: int, epoch: int):
    """Yield shuffled TrainingBatch slices; deterministic per (seed, epoch).

    The final batch may be short; it is processed at its actual size.
    """
    if batch_size <= 0:
        raise ConfigError(f"batch_size must be positive, got {batch_size}")
    order = RngState(derive_seed(seed, _SHUFFLE_TAG, epoch)).permutation(len(train))
    for lo in range(0, len(train), batch_size):
        idx = order[lo : lo + batch_size]
        yield TrainingBatch(
            user_ids=train.user_ids[idx],
            item_ids=train.item_ids[idx],
            ratings=train.ratings[idx],
        )


def mapping_dict(dataset: RatingsDataset) -> dict:
    """JSON-serializable raw->dense id maps (round-trips exactly)."""
    return {
        "users": dict(dataset.user_index),
        "items": dict(dataset.item_index),
    }


def split_manifest(pair: SplitPair, source: RatingsDataset) -> dict:
    """Reproducibility record for a split: seeds, counts, checksums, policies."""
    return {
        "dataset": source.name,
        "ratio": pair.ratio,
        "split_seed": pair.seed,
        "total_ratings": len(source),
        "train_ratings": len(pair.train),
        "test_ratings": len(pair.test),
        "num_users": source.num_users,
        "num_items": source.num_items,
        "scale": [source.scale_min, source.scale_max],
        "relevance_threshold": source.relevance_threshold,
        "corpus_checksum": source.checksum(),
        "train_checksum": pair.train.checksum(),
        "test_checksum": pair.test.checksum(),
        "duplicate_policy": "keep-last",
        "indexing": "first-appearance",
    }


def save_ratings_csv(dataset: RatingsDataset, path) -> None:
    """Write triples as user,item,rating CSV using the original raw ids."""
    inv_user = dataset.inverse_user_index()
    inv_item = dataset.inverse_item_index()
    with open(path, "w", encoding="utf-8") as fh:
        for u, i, r in zip(dataset.user_ids, dataset.item_ids, dataset.ratings):
            fh.write(f"{inv_user[int(u)]},{inv_item[int(i)]},{r:g}\n")


def save_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def synthetic_ratings(
    num_users: int,
    num_items: int,
    num_ratings: int,
    seed: int = 0,
    scale: tuple[float, float] = (0.5, 4.0),
    step: float = 0.5,
    name: str = "synthetic",
) -> RatingsDataset:
    """Generate a structured synthetic corpus for demos and tests.

    Ratings follow a low-rank user x item preference structure plus noise,
    quantized to the given step, so models have real signal to learn.
    """
    rng = RngState(derive_seed(seed, 0x53594E54))
    d = 3
    u_lat = rng.normal(num_users, d)
    v_lat = rng.normal(num_items, d)
    max_pairs = num_users * num_items
    if num_ratings > max_pairs:
        raise ConfigError(
            f"cannot place {num_ratings} ratings on a {num_users}x{num_items} grid"
        )
    # guarantee every user and item appears, then fill with distinct grid cells
    cells: dict[int, None] = {}
    for u in range(num_users):
        cells.setdefault(u * num_items + u % num_items, None)
    for i in range(num_items):
        cells.setdefault((i % num_users) * num_items + i, None)
    if num_ratings < len(cells):
        raise ConfigError(
            f"need at least {len(cells)} ratings to cover {num_users} users "
            f"and {num_items} items"
        )
    for cell in rng.permutation(max_pairs).tolist():
        if len(cells) >= num_ratings:
            break
        cells.setdefault(cell, None)
    pair_idx = np.fromiter(cells, dtype=np.int64, count=num_ratings)
    users = pair_idx // num_items
    items = pair_idx % num_items
    raw = np.einsum("ij,ij->i", u_lat[users], v_lat[items])
    raw = raw + 0.7 * rng.normal(num_ratings, 1)[:, 0]
    lo, hi = scale
    span = raw.max() - raw.min()
    scaled = lo + (raw - raw.min()) / (span if span > 0 else 1.0) * (hi - lo)
    quant = np.clip(np.round(scaled / step) * step, lo, hi)
    theta = lo + 0.75 * (hi - lo)
    return RatingsDataset(
        user_ids=users,
        item_ids=items,
        ratings=quant,
        num_users=num_users,
        num_items=num_items,
        scale_min=lo,
        scale_max=hi,
        relevance_threshold=float(np.round(theta / step) * step),
        name=name,
        user_index={str(i): i for i in range(num_users)},
        item_index={str(i): i for i in range(num_items)},
    )
