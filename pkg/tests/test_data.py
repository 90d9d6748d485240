import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varcf.data import (
    TrainingBatch,
    batches,
    load_ratings,
    mapping_dict,
    registry,
    save_ratings_csv,
    split,
    split_manifest,
    synthetic_ratings,
)
from varcf.errors import ConfigError, DataError, EmptyDatasetError, ParseError


def write(tmp_path, text, name="ratings.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoading:
    def test_basic_reindexing(self, tmp_path):
        ds = load_ratings(write(tmp_path, "u1,i1,4\nu1,i2,2\nu2,i1,5\n"))
        assert (ds.num_users, ds.num_items, len(ds)) == (2, 2, 3)
        assert ds.user_index == {"u1": 0, "u2": 1}
        assert ds.item_index == {"i1": 0, "i2": 1}
        assert ds.ratings.tolist() == [4.0, 2.0, 5.0]

    def test_duplicates_keep_last(self, tmp_path):
        ds = load_ratings(write(tmp_path, "u1,i1,4\nu1,i1,5\n"))
        assert len(ds) == 1
        assert ds.ratings.tolist() == [5.0]

    def test_malformed_rating_reports_line_number(self, tmp_path):
        with pytest.raises(ParseError, match="line 1"):
            load_ratings(write(tmp_path, "u1,i1,abc\n"))
        with pytest.raises(ParseError, match="line 3"):
            load_ratings(write(tmp_path, "u1,i1,4\nu1,i2,2\nu2,i1\n"))

    def test_empty_file_rejected(self, tmp_path):
        with pytest.raises(EmptyDatasetError):
            load_ratings(write(tmp_path, ""))
        with pytest.raises(EmptyDatasetError):
            load_ratings(write(tmp_path, "\n   \n"))

    def test_header_autodetected(self, tmp_path):
        ds = load_ratings(write(tmp_path, "user,item,rating\nu1,i1,4\n"))
        assert len(ds) == 1
        assert "user" not in ds.user_index

    def test_two_unparseable_rows_are_an_error_not_a_header(self, tmp_path):
        with pytest.raises(ParseError, match="line 1"):
            load_ratings(write(tmp_path, "u1,i1,abc\nu2,i2,def\n"))

    def test_tab_delimiter_autodetected(self, tmp_path):
        ds = load_ratings(write(tmp_path, "u1\ti1\t4\nu2\ti2\t3.5\n"))
        assert len(ds) == 2
        assert ds.ratings.tolist() == [4.0, 3.5]

    def test_fourth_timestamp_column_ignored(self, tmp_path):
        ds = load_ratings(write(tmp_path, "u1,i1,4,964982703\nu2,i2,3,964982931\n"))
        assert len(ds) == 2

    def test_unknown_corpus_uses_observed_scale(self, tmp_path):
        ds = load_ratings(write(tmp_path, "a,x,2\nb,y,7\n"))
        assert (ds.scale_min, ds.scale_max) == (2.0, 7.0)
        assert ds.relevance_threshold is None

    def test_registered_name_applies_scale_and_threshold(self, tmp_path):
        ds = load_ratings(write(tmp_path, "a,x,2\nb,y,3\n"), name="filmtrust")
        assert (ds.scale_min, ds.scale_max) == (0.5, 4.0)
        assert ds.relevance_threshold == 3.0
        assert ds.name == "FilmTrust"

    def test_mapping_reuse_keeps_indices_stable(self, tmp_path):
        full = load_ratings(write(tmp_path, "u1,i1,4\nu1,i2,2\nu2,i1,5\nu3,i3,1\n"))
        pair = split(full, 0.5, seed=9)
        out = tmp_path / "test.csv"
        save_ratings_csv(pair.test, out)
        reloaded = load_ratings(out, mapping=mapping_dict(full))
        assert reloaded.num_users == full.num_users
        assert reloaded.num_items == full.num_items
        assert sorted(map(tuple, reloaded.triples())) == sorted(map(tuple, pair.test.triples()))

    def test_mapping_rejects_unknown_raw_id(self, tmp_path):
        full = load_ratings(write(tmp_path, "u1,i1,4\n"))
        other = write(tmp_path, "u9,i1,4\n", name="other.csv")
        with pytest.raises(ParseError, match="u9"):
            load_ratings(other, mapping=mapping_dict(full))

    def test_inverse_index_roundtrip(self, tmp_path):
        ds = load_ratings(write(tmp_path, "u1,i1,4\nu2,i2,2\nu3,i1,1\n"))
        inv = ds.inverse_user_index()
        assert all(ds.user_index[inv[idx]] == idx for idx in inv)
        assert len(inv) == ds.num_users


class TestRegistry:
    @pytest.mark.parametrize(
        "name,scale,theta",
        [
            ("FilmTrust", (0.5, 4.0), 3.0),
            ("MovieLens", (1.0, 5.0), 4.0),
            ("MyAnimeList", (1.0, 10.0), 8.0),
            ("Netflix", (1.0, 5.0), 4.0),
        ],
    )
    def test_known_entries(self, name, scale, theta):
        info = registry(name)
        assert (info.scale_min, info.scale_max) == scale
        assert info.relevance_threshold == theta

    def test_lookup_is_case_insensitive(self):
        assert registry("FILMTRUST").name == "FilmTrust"

    def test_unknown_name_has_no_entry(self):
        assert registry("unknown-corpus") is None
        assert registry(None) is None

    def test_epoch_defaults_present_for_all_architectures(self):
        for name in ("FilmTrust", "MovieLens", "MyAnimeList", "Netflix"):
            assert set(registry(name).default_epochs) == {"DeepMF", "NCF", "VDeepMF", "VNCF"}
        assert registry("FilmTrust").default_epochs["VDeepMF"] == 15
        assert registry("FilmTrust").default_epochs["DeepMF"] == 25


class TestSplit:
    def test_eighty_twenty_on_ten_ratings(self):
        ds = synthetic_ratings(5, 5, 10, seed=1)
        pair = split(ds, 0.8, seed=0)
        assert (len(pair.train), len(pair.test)) == (8, 2)

    def test_ratio_one_gives_empty_test(self):
        ds = synthetic_ratings(5, 5, 10, seed=1)
        pair = split(ds, 1.0, seed=0)
        assert (len(pair.train), len(pair.test)) == (10, 0)

    def test_same_seed_same_partition(self):
        ds = synthetic_ratings(10, 10, 60, seed=2)
        a, b = split(ds, 0.8, seed=5), split(ds, 0.8, seed=5)
        assert a.train.triples() == b.train.triples()
        assert a.test.triples() == b.test.triples()

    def test_ratio_out_of_range(self):
        ds = synthetic_ratings(5, 5, 10, seed=1)
        for ratio in (0.0, -0.1, 1.5):
            with pytest.raises(ConfigError):
                split(ds, ratio, seed=0)

    @given(st.integers(min_value=0, max_value=2**63), st.integers(min_value=25, max_value=95))
    @settings(max_examples=25, deadline=None)
    def test_partition_property(self, seed, n):
        ds = synthetic_ratings(10, 10, n, seed=3)
        pair = split(ds, 0.8, seed=seed)
        train = set(map(tuple, pair.train.triples()))
        test = set(map(tuple, pair.test.triples()))
        full = set(map(tuple, ds.triples()))
        assert train.isdisjoint(test)
        assert train | test == full
        assert len(pair.train) + len(pair.test) == len(ds)

    def test_split_shares_index_space(self):
        ds = synthetic_ratings(10, 10, 60, seed=2)
        pair = split(ds, 0.8, seed=5)
        assert pair.test.num_users == ds.num_users
        assert pair.test.num_items == ds.num_items


class TestBatches:
    def test_seventy_ratings_batch_32(self):
        ds = synthetic_ratings(8, 10, 70, seed=4)
        sizes = [len(b) for b in batches(ds, 32, seed=0, epoch=0)]
        assert sizes == [32, 32, 6]

    def test_epochs_reshuffle_but_cover_everything(self):
        ds = synthetic_ratings(8, 10, 70, seed=4)

        def order(epoch):
            out = []
            for b in batches(ds, 16, seed=9, epoch=epoch):
                out.extend(zip(b.user_ids.tolist(), b.item_ids.tolist(), b.ratings.tolist()))
            return out

        e0, e1 = order(0), order(1)
        assert e0 != e1
        assert sorted(e0) == sorted(e1) == sorted(map(tuple, ds.triples()))

    def test_same_seed_epoch_same_order(self):
        ds = synthetic_ratings(8, 10, 70, seed=4)
        a = [b.user_ids.tolist() for b in batches(ds, 8, seed=3, epoch=2)]
        b = [b.user_ids.tolist() for b in batches(ds, 8, seed=3, epoch=2)]
        assert a == b

    def test_bad_batch_size(self):
        ds = synthetic_ratings(5, 5, 10, seed=1)
        with pytest.raises(ConfigError):
            list(batches(ds, 0, seed=0, epoch=0))

    def test_batch_field_length_check(self):
        with pytest.raises(DataError):
            TrainingBatch(np.zeros(2, dtype=np.int64), np.zeros(3, dtype=np.int64), np.zeros(2))


class TestManifest:
    def test_manifest_contents(self, tmp_path):
        ds = synthetic_ratings(6, 6, 30, seed=7)
        pair = split(ds, 0.8, seed=11)
        manifest = split_manifest(pair, ds)
        assert manifest["train_ratings"] == 24
        assert manifest["test_ratings"] == 6
        assert manifest["split_seed"] == 11
        assert manifest["duplicate_policy"] == "keep-last"
        assert manifest["corpus_checksum"] == ds.checksum()
        json.dumps(manifest)  # must be serializable as-is

    def test_checksum_tracks_content(self):
        a = synthetic_ratings(6, 6, 30, seed=7)
        b = synthetic_ratings(6, 6, 30, seed=8)
        assert a.checksum() != b.checksum()
        assert a.checksum() == synthetic_ratings(6, 6, 30, seed=7).checksum()


class TestSynthetic:
    def test_invariants(self):
        ds = synthetic_ratings(15, 20, 200, seed=6)
        assert len(set(zip(ds.user_ids.tolist(), ds.item_ids.tolist()))) == 200
        assert ds.ratings.min() >= ds.scale_min
        assert ds.ratings.max() <= ds.scale_max
        assert set(ds.user_ids.tolist()) == set(range(15))
        assert set(ds.item_ids.tolist()) == set(range(20))

    def test_too_few_ratings_for_coverage(self):
        with pytest.raises(ConfigError):
            synthetic_ratings(10, 10, 5, seed=1)
