import json

import numpy as np
import pytest

from fairtree.data import (
    DatasetConfig,
    dataset_config_from_dict,
    load_dataset,
    load_dataset_config,
    make_folds,
)
from fairtree.errors import ConfigError, DataError


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def base_config(csv_path, **kwargs):
    fields = dict(
        name="test",
        csv_path=csv_path,
        label_column="y",
        positive_label_value="yes",
        protected_column="g",
        privileged_values=("1",),
    )
    fields.update(kwargs)
    return DatasetConfig(**fields)


def test_numeric_missing_values_take_column_median(tmp_path):
    csv = "g,x,y\n1,2.0,yes\n0,?,no\n1,4.0,no\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    x = ds.rows[:, ds.feature_index("x")]
    assert x[1] == 3.0  # median of {2, 4}
    np.testing.assert_array_equal(ds.labels, [1, 0, 0])


def test_categorical_codes_follow_first_appearance(tmp_path):
    csv = "g,c,y\n1,b,yes\n0,a,no\n1,b,no\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    c = ds.rows[:, ds.feature_index("c")]
    np.testing.assert_array_equal(c, [0.0, 1.0, 0.0])
    assert ds.feature_kinds[ds.feature_index("c")] == {"b": 0, "a": 1}


def test_categorical_missing_values_take_mode(tmp_path):
    csv = "g,c,y\n1,b,yes\n0,?,no\n1,b,no\n0,a,no\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    c = ds.rows[:, ds.feature_index("c")]
    assert c[1] == 0.0  # mode 'b' -> code 0


def test_protected_column_binarized_from_values(tmp_path):
    csv = "sex,x,y\nMale,1,yes\nFemale,2,no\nMale,3,no\n"
    config = base_config(
        write_csv(tmp_path, csv), protected_column="sex",
        privileged_values=("Male",),
    )
    ds = load_dataset(config)
    np.testing.assert_array_equal(ds.rows[:, ds.feature_index("sex")], [1.0, 0.0, 1.0])
    assert ds.feature_kinds[ds.feature_index("sex")] == {"Male": 1, "Female": 0}


def test_protected_column_binarized_from_numeric_cut(tmp_path):
    csv = "age,x,y\n25,1,yes\n40,2,no\n61,3,no\n"
    config = base_config(
        write_csv(tmp_path, csv), protected_column="age",
        privileged_values=None, privileged_min=40.0,
    )
    ds = load_dataset(config)
    np.testing.assert_array_equal(ds.rows[:, ds.feature_index("age")], [0.0, 1.0, 1.0])


def test_missing_column_is_named(tmp_path):
    csv = "g,x,y\n1,1,yes\n"
    with pytest.raises(DataError, match="'nope'"):
        load_dataset(base_config(write_csv(tmp_path, csv), protected_column="nope"))


def test_unmapped_label_value_reports_row(tmp_path):
    csv = "g,x,y\n1,1,yes\n0,2,maybe\n"
    config = base_config(write_csv(tmp_path, csv), negative_label_values=("no",))
    with pytest.raises(DataError, match="row 2.*'maybe'"):
        load_dataset(config)


def test_unlisted_negative_defaults_to_zero(tmp_path):
    csv = "g,x,y\n1,1,yes\n0,2,whatever\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    np.testing.assert_array_equal(ds.labels, [1, 0])


def test_empty_and_header_only_files_are_rejected(tmp_path):
    with pytest.raises(DataError, match="empty file"):
        load_dataset(base_config(write_csv(tmp_path, "")))
    with pytest.raises(DataError, match="no data rows"):
        load_dataset(base_config(write_csv(tmp_path, "g,x,y\n")))


def test_ragged_rows_are_rejected(tmp_path):
    csv = "g,x,y\n1,1,yes\n0,2\n"
    with pytest.raises(DataError, match="row 2"):
        load_dataset(base_config(write_csv(tmp_path, csv)))


def test_cells_are_whitespace_stripped(tmp_path):
    csv = "g, x, y\n 1, 1.5, yes\n 0, 2.5, no\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    assert ds.feature_names == ["g", "x"]
    np.testing.assert_array_equal(ds.rows[:, 1], [1.5, 2.5])


def test_headerless_csv_uses_config_column_names(tmp_path):
    csv = "1,3.5,yes\n0,1.5,no\n"
    config = base_config(write_csv(tmp_path, csv), column_names=("g", "x", "y"))
    ds = load_dataset(config)
    assert ds.n_rows == 2
    assert ds.feature_names == ["g", "x"]


def test_row_filters_and_keep_columns(tmp_path):
    csv = "g,x,z,junk,y\n1,1,keep,a,yes\n0,2,drop,b,no\n1,3,keep,c,no\n1,9,keep,d,yes\n"
    config = base_config(
        write_csv(tmp_path, csv),
        keep_columns=("g", "x"),
        row_filters=(
            {"column": "z", "keep_values": ("keep",)},
            {"column": "x", "max": 5},
        ),
    )
    config = dataset_config_from_dict(
        {
            "name": "test",
            "csv_path": config.csv_path,
            "label_column": "y",
            "positive_label_value": "yes",
            "protected_column": "g",
            "privileged_values": ["1"],
            "keep_columns": ["g", "x"],
            "row_filters": [
                {"column": "z", "keep_values": ["keep"]},
                {"column": "x", "max": 5},
            ],
        }
    )
    ds = load_dataset(config)
    assert ds.feature_names == ["g", "x"]
    np.testing.assert_array_equal(ds.rows[:, 1], [1.0, 3.0])


def test_loading_is_deterministic(tmp_path):
    csv = "g,c,x,y\n1,b,1,yes\n0,a,?,no\n1,?,3,no\n"
    config = base_config(write_csv(tmp_path, csv))
    a = load_dataset(config)
    b = load_dataset(config)
    assert a.feature_names == b.feature_names
    assert a.feature_kinds == b.feature_kinds
    np.testing.assert_array_equal(a.rows, b.rows)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_loaded_dataset_is_fully_numeric_and_binary(tmp_path):
    csv = "g,c,x,y\n1,b,1,yes\n0,a,?,no\n1,?,3,no\nfoo,a,2,yes\n"
    ds = load_dataset(base_config(write_csv(tmp_path, csv)))
    assert np.isfinite(ds.rows).all()
    assert set(np.unique(ds.rows[:, ds.feature_index("g")])) <= {0.0, 1.0}
    assert set(np.unique(ds.labels)) <= {0, 1}


def test_config_file_round_trip(tmp_path):
    doc = {
        "name": "demo",
        "csv_path": "demo.csv",
        "label_column": "y",
        "positive_label_value": "yes",
        "protected_column": "g",
        "privileged_values": ["1"],
    }
    path = tmp_path / "demo.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    config = load_dataset_config(str(path))
    assert config.name == "demo"
    # csv_path resolves relative to the config file
    assert config.csv_path == str(tmp_path / "demo.csv")


def test_config_validation_errors():
    with pytest.raises(ConfigError, match="privileged"):
        DatasetConfig(
            name="x", csv_path="x.csv", label_column="y",
            positive_label_value="1", protected_column="g",
        )
    with pytest.raises(ConfigError, match="missing field"):
        dataset_config_from_dict({"name": "x"})
    with pytest.raises(ConfigError, match="not found"):
        load_dataset_config("/nonexistent/config.json")


def test_make_folds_sizes_and_partition():
    plan = make_folds(10, 5, seed=3)
    sizes = sorted((plan.assignments == f).sum() for f in range(5))
    assert sizes == [2, 2, 2, 2, 2]
    plan = make_folds(11, 5, seed=3)
    sizes = sorted(int((plan.assignments == f).sum()) for f in range(5))
    assert sizes == [2, 2, 2, 2, 3]
    all_idx = np.concatenate([plan.test_indices(f) for f in range(5)])
    assert sorted(all_idx.tolist()) == list(range(11))
    for f in range(5):
        train = set(plan.train_indices(f).tolist())
        test = set(plan.test_indices(f).tolist())
        assert not train & test
        assert train | test == set(range(11))


def test_make_folds_is_deterministic_and_seed_sensitive():
    a = make_folds(50, 5, seed=9)
    b = make_folds(50, 5, seed=9)
    c = make_folds(50, 5, seed=10)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    assert not np.array_equal(a.assignments, c.assignments)


def test_make_folds_validates_arguments():
    with pytest.raises(ValueError, match="k"):
        make_folds(10, 1, seed=0)
    with pytest.raises(ValueError, match="exceeds"):
        make_folds(3, 5, seed=0)


def test_stratified_folds_balance_classes():
    labels = np.array([1] * 10 + [0] * 40)
    plan = make_folds(50, 5, seed=1, labels=labels)
    for f in range(5):
        test = plan.test_indices(f)
        assert labels[test].sum() == 2  # 10 positives spread over 5 folds


def test_one_hot_columns_expand_to_indicators(tmp_path):
    csv = "g,c,y\n1,red,yes\n0,blue,no\n1,?,no\n0,red,yes\n"
    config = dataset_config_from_dict({
        "name": "test",
        "csv_path": write_csv(tmp_path, csv),
        "label_column": "y",
        "positive_label_value": "yes",
        "protected_column": "g",
        "privileged_values": ["1"],
        "one_hot_columns": ["c"],
    })
    ds = load_dataset(config)
    assert ds.feature_names == ["g", "c=red", "c=blue"]
    np.testing.assert_array_equal(ds.rows[:, 1], [1.0, 0.0, 1.0, 1.0])  # missing -> mode red
    np.testing.assert_array_equal(ds.rows[:, 2], [0.0, 1.0, 0.0, 0.0])


def test_protected_column_cannot_be_one_hot(tmp_path):
    with pytest.raises(ConfigError, match="one-hot"):
        dataset_config_from_dict({
            "name": "test",
            "csv_path": "x.csv",
            "label_column": "y",
            "positive_label_value": "yes",
            "protected_column": "g",
            "privileged_values": ["1"],
            "one_hot_columns": ["g"],
        })


def test_duplicate_header_names_are_rejected(tmp_path):
    csv = "g,x,x,y\n1,1,2,yes\n"
    with pytest.raises(DataError, match="duplicate column"):
        load_dataset(base_config(write_csv(tmp_path, csv)))
