import json
from pathlib import Path

import pandas as pd
import pytest

from worstgroup_companion.config import (
    SharedAttribute,
    edge_labels,
    normalize_key,
    read_shared_config,
)
from worstgroup_companion.plot import plot_convergence
from worstgroup_companion.prepare import prepare_dataset
from worstgroup_companion.synth import synth_bike, synth_census
from worstgroup_companion.train import SplitSpec, run_trials, train_and_predict

CONFIG_TEXT = """
[dataset]
path = "unused.csv"
truth_column = "income"
prediction_column = "prediction"

[[dataset.attributes]]
name = "age"
bin_edges = [20, 30, 40, 50, 60]

[[dataset.attributes]]
name = "race"

[metric]
kind = "accuracy"

[search]
budget = 10
"""


@pytest.fixture
def shared(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(CONFIG_TEXT, encoding="utf-8")
    return read_shared_config(path)


class TestSharedConfig:
    def test_columns(self, shared):
        assert shared.subgroup_columns == ["age", "race"]
        assert shared.truth_column == "income"
        assert shared.prediction_column == "prediction"

    def test_edge_labels_match_harness_convention(self):
        assert edge_labels((20.0, 30.0, 40.0, 50.0, 60.0)) == (
            "<20",
            "20-30",
            "30-40",
            "40-50",
            "50-60",
            ">=60",
        )

    def test_bin_label(self, shared):
        age = shared.attributes[0]
        assert age.bin_label(19) == "<20"
        assert age.bin_label(20) == "20-30"
        assert age.bin_label(75) == ">=60"

    def test_value_map_key_normalization(self):
        attr = SharedAttribute("hour", "hr", None, None, {"5": "early"})
        assert attr.bin_label("5.0") == "early"
        assert attr.bin_label(5) == "early"
        assert normalize_key("abc") == "abc"


class TestSynth:
    def test_census_deterministic(self):
        a = synth_census(500, seed=3)
        b = synth_census(500, seed=3)
        pd.testing.assert_frame_equal(a, b)
        assert set(a["income"]) == {"<=50K", ">50K"}

    def test_bike_deterministic_and_positive(self):
        a = synth_bike(500, seed=4)
        b = synth_bike(500, seed=4)
        pd.testing.assert_frame_equal(a, b)
        assert (a["cnt"] >= 0).all()
        assert set(a["hr"]) <= set(range(24))


ADULT_RAW = """39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K
19, Private, 83311, HS-grad, 9, Never-married, Sales, Unmarried, White, Female, 0, 0, 20, United-States, <=50K
50, ?, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, >50K
61, Private, 95276, Masters, 14, Divorced, Tech-support, Not-in-family, Black, Female, 0, 0, 45, United-States, >50K
"""

ADULT_TEST_RAW = """|1x3 Cross validator
25, Private, 226802, 11th, 7, Never-married, Machine-op-inspct, Own-child, Black, Male, 0, 0, 40, United-States, <=50K.
"""


class TestPrepare:
    def adult_shared(self, tmp_path):
        text = CONFIG_TEXT.replace('name = "race"', 'name = "race"\n\n[[dataset.attributes]]\nname = "gender"')
        path = tmp_path / "config.toml"
        path.write_text(text, encoding="utf-8")
        return read_shared_config(path)

    def test_adult_format(self, tmp_path):
        shared = self.adult_shared(tmp_path)
        raw = tmp_path / "adult.data"
        raw.write_text(ADULT_RAW, encoding="utf-8")
        test_raw = tmp_path / "adult.test"
        test_raw.write_text(ADULT_TEST_RAW, encoding="utf-8")
        out = tmp_path / "canonical.csv"
        report = prepare_dataset("adult", [raw, test_raw], shared, out)
        frame = pd.read_csv(out)
        # One raw row has a missing workclass but intact subgroup and truth
        # columns, so it survives; the .test label loses its period.
        assert report.rows_in == 5
        assert report.rows_out == 5
        assert set(frame["income"]) == {"<=50K", ">50K"}
        assert frame.loc[1, "age"] == "<20"
        assert frame.loc[0, "age"] == "30-40"
        assert frame.loc[4, "age"] == "20-30"

    def test_adult_drops_missing_subgroup_rows(self, tmp_path):
        shared = self.adult_shared(tmp_path)
        raw = tmp_path / "adult.data"
        raw.write_text(
            ADULT_RAW.replace(
                "61, Private, 95276, Masters, 14, Divorced, Tech-support, Not-in-family, Black, Female",
                "61, Private, 95276, Masters, 14, Divorced, Tech-support, Not-in-family, ?, Female",
            ),
            encoding="utf-8",
        )
        out = tmp_path / "canonical.csv"
        report = prepare_dataset("adult", [raw], shared, out)
        assert report.rows_in == 4
        assert report.rows_out == 3
        assert report.dropped == 1

    def test_bike_drops_leaky_columns(self, tmp_path):
        config = tmp_path / "config.toml"
        config.write_text(
            """
[dataset]
path = "unused.csv"
truth_column = "cnt"
prediction_column = "prediction"

[[dataset.attributes]]
name = "hour"
column = "hr"

[dataset.attributes.value_map]
"0" = "night"
"8" = "day"
""",
            encoding="utf-8",
        )
        shared = read_shared_config(config)
        raw = tmp_path / "hour.csv"
        pd.DataFrame(
            {
                "instant": [1, 2],
                "dteday": ["2011-01-01", "2011-01-01"],
                "hr": [0, 8],
                "casual": [1, 2],
                "registered": [2, 3],
                "cnt": [3, 5],
                "temp": [0.2, 0.3],
            }
        ).to_csv(raw, index=False)
        out = tmp_path / "canonical.csv"
        prepare_dataset("bike", [raw], shared, out)
        frame = pd.read_csv(out)
        assert set(frame.columns) == {"hr", "cnt", "temp"}
        assert frame["hr"].tolist() == ["night", "day"]


class TestTrainPredict:
    def canonical(self, tmp_path, shared):
        raw = tmp_path / "raw.csv"
        synth_census(900, seed=5).to_csv(raw, index=False)
        out = tmp_path / "canonical.csv"
        prepare_dataset("csv", [raw], shared, out)
        return out

    def test_classifier_predictions_are_labels(self, tmp_path, shared):
        canonical = self.canonical(tmp_path, shared)
        out = train_and_predict(
            canonical,
            "logistic-regression",
            SplitSpec(train_size=300, split_seed=0),
            shared,
            tmp_path / "pred.csv",
        )
        frame = pd.read_csv(out)
        assert len(frame) == 600
        assert set(frame["prediction"]) <= {"<=50K", ">50K"}

    def test_deterministic_given_seed(self, tmp_path, shared):
        canonical = self.canonical(tmp_path, shared)
        a = train_and_predict(
            canonical, "logistic-regression", SplitSpec(300, 7), shared, tmp_path / "a.csv"
        )
        b = train_and_predict(
            canonical, "logistic-regression", SplitSpec(300, 7), shared, tmp_path / "b.csv"
        )
        assert a.read_bytes() == b.read_bytes()

    def test_regressor_predictions_are_real(self, tmp_path):
        config = tmp_path / "config.toml"
        config.write_text(
            """
[dataset]
path = "unused.csv"
truth_column = "cnt"
prediction_column = "prediction"

[[dataset.attributes]]
name = "season"
""",
            encoding="utf-8",
        )
        shared = read_shared_config(config)
        raw = tmp_path / "raw.csv"
        synth_bike(800, seed=6).to_csv(raw, index=False)
        canonical = tmp_path / "canonical.csv"
        prepare_dataset("csv", [raw], shared, canonical)
        out = train_and_predict(
            canonical, "linear-regression", SplitSpec(300, 0), shared, tmp_path / "p.csv"
        )
        frame = pd.read_csv(out)
        assert frame["prediction"].dtype == float

    def test_one_file_per_trial(self, tmp_path, shared):
        canonical = self.canonical(tmp_path, shared)
        paths = run_trials(
            canonical,
            "logistic-regression",
            train_size=300,
            trials=3,
            base_seed=0,
            shared=shared,
            out_dir=tmp_path / "preds",
        )
        assert [p.name for p in paths] == [
            "predictions_trial00.csv",
            "predictions_trial01.csv",
            "predictions_trial02.csv",
        ]
        assert all(p.exists() for p in paths)
        # Different resplits give different test parts.
        assert paths[0].read_bytes() != paths[1].read_bytes()

    def test_unknown_model(self, tmp_path, shared):
        canonical = self.canonical(tmp_path, shared)
        with pytest.raises(ValueError):
            train_and_predict(
                canonical, "random-forest", SplitSpec(300, 0), shared, tmp_path / "x.csv"
            )


def minimal_summary(with_true_worst=True):
    summary = {
        "metric": {"kind": "accuracy", "orientation": "lower-is-worse"},
        "strategies": {
            "rs": {"mean": [0.8, 0.6, 0.5], "stderr": [0.0, 0.05, 0.02]},
        },
        "true_worst": {"subgroup_label": "x", "raw_value": 0.45}
        if with_true_worst
        else None,
    }
    return summary


class TestPlot:
    def test_single_strategy_figure(self, tmp_path):
        summary_path = tmp_path / "summary.json"
        summary_path.write_text(json.dumps(minimal_summary()), encoding="utf-8")
        written = plot_convergence(summary_path, tmp_path / "figs")
        assert [p.suffix for p in written] == [".png", ".svg"]
        assert all(p.stat().st_size > 0 for p in written)

    def test_missing_true_worst_warns(self, tmp_path):
        summary_path = tmp_path / "summary.json"
        summary_path.write_text(
            json.dumps(minimal_summary(with_true_worst=False)), encoding="utf-8"
        )
        with pytest.warns(UserWarning, match="true_worst"):
            written = plot_convergence(summary_path, tmp_path / "figs")
        assert all(p.exists() for p in written)
