"""Train reference models on random resplits and emit predictions CSVs.

Each trial resplits the canonical dataset (seeded), trains the chosen
scikit-learn model with default settings on the train part, and writes the
test part with one appended prediction column, directly loadable by the
harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd
from sklearn.compose import ColumnTransformer
from sklearn.ensemble import GradientBoostingClassifier, GradientBoostingRegressor
from sklearn.linear_model import LinearRegression, LogisticRegression
from sklearn.model_selection import train_test_split
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import OneHotEncoder, StandardScaler

from .config import SharedConfig

MODELS = {
    "logistic-regression": (LogisticRegression, True),
    "gradient-boosting-classifier": (GradientBoostingClassifier, True),
    "linear-regression": (LinearRegression, False),
    "gradient-boosting-regressor": (GradientBoostingRegressor, False),
}


@dataclass(frozen=True)
class SplitSpec:
    """One resplit: how many rows to train on and the seed that draws them."""

    train_size: int
    split_seed: int

    def __post_init__(self) -> None:
        if self.train_size < 1:
            raise ValueError("train_size must be positive")


def _pipeline(model_cls, frame: pd.DataFrame, features: list[str]):
    # Models keep their library defaults; encoding/scaling is just the
    # feature plumbing they need.
    categorical = [c for c in features if frame[c].dtype == object]
    numeric = [c for c in features if c not in categorical]
    encoder = ColumnTransformer(
        [
            (
                "categorical",
                OneHotEncoder(handle_unknown="ignore"),
                categorical,
            ),
            ("numeric", StandardScaler(), numeric),
        ]
    )
    return Pipeline([("encode", encoder), ("model", model_cls())])


def train_and_predict(
    canonical_csv: Path,
    model_name: str,
    spec: SplitSpec,
    shared: SharedConfig,
    out_path: Path,
) -> Path:
    """Train one model on one resplit and write the test-part predictions CSV."""
    if model_name not in MODELS:
        raise ValueError(
            f"unknown model {model_name!r}; expected one of {sorted(MODELS)}"
        )
    model_cls, is_classifier = MODELS[model_name]
    frame = pd.read_csv(canonical_csv)
    truth = shared.truth_column
    if truth not in frame.columns:
        raise ValueError(f"canonical data lacks truth column {truth!r}")
    if is_classifier:
        frame[truth] = frame[truth].astype(str)
    if spec.train_size >= len(frame):
        raise ValueError(
            f"train_size {spec.train_size} needs more rows than the "
            f"{len(frame)} available"
        )

    train, test = train_test_split(
        frame, train_size=spec.train_size, random_state=spec.split_seed
    )
    features = [c for c in frame.columns if c != truth]
    pipeline = _pipeline(model_cls, frame, features)
    pipeline.fit(train[features], train[truth])
    predictions = pipeline.predict(test[features])

    out = test.copy()
    out[shared.prediction_column] = predictions
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(out_path, index=False)
    return out_path


def run_trials(
    canonical_csv: Path,
    model_name: str,
    train_size: int,
    trials: int,
    base_seed: int,
    shared: SharedConfig,
    out_dir: Path,
    prefix: str = "predictions",
) -> list[Path]:
    """One predictions file per (trial, split seed = base_seed + trial)."""
    paths = []
    for trial in range(trials):
        spec = SplitSpec(train_size=train_size, split_seed=base_seed + trial)
        out_path = out_dir / f"{prefix}_trial{trial:02d}.csv"
        paths.append(
            train_and_predict(canonical_csv, model_name, spec, shared, out_path)
        )
    return paths
