"""Synthetic stand-ins for the public census and bike-rental datasets.

Offline environments cannot reach the public repositories, so these
generators produce raw files with the same column layout and value ranges.
The census generator additionally plants a localized labeling regime that a
plain additive model cannot express: label flips concentrated on one
subgroup conjunction, decaying with the number of attributes shared with
it.  A model trained on this data genuinely performs worst on that cell,
which gives the search engine a realistic, structured target.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

AGE_BIN_EDGES = (20, 30, 40, 50, 60)

RACES = ("Amer-Indian-Eskimo", "Asian-Pac-Islander", "Black", "Other", "White")
RACE_P = (0.05, 0.08, 0.15, 0.05, 0.67)
GENDERS = ("Female", "Male")
GENDER_P = (0.48, 0.52)
RELATIONSHIPS = (
    "Husband",
    "Not-in-family",
    "Other-relative",
    "Own-child",
    "Unmarried",
    "Wife",
)
RELATIONSHIP_P = (0.38, 0.26, 0.03, 0.16, 0.12, 0.05)
OCCUPATIONS = ("Admin", "Craft", "Exec", "Sales", "Service", "Tech")
WORKCLASSES = ("Federal-gov", "Local-gov", "Private", "Self-emp")

#: The conjunction on which the monitored model is made to fail: age bin
#: index, race, gender, relationship.
CENSUS_FAILURE_CELL = (2, "White", "Female", "Unmarried")


def _age_bin(age: np.ndarray) -> np.ndarray:
    return np.sum(age[:, None] >= np.asarray(AGE_BIN_EDGES)[None, :], axis=1)


def synth_census(
    n_rows: int,
    seed: int,
    *,
    failure_rate: float = 0.8,
    failure_decay: float = 0.7,
) -> pd.DataFrame:
    """Census-like rows with a planted region of systematic label flips.

    The base income label follows an additive logistic signal that a linear
    model recovers well; rows near ``CENSUS_FAILURE_CELL`` then have their
    label flipped with probability ``failure_rate * exp(-d / failure_decay)``
    where d counts the subgroup attributes differing from the cell.
    """
    rng = np.random.default_rng(seed)
    age = np.clip(rng.normal(40, 14, n_rows).round(), 17, 90).astype(int)
    race = rng.choice(RACES, n_rows, p=RACE_P)
    gender = rng.choice(GENDERS, n_rows, p=GENDER_P)
    relationship = rng.choice(RELATIONSHIPS, n_rows, p=RELATIONSHIP_P)
    education_num = rng.integers(1, 17, n_rows)
    hours = np.clip(rng.normal(41, 11, n_rows).round(), 1, 99).astype(int)
    has_gain = rng.random(n_rows) < 0.08
    capital_gain = np.where(
        has_gain, rng.exponential(8000, n_rows).round(), 0.0
    ).astype(int)
    occupation = rng.choice(OCCUPATIONS, n_rows)
    workclass = rng.choice(WORKCLASSES, n_rows, p=(0.05, 0.08, 0.75, 0.12))

    score = (
        -6.0
        + 0.33 * education_num
        + 0.045 * hours
        + 0.022 * np.minimum(age, 60)
        + 0.00008 * capital_gain
        + np.where(gender == "Male", 0.3, 0.0)
        + np.where(relationship == "Husband", 0.9, 0.0)
        + np.where(relationship == "Wife", 0.7, 0.0)
        + np.where(relationship == "Own-child", -1.2, 0.0)
        + np.where(occupation == "Exec", 0.5, 0.0)
        + np.where(occupation == "Service", -0.4, 0.0)
    )
    p_high = 1.0 / (1.0 + np.exp(-score))
    label = rng.random(n_rows) < p_high

    target_bin, target_race, target_gender, target_rel = CENSUS_FAILURE_CELL
    differing = (
        (_age_bin(age) != target_bin).astype(int)
        + (race != target_race).astype(int)
        + (gender != target_gender).astype(int)
        + (relationship != target_rel).astype(int)
    )
    flip_p = failure_rate * np.exp(-differing / failure_decay)
    label = label ^ (rng.random(n_rows) < flip_p)

    return pd.DataFrame(
        {
            "age": age,
            "race": race,
            "gender": gender,
            "relationship": relationship,
            "education_num": education_num,
            "hours_per_week": hours,
            "capital_gain": capital_gain,
            "occupation": occupation,
            "workclass": workclass,
            "income": np.where(label, ">50K", "<=50K"),
        }
    )


def synth_bike(n_rows: int, seed: int) -> pd.DataFrame:
    """Hourly bike-rental rows with a nonlinear demand profile.

    Demand peaks at commute hours on working days and collapses in bad
    weather; a linear model leaves its largest errors on those cells.
    """
    rng = np.random.default_rng(seed)
    season = rng.integers(1, 5, n_rows)
    weathersit = rng.choice([1, 2, 3], n_rows, p=(0.66, 0.26, 0.08))
    hr = rng.integers(0, 24, n_rows)
    workingday = rng.choice([0, 1], n_rows, p=(0.31, 0.69))
    temp = np.clip(
        rng.normal(0.45 + 0.12 * (season == 3) - 0.18 * (season == 1), 0.15),
        0.02,
        1.0,
    )
    hum = np.clip(rng.normal(0.62 + 0.1 * (weathersit == 3), 0.14), 0.1, 1.0)
    windspeed = np.clip(rng.exponential(0.19, n_rows), 0.0, 0.85)

    commute = np.isin(hr, (7, 8, 17, 18, 19)) & (workingday == 1)
    midday_leisure = np.isin(hr, range(11, 17)) & (workingday == 0)
    base = (
        40
        + 260 * commute
        + 120 * midday_leisure
        + 90 * np.sin(np.pi * (hr - 5).clip(0, 16) / 16)
        + 160 * temp
        - 110 * (weathersit == 3)
        - 35 * (weathersit == 2)
        - 60 * hum
    )
    cnt = np.maximum(
        0, base * rng.lognormal(0.0, 0.25, n_rows)
    ).round().astype(int)

    return pd.DataFrame(
        {
            "season": season,
            "weathersit": weathersit,
            "hr": hr,
            "workingday": workingday,
            "temp": np.round(temp, 4),
            "hum": np.round(hum, 4),
            "windspeed": np.round(windspeed, 4),
            "cnt": cnt,
        }
    )


GENERATORS = {"census": synth_census, "bike": synth_bike}
