"""Cache-aware download of the public raw datasets.

Downloading is a separate step so everything else runs offline once the raw
files are on disk (or when synthetic stand-ins are used instead).
"""

from __future__ import annotations

import shutil
import urllib.request
import zipfile
from pathlib import Path

UCI_BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "adult": [
        (f"{UCI_BASE}/adult/adult.data", "adult.data"),
        (f"{UCI_BASE}/adult/adult.test", "adult.test"),
    ],
    "bike": [
        (f"{UCI_BASE}/00275/Bike-Sharing-Dataset.zip", "Bike-Sharing-Dataset.zip"),
    ],
}


def fetch_dataset(name: str, cache_dir: Path) -> list[Path]:
    """Download raw files into the cache unless already present.

    Returns the local paths ready for ``prepare`` (for bike, the extracted
    hourly CSV).
    """
    if name not in SOURCES:
        raise ValueError(f"unknown dataset {name!r}; expected one of {sorted(SOURCES)}")
    cache_dir.mkdir(parents=True, exist_ok=True)
    local = []
    for url, filename in SOURCES[name]:
        path = cache_dir / filename
        if not path.exists():
            tmp = path.with_suffix(path.suffix + ".part")
            with urllib.request.urlopen(url) as response, open(tmp, "wb") as out:
                shutil.copyfileobj(response, out)
            tmp.rename(path)
        local.append(path)
    if name == "bike":
        hourly = cache_dir / "hour.csv"
        if not hourly.exists():
            with zipfile.ZipFile(local[0]) as archive:
                archive.extract("hour.csv", cache_dir)
        return [hourly]
    return local
