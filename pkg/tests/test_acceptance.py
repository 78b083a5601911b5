"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Everything here runs from synthetic landscapes and the checked-in fixture
CSVs; no network and no companion package are required.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from worstgroup import (
    BoConfig,
    KernelParams,
    MetricSpec,
    Subgroup,
    expected_improvement,
    fit,
    load_config,
    load_dataset,
    run_bo,
    run_exhaustive_search,
    run_experiment,
    run_random_search,
    subgroup_metric,
    supported_subgroups,
)
from worstgroup.errors import UndefinedMetricError
from worstgroup.gp import posterior_batch
from worstgroup.harness import find_true_worst, iterations_to_find
from worstgroup.subgroups import encode_many, enumerate_subgroups

from landscapes import accuracy_lattice, planted_accuracy_landscape
from test_gp import dense_kernel, dense_posterior
from test_harness import write_config, write_csv
from test_oracle import class_dataset, real_dataset
from test_subgroups import schema_of

FIXTURES = Path(__file__).parent / "fixtures"


class criterion:
    """Prints one PASS/FAIL line per acceptance criterion."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        print(f"\n[ACCEPTANCE] {self.name}: {status}")
        return False


def test_gp_oracle_equivalence():
    """Factorization posterior == dense-inverse oracle, 50 random problems."""
    with criterion("GP oracle equivalence (50 problems, rel 1e-8, <10s)"):
        rng = np.random.default_rng(101)
        schema = schema_of(4, 3, 5)
        lattice = enumerate_subgroups(schema)
        encoded = encode_many(schema, lattice)
        start = time.monotonic()
        for _ in range(50):
            n = int(rng.integers(2, 51))
            train = encoded[rng.choice(len(lattice), size=n, replace=False)]
            targets = rng.normal(
                loc=rng.uniform(-3, 3), scale=rng.uniform(0.2, 2.0), size=n
            )
            params = KernelParams(
                lengthscale=float(np.exp(rng.uniform(np.log(0.2), np.log(5.0)))),
                signal_variance=float(rng.uniform(0.25, 4.0)),
                noise_variance=float(rng.choice([0.0, 1e-4, 1e-2, 0.1])),
            )
            model = fit(train, targets, params)
            queries = encoded[rng.choice(len(lattice), size=10, replace=False)]
            means, variances = posterior_batch(model, queries)
            z = (targets - model.target_mean) / model.target_std
            oracle_m, oracle_v = dense_posterior(
                train, z, queries, params, model.jitter_used
            )
            oracle_m = model.target_mean + model.target_std * oracle_m
            oracle_v = model.target_std**2 * oracle_v
            np.testing.assert_allclose(means, oracle_m, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(variances, oracle_v, rtol=1e-8, atol=1e-10)
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_ei_matches_monte_carlo():
    """Closed-form EI vs E[max(f_best - X, 0)] over 1e6 normal samples."""
    with criterion("EI correctness (20 triples vs Monte-Carlo, abs 1e-3)"):
        rng = np.random.default_rng(2024)
        half = rng.standard_normal(500_000)
        z = np.concatenate([half, -half])  # antithetic pairs, 1e6 samples
        triples = []
        for _ in range(17):
            mean = float(rng.uniform(-2, 2))
            sigma = float(rng.uniform(0.05, 1.5))
            f_best = mean + float(rng.uniform(-2, 2))
            triples.append((mean, sigma, f_best))
        triples += [(0.5, 0.0, 0.5), (0.2, 0.0, 0.9), (1.4, 0.0, 0.3)]
        assert len(triples) == 20
        for mean, sigma, f_best in triples:
            samples = mean + sigma * z
            mc = float(np.maximum(f_best - samples, 0.0).mean())
            closed = expected_improvement(mean, sigma**2, f_best)
            assert closed == pytest.approx(mc, abs=1e-3), (mean, sigma, f_best)


def test_exhaustion_consistency():
    """All three strategies at full budget agree with the exhaustive truth."""
    with criterion("Exhaustion consistency (6x6 lattice, budget 36, exact)"):
        dataset, metric, target = planted_accuracy_landscape(seed=7)
        truth_sub, truth_raw = find_true_worst(dataset, metric)
        assert truth_sub == target
        traces = [
            run_bo(dataset, metric, BoConfig(budget=36, seed=0, initial_design=6)),
            run_random_search(dataset, metric, 36, 0),
            run_exhaustive_search(dataset, metric, 36),
        ]
        for trace in traces:
            assert trace.incumbent == truth_sub
            assert trace.best_raw == truth_raw


def test_search_efficiency_planted_landscape():
    """BO beats RS on the planted landscape family over 20 seeds."""
    with criterion(
        "Search efficiency (BO median < RS median; BO curve <= RS at T/2)"
    ):
        dataset, metric, target = planted_accuracy_landscape(seed=7)
        budget = 36
        bo_finds, rs_finds, bo_curves, rs_curves = [], [], [], []
        for seed in range(20):
            bo = run_bo(
                dataset, metric, BoConfig(budget=budget, seed=seed, initial_design=6)
            )
            rs = run_random_search(dataset, metric, budget, seed)
            bo_finds.append(iterations_to_find(bo, target))
            rs_finds.append(iterations_to_find(rs, target))
            bo_curves.append([s.best_so_far_raw for s in bo.steps])
            rs_curves.append([s.best_so_far_raw for s in rs.steps])
        assert all(f is not None for f in bo_finds + rs_finds)
        assert np.median(bo_finds) < np.median(rs_finds)
        half = budget // 2
        bo_mean = np.mean([c[half - 1] for c in bo_curves])
        rs_mean = np.mean([c[half - 1] for c in rs_curves])
        assert bo_mean <= rs_mean


def test_search_efficiency_census_fixture():
    """Soft check on the checked-in census predictions fixture."""
    with criterion(
        "Search efficiency (census fixture: BO finds true worst "
        "within 150 iterations in >= 15/20 trials)"
    ):
        config = load_config(FIXTURES / "adult_synth.toml")
        dataset = load_dataset(config.dataset_paths[0], config.dataset_spec)
        metric = config.metric
        threshold = config.support_threshold
        pool = supported_subgroups(dataset, metric, threshold)
        assert len(pool) > config.budget, "pool must exceed the budget"
        target, _ = find_true_worst(dataset, metric, threshold)
        found = 0
        for trial in range(config.trials):
            trace = run_bo(
                dataset,
                metric,
                BoConfig(
                    budget=config.budget,
                    seed=config.base_seed + trial,
                    initial_design=config.initial_design,
                    refit_every=config.refit_every,
                ),
                support_threshold=threshold,
            )
            k = iterations_to_find(trace, target)
            if k is not None and k <= 150:
                found += 1
        assert found >= 15, f"found in only {found}/20 trials"


def test_trace_invariants_suite(tmp_path):
    """No duplicates, monotone best-so-far, exact budgets, bit-identical reruns."""
    with criterion("Trace invariants (all strategies, random configs)"):
        rng = np.random.default_rng(55)
        for case in range(5):
            shape = (int(rng.integers(3, 7)), int(rng.integers(3, 7)))
            values = np.round(rng.uniform(0.1, 0.9, size=shape) * 10) / 10
            dataset, metric = accuracy_lattice(values, rows_per_cell=10)
            pool_size = shape[0] * shape[1]
            budget = int(rng.integers(3, pool_size + 4))
            seed = int(rng.integers(0, 1000))
            n0 = int(rng.integers(0, min(5, budget) + 1))
            runs = {
                "bo": lambda: run_bo(
                    dataset,
                    metric,
                    BoConfig(budget=budget, seed=seed, initial_design=n0),
                ),
                "rs": lambda: run_random_search(dataset, metric, budget, seed),
                "es": lambda: run_exhaustive_search(dataset, metric, budget),
            }
            for name, runner in runs.items():
                trace = runner()
                subs = [s.subgroup for s in trace.steps]
                assert len(set(subs)) == len(subs), f"{name}: duplicate evaluation"
                assert len(subs) == min(budget, pool_size), f"{name}: budget"
                bests = [s.best_so_far_oriented for s in trace.steps]
                assert all(a >= b for a, b in zip(bests, bests[1:])), name
                rerun = runner()
                assert rerun.steps == trace.steps, f"{name}: not reproducible"
                assert rerun.incumbent == trace.incumbent

        # Whole-experiment outputs are byte-identical under a fixed config.
        values = np.full((3, 3), 0.8)
        values[2, 0] = 0.3
        data = tmp_path / "data.csv"
        write_csv(data, values)
        config = load_config(
            write_config(
                tmp_path / "exp.toml",
                data,
                "out",
                strategies=["bo", "rs", "es"],
                budget=9,
                trials=2,
                initial_design=3,
            )
        )
        first = run_experiment(config)
        trace_bytes = first.trace_path.read_bytes()
        summary_bytes = first.summary_path.read_bytes()
        second = run_experiment(config)
        assert second.trace_path.read_bytes() == trace_bytes
        assert second.summary_path.read_bytes() == summary_bytes


def test_metric_unit_suite():
    """Hand-checked metric values, the undefined-precision path, and the
    support-weighted partition property."""
    with criterion("Metric unit suite (hand cases, errors, partition)"):
        acc = MetricSpec("accuracy")
        mse = MetricSpec("mse")
        prec = MetricSpec("precision", positive_label="1")
        rec = MetricSpec("recall", positive_label="1")
        cell = Subgroup((0, 0))

        ds = class_dataset([(0, 0)] * 2, ["a", "b"], ["a", "b"])
        assert subgroup_metric(ds, cell, acc) == 1.0
        ds = class_dataset([(0, 0)] * 2, ["1", "1"], ["1", "0"])
        assert subgroup_metric(ds, cell, acc) == 0.5
        ds = real_dataset([(0, 0)] * 2, [0.0, 2.0], [1.0, 1.0])
        assert subgroup_metric(ds, cell, mse) == 1.0
        ds = real_dataset([(0, 0)] * 2, [1.0, 2.0], [1.0, 2.0])
        assert subgroup_metric(ds, cell, mse) == 0.0
        ds = class_dataset(
            [(0, 0)] * 4, ["1", "1", "0", "0"], ["1", "0", "1", "0"]
        )
        assert subgroup_metric(ds, cell, prec) == 0.5
        assert subgroup_metric(ds, cell, rec) == 0.5

        ds = class_dataset([(0, 0)] * 2, ["1", "0"], ["0", "0"])
        with pytest.raises(UndefinedMetricError):
            subgroup_metric(ds, cell, prec)

        from worstgroup import global_metric

        rng = np.random.default_rng(77)
        for _ in range(25):
            n = int(rng.integers(6, 80))
            rows = rng.integers(0, 2, size=(n, 2))
            for metric, dataset in (
                (
                    acc,
                    class_dataset(
                        rows,
                        rng.choice(["a", "b"], n).astype(object),
                        rng.choice(["a", "b"], n).astype(object),
                    ),
                ),
                (
                    mse,
                    real_dataset(rows, rng.normal(size=n), rng.normal(size=n)),
                ),
            ):
                weighted = sum(
                    subgroup_metric(dataset, s, metric) * dataset.support(s)
                    for s in supported_subgroups(dataset, metric)
                )
                assert weighted / dataset.n_rows == pytest.approx(
                    global_metric(dataset, metric), abs=1e-10
                )
