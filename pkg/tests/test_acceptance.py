"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line.

Every stochastic criterion uses the single fixed ``SEED`` below.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from choicewalk.cli import main
from choicewalk.experiment import ExperimentConfig, GraphSpec, run_experiment, sweep_h
from choicewalk.graph import (
    connectivity_radius,
    generate_complete,
    generate_cycle,
    generate_path,
    generate_rgg,
    generate_torus,
    stats,
)
from choicewalk.metrics import improvement
from choicewalk.oracle import exact_cover_expectation
from choicewalk.walk import Policy, cover_step_samples

import test_invariants

SEED = 1016
RGG_900 = GraphSpec("rgg", n=900, radius_mult=2.0)
TORUS_30 = GraphSpec("torus", rows=30, cols=30)


def mean_and_se(values):
    values = np.asarray(values, dtype=np.float64)
    return values.mean(), values.std(ddof=1) / math.sqrt(len(values))


def improvement_se(base, base_se, enhanced, enhanced_se):
    """Delta-method standard error of ``improvement(base, enhanced)``."""
    ratio = enhanced / base
    return 100 * ratio * math.hypot(base_se / base, enhanced_se / enhanced)


@pytest.mark.criterion(1, "SRW matches the exact oracle on small graphs")
def test_oracle_equivalence(record_property):
    began = time.perf_counter()
    fixtures = {
        "P2": generate_path(2), "P4": generate_path(4), "C4": generate_cycle(4),
        "C5": generate_cycle(5), "K4": generate_complete(4), "K5": generate_complete(5),
        "T(3,3)": generate_torus(3, 3),
    }
    rng = np.random.default_rng(SEED)
    worst, notes = 0.0, []
    for name, g in fixtures.items():
        exact = exact_cover_expectation(g, 0)
        cover, _ = cover_step_samples(g, Policy.srw(), 0, rng, 100_000)
        mean, se = mean_and_se(cover)
        gap = abs(mean - exact)
        # P2 has a single possible walk, so its spread is zero
        z = gap / se if se > 0 else (0.0 if gap < 1e-12 else math.inf)
        worst = max(worst, z)
        notes.append(f"{name} {mean:.4f}/{exact:.4f}")
    harmonic_err = max(
        abs(exact_cover_expectation(generate_complete(n), 0)
            - float((n - 1) * sum(Fraction(1, i) for i in range(1, n))))
        for n in range(2, 9)
    )
    elapsed = time.perf_counter() - began
    record_property("detail", f"max |z|={worst:.2f}, K_n error={harmonic_err:.1e}, "
                              f"{elapsed:.1f}s; " + ", ".join(notes))
    assert worst <= 3
    assert harmonic_err <= 1e-9
    assert elapsed < 60


@pytest.mark.criterion(2, "one-choice RWC and ERWC are indistinguishable from SRW")
def test_one_choice_degeneracy(record_property):
    rng = np.random.default_rng(SEED)
    worst, notes = 0.0, []
    for name, g in (("C5", generate_cycle(5)), ("T(5,5)", generate_torus(5, 5))):
        base, base_se = mean_and_se(cover_step_samples(g, Policy.srw(), 0, rng, 10_000)[0])
        for pol in (Policy.rwc(1), Policy.erwc(1, 9)):
            # an independent stream per policy, so this is a test of distributions
            mean, se = mean_and_se(cover_step_samples(g, pol, 0, rng, 10_000)[0])
            z = abs(mean - base) / math.hypot(se, base_se)
            worst = max(worst, z)
            notes.append(f"{name} {pol.token} {mean:.3f} vs {base:.3f}")
    record_property("detail", f"max |z|={worst:.2f}; " + ", ".join(notes))
    assert worst <= 3


def _improvements(reports, base_token, enh_token):
    b, e = reports[base_token], reports[enh_token]
    cs = improvement(b.mean_cs_norm, e.mean_cs_norm)
    mnl = improvement(b.mean_mnlcs, e.mean_mnlcs)
    cs_se = improvement_se(b.mean_cs_norm, b.cs_se_norm, e.mean_cs_norm, e.cs_se_norm)
    mnl_se = improvement_se(b.mean_mnlcs, b.mnlcs_se, e.mean_mnlcs, e.mnlcs_se)
    return cs, mnl, cs_se, mnl_se


@pytest.mark.criterion(3, "RGG family: ERWC(2) improves on RWC(2) by 15-35%")
def test_rgg_family(record_property):
    began = time.perf_counter()
    policies = tuple(Policy.parse(t) for t in ("srw", "rwc:2", "erwc:2:9"))
    cfg = ExperimentConfig(RGG_900, policies, graphs=200, starts=2, runs=2, base_seed=SEED,
                           fractions=())
    reps = run_experiment(cfg).reports
    cs, mnl, _, _ = _improvements(reps, "rwc:2", "erwc:2:9")
    srw, rwc, erwc = reps["srw"], reps["rwc:2"], reps["erwc:2:9"]
    elapsed = time.perf_counter() - began
    record_property("detail", (
        f"CS {srw.mean_cs_norm:.3f}/{rwc.mean_cs_norm:.3f}/{erwc.mean_cs_norm:.3f}, "
        f"MNLCS {srw.mean_mnlcs:.2f}/{rwc.mean_mnlcs:.2f}/{erwc.mean_mnlcs:.2f}, "
        f"improvement {cs:.2f}% / {mnl:.2f}%, R={erwc.replicates}, {elapsed:.0f}s"))
    assert erwc.replicates == 800
    assert 15 <= cs <= 35
    assert 15 <= mnl <= 35
    assert 10 <= srw.mean_cs_norm <= 25
    assert srw.mean_cs_norm > rwc.mean_cs_norm > erwc.mean_cs_norm
    assert srw.mean_mnlcs > rwc.mean_mnlcs > erwc.mean_mnlcs
    assert elapsed < 15 * 60


@pytest.mark.criterion(4, "torus T(30,30), h=3: improvements for d=2 and d=4")
def test_torus_table(record_property):
    tokens = ("rwc:2", "erwc:2:3", "rwc:4", "erwc:4:3")
    cfg = ExperimentConfig(TORUS_30, tuple(Policy.parse(t) for t in tokens), graphs=250,
                           starts=2, runs=2, base_seed=SEED, fractions=())
    reps = run_experiment(cfg).reports
    cs2, mnl2, cs2_se, mnl2_se = _improvements(reps, "rwc:2", "erwc:2:3")
    cs4, mnl4, cs4_se, mnl4_se = _improvements(reps, "rwc:4", "erwc:4:3")
    runs = reps["erwc:2:3"].replicates
    record_property("detail", (
        f"d=2 {cs2:.2f}% / {mnl2:.2f}%, d=4 {cs4:.2f}% / {mnl4:.2f}% "
        f"(SE {cs2_se:.2f}, {mnl2_se:.2f}, {cs4_se:.2f}, {mnl4_se:.2f}), runs={runs}"))
    assert runs >= 500
    assert 5 <= cs2 <= 25 and 5 <= mnl2 <= 25
    assert 10 <= cs4 <= 30 and 10 <= mnl4 <= 30
    assert cs4 >= cs2 - math.hypot(cs2_se, cs4_se)
    assert mnl4 >= mnl2 - math.hypot(mnl2_se, mnl4_se)


@pytest.mark.criterion(5, "h sweeps: argmin of mean MNLCS near 9 (RGG) and near 3 (torus)")
def test_h_sweeps(record_property):
    began = time.perf_counter()
    rgg = sweep_h(RGG_900, [2], range(2, 31), graphs=30, starts=2, runs=2, base_seed=SEED)
    torus = sweep_h(TORUS_30, [2], range(2, 13), graphs=30, starts=2, runs=2, base_seed=SEED)
    elapsed = time.perf_counter() - began
    best_rgg, best_torus = rgg.best_h[2], torus.best_h[2]
    curve = ", ".join(f"{h}:{mnl:.2f}" for _, h, _, mnl in torus.rows)
    record_property("detail", f"RGG argmin h={best_rgg}, torus argmin h={best_torus} "
                              f"(torus MNLCS {curve}), {elapsed:.0f}s")
    assert 5 <= best_rgg <= 15
    assert 2 <= best_torus <= 5
    assert elapsed < 30 * 60


@pytest.mark.criterion(6, "mean degree of G(900, 2 r_con) lies in [24, 30]")
def test_rgg_degree(record_property):
    rng = np.random.default_rng(SEED)
    radius = 2 * connectivity_radius(900)
    degrees = [float(stats(generate_rgg(900, radius, rng)[0]).mean_degree) for _ in range(100)]
    mean = float(np.mean(degrees))
    record_property("detail", f"mean d_n={mean:.3f} over 100 graphs (4 ln 900 = {4 * math.log(900):.2f})")
    assert 24 <= mean <= 30


@pytest.mark.criterion(7, "CLI outputs are byte-identical for any --jobs")
def test_cli_determinism(tmp_path, monkeypatch, record_property):
    monkeypatch.chdir(tmp_path)
    exp = ["experiment", "--family", "rgg", "--n", "200", "--radius-mult", "2", "--policies",
           "srw", "rwc:2", "erwc:2:9", "--graphs", "6", "--seed", str(SEED)]
    sweep = ["sweep", "--family", "rgg", "--n", "200", "--d", "2,3", "--h", "2:6", "--graphs", "4",
             "--seed", str(SEED)]
    for jobs in (1, 2, 4):
        assert main(exp + ["--jobs", str(jobs), "--out", f"exp{jobs}"]) == 0
        assert main(sweep + ["--jobs", str(jobs), "--out", f"sw{jobs}"]) == 0
    names = ["report.csv", "cs_dist.csv", "mnl_dist.csv", "partial_cover.csv", "visit_hist.csv",
             "config.json"]
    same = [(tmp_path / f"exp{j}" / n).read_bytes() == (tmp_path / "exp1" / n).read_bytes()
            for j in (2, 4) for n in names]
    same += [(tmp_path / f"sw{j}" / "sweep.csv").read_bytes() == (tmp_path / "sw1" / "sweep.csv").read_bytes()
             for j in (2, 4)]
    record_property("detail", f"{sum(same)}/{len(same)} files identical across --jobs 1, 2, 4")
    assert all(same)


@pytest.mark.criterion(8, "walk invariants hold on 1000 random small graphs each")
def test_invariant_suite(record_property):
    properties = [
        test_invariants.test_visit_sum_and_cover_count,
        test_invariants.test_metric_sum_identity,
        test_invariants.test_unvisited_candidates_dominate,
        test_invariants.test_rwc_choice_minimizes_score,
        test_invariants.test_ties_broken_uniformly,
    ]
    for prop in properties:
        prop()
    test_invariants.test_tie_frequency_within_three_sigma()
    record_property("detail", f"{len(properties)} properties x 1000 cases + 5-way tie frequency test")
