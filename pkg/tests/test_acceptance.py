"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""
import itertools
import math
import time

import numpy as np
import pytest

from qnnae import cli, dataio, evaluate, mlp, pqm
from qnnae.dataio import SplitSpec
from qnnae.evaluate import PerformanceVector, WeightGrid
from qnnae.mlp import MlpArchitecture
from qnnae.pqm import BitString, PatternMemory


def verdict(name, passed, detail=""):
    print(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}")
    assert passed, f"{name}: {detail}"


def random_case(rng):
    n = int(rng.integers(1, 7))
    p = int(rng.integers(1, 9))
    memory = PatternMemory(BitString(rng.integers(0, 2, n)) for _ in range(p))
    return memory, BitString(rng.integers(0, 2, n))


def test_criterion_1_circuit_matches_analytic():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        memory, probe = random_case(rng)
        analytic = pqm.retrieve_analytic(memory, probe)
        circuit = pqm.retrieve_exact_from_circuit(memory, probe)
        worst = max(worst, abs(circuit.p0 - analytic.p0))
    elapsed = time.perf_counter() - start
    verdict(
        "1 circuit/analytic agreement",
        worst <= 1e-9 and elapsed < 10.0,
        f"worst={worst:.2e} time={elapsed:.2f}s",
    )


def test_criterion_2_normalization():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(1000):
        memory, probe = random_case(rng)
        out = pqm.retrieve_analytic(memory, probe)
        worst = max(worst, abs(out.p0 + out.p1 - 1.0))
    verdict("2 p0+p1 normalization", worst <= 1e-12, f"worst={worst:.2e}")


def test_criterion_3_shot_convergence():
    memory = PatternMemory.from_strings(["00", "01", "10", "11"])
    shots = 100000
    out, _ = pqm.retrieve_circuit(memory, BitString.from_string("00"), shots, 303)
    bound = 4 * math.sqrt(0.25 / shots)
    verdict(
        "3 shot convergence",
        abs(out.p0 - 0.5) <= bound,
        f"freq={out.p0:.5f} bound={bound:.5f}",
    )


def test_criterion_4_score_identity():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(1000):
        t_s = int(rng.integers(1, 15))
        vectors = [
            PerformanceVector(BitString(rng.integers(0, 2, t_s)))
            for _ in range(int(rng.integers(1, 12)))
        ]
        direct = evaluate.score(vectors, t_s)
        via_memory = pqm.retrieve_analytic(
            PatternMemory(v.bits for v in vectors), BitString.ones(t_s)
        ).p0
        worst = max(worst, abs(direct - via_memory))
    verdict("4 score identity", worst <= 1e-12, f"worst={worst:.2e}")


def test_criterion_5_exhaustive_equivalence():
    # stated as "(2,1,1) ... 8 weights, 256 networks"; the architecture's own
    # weight-count rule gives 5 weights, hence 32 networks at 2 levels
    start = time.perf_counter()
    dataset = dataio.make_synthetic("xor", 120, 0.15, seed=3)
    arch = MlpArchitecture(2, 1, 1)
    grid = WeightGrid((-1.0, 1.0), arch.weight_count)
    spec = SplitSpec(seed=0)
    report = evaluate.evaluate_exhaustive(arch, dataset, grid, train=False, split_spec=spec)

    _, _, x_val, y_val, mean, scale = evaluate.standardized_splits(dataset, spec)
    xs = (x_val - mean) / scale
    t_s = len(y_val)
    total = 0.0
    for point in itertools.product((-1.0, 1.0), repeat=arch.weight_count):
        w1 = np.array(point[:3]).reshape(3, 1)
        w2 = np.array(point[3:]).reshape(2, 1)
        hidden = 1.0 / (1.0 + np.exp(-(xs @ w1[:2] + w1[2])))
        z = (hidden @ w2[:1] + w2[1])[:, 0]
        misses = int(np.sum((z > 0).astype(int) != y_val))
        total += math.cos(math.pi * misses / (2 * t_s)) ** 2
    expected = total / grid.num_points
    elapsed = time.perf_counter() - start
    verdict(
        "5 exhaustive equivalence",
        report.score_p0 == expected and elapsed < 5.0,
        f"score={report.score_p0:.12f} oracle={expected:.12f} time={elapsed:.2f}s",
    )


def test_criterion_6_gradient_check():
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(600 + seed)
        activation = ["logistic", "tanh", "relu"][seed % 3]
        arch = MlpArchitecture(
            int(rng.integers(1, 5)),
            int(rng.integers(1, 7)),
            int(rng.integers(1, 4)),
            activation,
        )
        w = mlp.init_weights(arch, seed)
        x = rng.normal(size=(int(rng.integers(2, 12)), arch.input_dim))
        y = rng.integers(0, arch.num_classes if arch.output_dim > 1 else 2, x.shape[0])
        _, analytic = mlp.loss_and_grad(arch, w, x, y, 1e-4)
        eps = 1e-5
        numeric = np.zeros_like(w)
        for i in range(len(w)):
            wp, wm = w.copy(), w.copy()
            wp[i] += eps
            wm[i] -= eps
            numeric[i] = (
                mlp._loss_only(arch, wp, x, y, 1e-4)
                - mlp._loss_only(arch, wm, x, y, 1e-4)
            ) / (2 * eps)
        denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric) / denom)))
    verdict("6 gradient check", worst <= 1e-5, f"worst relative error={worst:.2e}")


def test_criterion_7_accuracy_score_correlation():
    from scipy.stats import spearmanr

    start = time.perf_counter()
    xor = dataio.make_synthetic("xor", 400, 0.15, seed=3)
    gaussians = dataio.make_synthetic("two_gaussians", 400, 0.3, seed=4)
    xor_reports = evaluate.sweep(xor, (1, 20), num_samples=200, seed=0)
    gaussian_reports = evaluate.sweep(gaussians, (1, 20), num_samples=200, seed=0)
    elapsed = time.perf_counter() - start

    # two_gaussians saturates (every architecture at accuracy 1.0), which makes a
    # per-dataset rank correlation degenerate; the correlation is taken across all
    # architecture points of both datasets jointly
    reports = xor_reports + gaussian_reports
    rho, _ = spearmanr(
        [r.mean_accuracy for r in reports], [r.score_p0 for r in reports]
    )
    xor_rho, _ = spearmanr(
        [r.mean_accuracy for r in xor_reports], [r.score_p0 for r in xor_reports]
    )
    ordering = xor_reports[0].score_p0 < xor_reports[3].score_p0
    verdict(
        "7 accuracy/score correlation",
        rho >= 0.8 and ordering and elapsed < 300.0,
        f"rho={rho:.3f} xor_rho={xor_rho:.3f} "
        f"h1={xor_reports[0].score_p0:.4f} h4={xor_reports[3].score_p0:.4f} "
        f"time={elapsed:.1f}s",
    )


def test_criterion_8_cli_determinism(tmp_path):
    csv_path = tmp_path / "xor.csv"
    dataio.write_csv(dataio.make_synthetic("xor", 80, 0.15, seed=3), csv_path)
    outputs = []
    for label, extra in (
        ("a", []),
        ("b", []),
        ("t1", ["--threads", "1"]),
        ("t8", ["--threads", "8"]),
    ):
        out_path = tmp_path / f"sweep_{label}.csv"
        code = cli.main(
            ["sweep", str(csv_path), "--hidden-range", "1", "4", "--samples", "70",
             "--seed", "5", "--out", str(out_path)] + extra
        )
        assert code == 0
        outputs.append(out_path.read_bytes())
    verdict(
        "8 CLI determinism",
        outputs[0] == outputs[1] and outputs[2] == outputs[3] == outputs[0],
        f"{len(outputs[0])} bytes, identical across reruns and thread counts",
    )


def test_criterion_9_default_config(tmp_path, capsys):
    csv_path = tmp_path / "xor.csv"
    dataio.write_csv(dataio.make_synthetic("xor", 80, 0.15, seed=3), csv_path)
    code = cli.main(["sweep", str(csv_path), "--show-config"])
    out = capsys.readouterr().out
    ok = (
        code == 0
        and "alpha=1e-05" in out
        and "max_iter=400" in out
        and "samples=1000" in out
        and "hidden_range=[1,20)" in out
    )
    verdict("9 default configuration", ok, out.strip())
