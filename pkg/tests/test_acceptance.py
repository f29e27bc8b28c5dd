"""Acceptance suite: one PASS/FAIL line per criterion (run with ``-s`` to see them)."""

import math
import time

import pytest

from eprb_hv.analysis import (
    CHSH_LOCAL_BOUND,
    TSIRELSON_BOUND,
    bell1964_check,
    chsh_scan,
    locality_audit,
    no_signaling_check,
    optimal_planar_settings,
    random_settings,
    ring_consistency_check,
)
from eprb_hv.cli import main
from eprb_hv.experiment import ExperimentConfig, estimate_correlation, quadrature_expectation
from eprb_hv.geometry import X_AXIS, Z_AXIS, planar_axis
from eprb_hv.models import ModelKind

pytestmark = pytest.mark.slow

GRID_DEG = [0, 30, 45, 60, 90, 120, 180]
MC_TRIALS = 10**6
HV_MODELS = [ModelKind.BELL_NAIVE, ModelKind.MATZKIN_CONDITIONED]


def verdict(criterion, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    assert ok, detail


def test_criterion_1_conditioned_model_reproduces_quantum_curve():
    lines, ok = [], True
    for k, deg in enumerate(GRID_DEG):
        theta = math.radians(deg)
        cfg = ExperimentConfig(ModelKind.MATZKIN_CONDITIONED, Z_AXIS, planar_axis(theta), MC_TRIALS, 100 + k)
        t0 = time.perf_counter()
        est = estimate_correlation(cfg)
        elapsed = time.perf_counter() - t0
        target = -math.cos(theta) / 4
        good = abs(est.mean - target) <= 4 * est.std_error + 1e-12 and elapsed <= 10.0
        ok &= good
        lines.append(f"{deg}deg E={est.mean:+.5f} target={target:+.5f} se={est.std_error:.1e} t={elapsed:.2f}s")
    verdict(1, ok, "; ".join(lines))


def test_criterion_2_sign_rule_model_linear_curve():
    lines, ok = [], True
    for k, deg in enumerate(GRID_DEG):
        theta = math.radians(deg)
        a, b = Z_AXIS, planar_axis(theta)
        target = -0.25 + theta / (2 * math.pi)
        est = estimate_correlation(ExperimentConfig(ModelKind.BELL_NAIVE, a, b, MC_TRIALS, 200 + k))
        quad = quadrature_expectation(ModelKind.BELL_NAIVE, a, b, 256 * 256)
        good = abs(est.mean - target) <= 4 * est.std_error + 1e-12 and abs(quad.value - target) <= 1e-3
        ok &= good
        lines.append(f"{deg}deg MC={est.mean:+.5f} quad={quad.value:+.6f} target={target:+.5f}")
    verdict(2, ok, "; ".join(lines))


def test_criterion_3_chsh_separation():
    settings = optimal_planar_settings()
    naive, matz, qm = (
        chsh_scan(m, *settings, trials=MC_TRIALS, seed=300 + k)
        for k, m in enumerate([ModelKind.BELL_NAIVE, ModelKind.MATZKIN_CONDITIONED, ModelKind.QUANTUM_REFERENCE])
    )
    combined = math.hypot(matz.s_std_error, qm.s_std_error)
    ok = (
        abs(naive.s_value) <= CHSH_LOCAL_BOUND + 3 * naive.s_std_error
        and abs(matz.s_value) >= 0.68
        and abs(qm.s_value) >= 0.68
        and abs(matz.s_value - qm.s_value) <= 4 * combined
    )
    verdict(
        3,
        ok,
        f"|S| naive={abs(naive.s_value):.4f} matzkin={abs(matz.s_value):.4f} qm={abs(qm.s_value):.4f} "
        f"(local {CHSH_LOCAL_BOUND}, Tsirelson {TSIRELSON_BOUND:.4f})",
    )


def test_criterion_4_bell_1964_boundary():
    a, b, c = (planar_axis(math.radians(d)) for d in (0, 60, 120))
    qm = bell1964_check(ModelKind.QUANTUM_REFERENCE, a, b, c, MC_TRIALS, seed=400)
    naive = bell1964_check(ModelKind.BELL_NAIVE, a, b, c, MC_TRIALS, seed=401)
    qm_se = math.hypot(qm.lhs_std_error, qm.rhs_std_error)
    nv_se = math.hypot(naive.lhs_std_error, naive.rhs_std_error)
    ok = (
        qm.violated
        and abs(qm.lhs - 0.25) <= 4 * qm.lhs_std_error
        and abs(qm.rhs - 0.125) <= 4 * qm.rhs_std_error
        and not naive.violated
        and abs(naive.lhs - 1 / 6) <= 4 * naive.lhs_std_error
        and abs(naive.rhs - 1 / 6) <= 4 * naive.rhs_std_error
        and abs(naive.lhs - naive.rhs) <= 4 * nv_se
    )
    verdict(
        4,
        ok,
        f"qm lhs={qm.lhs:.4f} rhs={qm.rhs:.4f} (se {qm_se:.1e}); "
        f"naive lhs={naive.lhs:.4f} rhs={naive.rhs:.4f} (se {nv_se:.1e})",
    )


def test_criterion_5_locality_audit():
    b = planar_axis(math.radians(60))
    naive = locality_audit(ModelKind.BELL_NAIVE, Z_AXIS, b, [Z_AXIS, X_AXIS], 10**5, seed=500)
    matz = locality_audit(ModelKind.MATZKIN_CONDITIONED, Z_AXIS, b, [Z_AXIS, X_AXIS], 10**5, seed=501)
    expected_gap = abs(0.25 - math.sin(math.radians(15)) ** 2)
    gap_se = math.hypot(*(c.std_error for c in matz.conditionals))
    ok = (
        not naive.depends_on_remote
        and matz.depends_on_remote
        and matz.max_z_score >= 5.0
        and abs(matz.max_divergence - expected_gap) <= 4 * gap_se
    )
    verdict(
        5,
        ok,
        f"naive remote={naive.depends_on_remote}; matzkin remote={matz.depends_on_remote} "
        f"gap={matz.max_divergence:.4f} (expected {expected_gap:.4f}) z={matz.max_z_score:.1f}",
    )


def test_criterion_6_no_signaling():
    b = planar_axis(math.radians(60))
    settings = random_settings(5, seed=600)
    lines, ok = [], True
    for k, model in enumerate(HV_MODELS):
        rep = no_signaling_check(model, b, settings, MC_TRIALS, seed=610 + k)
        worst = max(abs(m.p_up - 0.5) / m.std_error for m in rep.marginals)
        ok &= rep.consistent and worst <= 3.0
        lines.append(f"{model.value} max |p-1/2|/se={worst:.2f}")
    verdict(6, ok, "; ".join(lines))


def test_criterion_7_ring_consistency():
    lines, ok = [], True
    for k, deg in enumerate([0, 90, 180, 60]):
        meas = planar_axis(math.radians(deg))
        rep = ring_consistency_check(Z_AXIS, 1, meas, MC_TRIALS, seed=700 + k)
        if deg == 60:
            oracle = abs(math.acos(-1 / 3) / math.pi - 0.75)
            good = abs(rep.gap - oracle) <= 0.005 and abs(rep.closed_form_p_up - math.acos(-1 / 3) / math.pi) <= 1e-12
        else:
            good = rep.gap <= 3 * rep.std_error + 1e-12  # floor for cos^2 rounding at 180 deg
        ok &= good
        lines.append(f"{deg}deg gap={rep.gap:.4f} se={rep.std_error:.1e}")
    verdict(7, ok, "; ".join(lines))


COMMANDS = [
    ["correlate", "--model", "matzkin", "--angle-deg", "60"],
    ["correlate", "--model", "bell-naive", "--angle-deg", "45", "--quadrature-nodes", "4096"],
    ["sweep", "--model", "qm", "--theta-steps", "5"],
    ["chsh", "--model", "matzkin", "--optimal-planar"],
    ["audit", "--check", "locality", "--model", "matzkin"],
    ["audit", "--check", "no-signaling", "--model", "bell-naive", "--random-settings", "3"],
    ["audit", "--check", "ring"],
]


def test_criterion_8_determinism(tmp_path):
    lines, ok = [], True
    for k, argv in enumerate(COMMANDS):
        payloads = []
        for run, threads in enumerate(("1", "1", "8", "8")):
            out = tmp_path / f"{k}_{run}.json"
            main([*argv, "--trials", "200000", "--seed", "8", "--threads", threads, "--out", str(out)])
            raw = out.read_bytes()
            payloads.append(raw[raw.rindex(b'\n  "result":'):])
        same = len(set(payloads)) == 1
        ok &= same
        lines.append(f"{argv[0]}:{'identical' if same else 'DIFFERENT'}")
    verdict(8, ok, ", ".join(lines))
