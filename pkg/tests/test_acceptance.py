"""The ten acceptance criteria, each reported as one PASS/FAIL line.

Studies run end to end through the command line with their default
parameters, so the numbers checked here are the ones a user gets from
``ccnls <subcommand>``. Criterion 10 re-runs every study from its emitted
manifest and compares the output trees byte for byte.
"""

import contextlib
import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from ccnls.cli import main
from ccnls.fields import Field, Grid
from ccnls.multipliers import dyadic_scales, project_dyadic, project_low, psi_N, sharp_truncate
from ccnls.report import tree_hash


class Runs:
    """Each (subcommand, overrides) pair is run once per session through the CLI."""

    def __init__(self, root: Path):
        self.root = root
        self.done: dict[tuple, tuple[Path, float, int]] = {}

    def get(self, sub: str, **sets):
        key = (sub, tuple(sorted(sets.items())))
        if key not in self.done:
            argv = [sub, "--out", str(self.root / "first"), "--figures"]
            for k, v in sorted(sets.items()):
                argv += ["--set", f"{k}={json.dumps(v)}"]
            buf = io.StringIO()
            t0 = time.perf_counter()
            with contextlib.redirect_stdout(buf):
                code = main(argv)
            elapsed = time.perf_counter() - t0
            d = Path(buf.getvalue().strip().rsplit("-> ", 1)[-1])
            self.done[key] = (d, elapsed, code)
        d, elapsed, code = self.done[key]
        summary = json.loads((d / "summary.json").read_text())
        return summary, elapsed, code, d


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory.mktemp("acceptance"))


def report(lines, n, ok, detail):
    lines[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(lines[n])
    assert ok, lines[n]


def test_criterion_01_projector_algebra(acceptance_lines):
    t0 = time.perf_counter()
    worst = 0.0
    exact = True
    for d, M in [(1, 4096), (2, 256)]:
        g = Grid(d, 2 * math.pi, M)
        total = sum(psi_N(g.xi_abs, N) for N in dyadic_scales(g))
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
        rng = np.random.default_rng(d)
        f = Field(g, rng.normal(size=(d,) + g.shape) + 1j * rng.normal(size=(d,) + g.shape))
        for K in (3.0, 10.0, 40.0):
            once = sharp_truncate(f, K)
            exact &= np.array_equal(sharp_truncate(once, K).hat, once.hat)
            for N in (2, 8, 32):
                exact &= np.array_equal(sharp_truncate(project_dyadic(f, N), K).hat,
                                        project_dyadic(sharp_truncate(f, K), N).hat)
                exact &= np.array_equal(sharp_truncate(project_low(f, N), K).hat,
                                        project_low(sharp_truncate(f, K), N).hat)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and exact and elapsed < 1.0
    report(acceptance_lines, 1, ok,
           f"partition residual {worst:.1e}, J/P commute and idempotent exactly: {exact}, {elapsed:.2f} s")


def test_criterion_02_conservation(runs, acceptance_lines):
    s1, t1, c1, _ = runs.get("simulate")
    s2, t2, c2, _ = runs.get("simulate", dt=2.0**-13)
    d1 = max(s1["summary"]["max_drift1"], s1["summary"]["max_drift2"])
    r1 = s1["summary"]["max_drift1"] / s2["summary"]["max_drift1"]
    r2 = s1["summary"]["max_drift2"] / s2["summary"]["max_drift2"]
    elapsed = t1 + t2
    ok = (c1 == c2 == 0 and s1["summary"]["status"] == "ok" and d1 <= 1e-8
          and 8 <= r1 <= 24 and 8 <= r2 <= 24 and elapsed < 120)
    report(acceptance_lines, 2, ok,
           f"max drift {d1:.2e}, dt-halving ratios Q1 {r1:.1f} Q2 {r2:.1f}, {elapsed:.0f} s")


def test_criterion_03_energy_identity(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("energy-identity")
    ratios = s["summary"]["ratios"]
    in_band = all(2.5 <= r <= 6 for N in ("2", "4", "8") for r in ratios[N])
    ok = code == 0 and in_band and s["summary"]["control_stalls"] and elapsed < 300
    flat = {N: [round(r, 2) for r in v] for N, v in ratios.items()}
    report(acceptance_lines, 3, ok,
           f"halving ratios {flat}, control stalls {s['summary']['control_stalls']}, {elapsed:.0f} s")


def test_criterion_04_coercivity(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("energy-scan")
    sm = s["summary"]
    ok = (code == 0 and sm["members"] >= 200 and sm["violations"] == 0
          and sm["Ns"] == [2, 4, 8, 16, 32, 64] and elapsed < 60)
    report(acceptance_lines, 4, ok,
           f"{sm['members']} members, C~ {sm['C_tilde_energy']:g}/{sm['C_tilde_difference']:g}, "
           f"{sm['violations']} violations, {elapsed:.0f} s")


def test_criterion_05_dichotomy(runs, acceptance_lines):
    s, elapsed, code, d = runs.get("dichotomy")
    sm = s["summary"]
    manifest = json.loads((d / "manifest.json").read_text())
    ok = (code == 0 and sm["uncovered"] == 0 and sm["max_relative_residual"] <= 1e-12
          and manifest["params"]["fuzz"] >= 10_000 and elapsed < 10)
    report(acceptance_lines, 5, ok,
           f"uncovered {sm['uncovered']}, max residual {sm['max_relative_residual']:.1e}, {elapsed:.1f} s")


def test_criterion_06_bilinear(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("verify-bilinear")
    sm = s["summary"]
    ok = (code == 0 and sm["slope"] is not None and abs(sm["slope"]) <= 0.1
          and sm["scales"] == [2.0**k for k in range(4, 10)] and sm["descriptors"]["N2"] == 2
          and sm["descriptors"]["ensemble"] >= 50 and elapsed < 180)
    report(acceptance_lines, 6, ok, f"slope {sm['slope']:.4f} over N1 = 2^4..2^9, {elapsed:.0f} s")


def test_criterion_07_trilinear(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("verify-trilinear")
    sm = s["summary"]
    sharp = {c: sm[c]["slope"] for c in ("w_low", "v_low")}
    other = {c: sm[c]["slope"] for c in ("u_low", "comparable")}
    grow = sm["a2_multiD_s=0"]["slope"]
    edge = sm["a2_multiD_s=0.5"]["slope"]
    ok = (code == 0 and all(abs(v) <= 0.1 for v in sharp.values())
          and all(v <= 0.1 for v in other.values())
          and abs(grow - 0.5) <= 0.1 and abs(edge) <= 0.1 and elapsed < 300)
    slopes = ", ".join(f"{k} {v:.3f}" for k, v in {**sharp, **other}.items())
    report(acceptance_lines, 7, ok,
           f"slopes {slopes}; resonant s=0 {grow:.3f}, s=1/2 {edge:.3f}, {elapsed:.0f} s")


def test_criterion_08_window_optimality(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("counterexample-a1")
    sm = s["summary"]
    ok = (code == 0 and sm["scales"] == [2.0**k for k in range(4, 11)]
          and abs(sm["slope"] - 0.125) <= 0.03 and abs(sm["phase_slope"] - (-0.25)) <= 0.05
          and not sm["warnings"] and elapsed < 30)
    report(acceptance_lines, 8, ok,
           f"ratio slope {sm['slope']:.4f}, phase slope {sm['phase_slope']:.4f}, {elapsed:.1f} s")


def test_criterion_09_convergence(runs, acceptance_lines):
    s, elapsed, code, _ = runs.get("converge")
    sm = s["summary"]
    errs = sm["errors"]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    ok = (code == 0 and sm["Ks"] == [2.0**k for k in range(3, 8)] and sm["K_ref"] == 256
          and decreasing and sm["slope"] <= -0.3 and elapsed < 600)
    report(acceptance_lines, 9, ok, f"slope {sm['slope']:.3f}, errors decreasing {decreasing}, {elapsed:.0f} s")


ALL_STUDIES = ["classify", "simulate", "picard", "energy-scan", "energy-identity", "converge",
               "continuity", "verify-bilinear", "verify-trilinear", "dichotomy", "counterexample-a1",
               "counterexample-a2"]


def test_criterion_10_determinism(runs, acceptance_lines):
    mismatched = []
    for sub in ALL_STUDIES:
        _, _, _, d = runs.get(sub)
        again = runs.root / "again"
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            main([sub, "--config", str(d / "manifest.json"), "--out", str(again), "--figures"])
        d2 = Path(buf.getvalue().strip().rsplit("-> ", 1)[-1])
        if d2.name != d.name or tree_hash(d2) != tree_hash(d):
            mismatched.append(sub)
    ok = not mismatched
    report(acceptance_lines, 10, ok,
           f"{len(ALL_STUDIES) - len(mismatched)}/{len(ALL_STUDIES)} studies reproduce bit for bit"
           + (f", mismatched: {mismatched}" if mismatched else ""))
