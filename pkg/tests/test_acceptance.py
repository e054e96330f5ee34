"""Acceptance gate: every criterion at its stated tolerance.

All five families in dimensions 2, 3, 4 with 20 seeded points each.  Each test
prints one PASS/FAIL line; the lines are repeated in the terminal summary.
"""

from collections import defaultdict

import numpy as np
import pytest

from oracles import christoffel_function

from finsler_connections import (
    FAMILIES,
    MetricSpec,
    berwald_cartan_bridge,
    check_barthel,
    check_berwald,
    check_cartan,
    check_curvature_identities,
    classify,
    jet_fd_discrepancy,
    local_geometry,
    metricity_defects,
    pipeline_fd_discrepancy,
    sample_points,
)
from finsler_connections.report import default_config, run_check

DIMENSIONS = (2, 3, 4)
POINTS = 20
FD_POINTS = 10
RIEMANNIAN = ("euclidean", "poincare_half_plane", "riemannian_diagonal")
CHECKERS = {
    "barthel": check_barthel,
    "cartan": check_cartan,
    "berwald": check_berwald,
    "bridge": berwald_cartan_bridge,
    "metricity": metricity_defects,
    "curvature": check_curvature_identities,
}


@pytest.fixture(scope="module")
def sweep():
    """Max residual per entry name over every family, dimension and point."""
    worst = defaultdict(float)
    extra = defaultdict(float)
    samples = {}
    for family in FAMILIES:
        for n in DIMENSIONS:
            spec = MetricSpec.create(family, n)
            pts = sample_points(spec, POINTS, seed=0)
            assert len(pts) == POINTS
            samples[spec] = pts
            for u in pts:
                for check in CHECKERS.values():
                    for e in check(spec, u).entries:
                        worst[e.name] = max(worst[e.name], e.residual)
                geo = local_geometry(spec, u)
                cons = geo.dE.value[:n] - geo.N.value.T @ geo.dE.value[n:]
                extra["conservativity_abs"] = max(extra["conservativity_abs"], np.abs(cons).max())
                if family in RIEMANNIAN:
                    gam = christoffel_function(spec)(u.xa)
                    ref = 0.5 * np.einsum("ijk,j,k->i", gam, u.ya, u.ya)
                    rel = np.abs(geo.G.value - ref).max() / max(1.0, np.abs(ref).max())
                    extra["christoffel_spray"] = max(extra["christoffel_spray"], rel)
    return worst, extra, samples


def _gate(log, number, title, pairs):
    """pairs: (residual, tolerance); reports the worst ratio."""
    ratio, res, tol = max((r / t, r, t) for r, t in pairs)
    ok = all(r < t for r, t in pairs)
    log(number, title, res, tol, ok)
    assert ok, f"criterion {number}: residual {res:.3e} >= {tol:.0e}"


def test_criterion_01_cartan_axioms(sweep, acceptance_log):
    w, _, _ = sweep
    names = ("cartan.metric_horizontal", "cartan.metric_vertical", "cartan.Q", "cartan.T_symmetry", "cartan.T_eta")
    _gate(acceptance_log, 1, "Cartan axioms", [(w[k], 1e-8) for k in names])


def test_criterion_02_uniqueness_witness(sweep, acceptance_log):
    w, _, _ = sweep
    _gate(acceptance_log, 2, "Koszul uniqueness witness", [(w["cartan.koszul"], 1e-8)])


def test_criterion_03_barthel_coincidence(sweep, acceptance_log):
    w, x, _ = sweep
    pairs = [
        (w["barthel.cartan_deflection"], 1e-8),
        (x["conservativity_abs"], 1e-8),
        (w["barthel.homogeneity"], 1e-8),
        (w["barthel.weak_torsion"], 1e-8),
        (w["barthel.gamma_expressions"], 1e-9),
    ]
    _gate(acceptance_log, 3, "Barthel coincidence", pairs)


def test_criterion_04_spray_coincidence(sweep, acceptance_log):
    w, x, _ = sweep
    pairs = [(w["barthel.spray_coincidence"], 1e-8), (x["christoffel_spray"], 1e-8)]
    _gate(acceptance_log, 4, "spray coincidence and Christoffel oracle", pairs)


def test_criterion_05_berwald_axioms(sweep, acceptance_log):
    w, _, _ = sweep
    pairs = [
        (w["berwald.torsion"], 1e-9),
        (w["bridge.frame_bracket"], 1e-7),
        (w["berwald.frame_bracket"], 1e-7),
        (w["berwald.horizontal_L"], 1e-9),
    ]
    _gate(acceptance_log, 5, "Berwald axioms", pairs)


def test_criterion_06_bridge(sweep, acceptance_log):
    w, _, _ = sweep
    pairs = [(w["bridge.horizontal"], 1e-7), (w["bridge.vertical"], 1e-10)]
    _gate(acceptance_log, 6, "Berwald-Cartan bridge", pairs)


def test_criterion_07_curvature_identities(sweep, acceptance_log):
    w, _, _ = sweep
    pairs = [
        (w["curvature.antisymmetry_R"], 1e-7),
        (w["curvature.antisymmetry_P"], 1e-7),
        (w["curvature.antisymmetry_S"], 1e-7),
        (w["curvature.Shat"], 1e-8),
        (w["curvature.Phat_symmetry"], 1e-8),
        (w["curvature.Phat_eta"], 1e-8),
        (w["curvature.S_composition"], 1e-7),
        (w["curvature.bianchi"], 1e-6),
        (w["curvature.Rhat_bracket"], 1e-7),
        (w["curvature.Phat_contraction"], 1e-7),
        (w["curvature.Phat_bridge"], 1e-7),
        (w["curvature.Phat_three_way"], 1e-7),
    ]
    _gate(acceptance_log, 7, "torsion and curvature identities", pairs)


def test_criterion_08_metricity_and_classification(sweep, acceptance_log):
    w, _, samples = sweep
    names = ("metricity.vertical", "metricity.horizontal", "metricity.spray", "metricity.L")
    pairs = [(w[k], 1e-8) for k in names]
    expected = {
        "euclidean": (True, True),
        "poincare_half_plane": (True, True),
        "riemannian_diagonal": (True, True),
        "quartic_minkowski": (False, True),
        "randers": (False, False),
    }
    wrong = 0
    for spec, pts in samples.items():
        v = classify(spec, pts)
        if (v["riemannian"], v["landsberg"]) != expected[spec.family]:
            wrong += 1
    pairs.append((float(wrong), 0.5))
    _gate(acceptance_log, 8, "metricity defects and classification", pairs)


def test_criterion_09_ad_soundness(acceptance_log):
    worst = 0.0
    for family in FAMILIES:
        for n in DIMENSIONS:
            spec = MetricSpec.create(family, n)
            for u in sample_points(spec, FD_POINTS, seed=1):
                worst = max(worst, jet_fd_discrepancy(spec.finsler_function, u))
                worst = max(worst, jet_fd_discrepancy(spec.energy_function, u))
                worst = max(worst, max(pipeline_fd_discrepancy(spec, u).values()))
    _gate(acceptance_log, 9, "jets against central differences", [(worst, 1e-6)])


def test_criterion_10_determinism(acceptance_log):
    first = run_check(default_config())
    second = run_check(default_config())
    ok = first.status == 0 and second.status == 0 and first.text == second.text
    acceptance_log(10, "default run exits 0 twice, byte-identical", 0.0 if ok else 1.0, 0.5, ok)
    assert first.status == 0 and second.status == 0
    assert first.text.encode() == second.text.encode()
