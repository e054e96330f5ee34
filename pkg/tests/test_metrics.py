import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import points_for, spec_of
from finsler_connections import (
    FAMILIES,
    ConfigError,
    DomainError,
    MetricSpec,
    RegularityError,
    TangentPoint,
    cartan_tensor,
    check_regularity,
    energy,
    finsler_value,
    fundamental_tensor,
    fd_partial,
    sample_points,
)

RIEMANNIAN = ("euclidean", "poincare_half_plane", "riemannian_diagonal")


def test_norm_values():
    assert finsler_value(spec_of("euclidean"), TangentPoint((0, 0), (3, 4))) == pytest.approx(5.0)
    assert finsler_value(spec_of("poincare_half_plane"), TangentPoint((0, 1), (1, 0))) == pytest.approx(1.0)
    randers = spec_of("randers", b=(0.5, 0.0), b_slope=[[0, 0], [0, 0]])
    assert finsler_value(randers, TangentPoint((0, 0), (1, 0))) == pytest.approx(1.5)


def test_energy_values():
    assert energy(spec_of("euclidean"), TangentPoint((0, 0), (3, 4))) == pytest.approx(12.5)
    assert energy(spec_of("quartic_minkowski"), TangentPoint((0, 0), (1, 1))) == pytest.approx(np.sqrt(2) / 2)


def test_fundamental_tensor_examples():
    np.testing.assert_allclose(fundamental_tensor(spec_of("euclidean", 3), TangentPoint((0, 0, 0), (1, 2, 3))).g, np.eye(3), atol=1e-14)
    poincare = spec_of("poincare_half_plane")
    np.testing.assert_allclose(fundamental_tensor(poincare, TangentPoint((0, 1), (1, 2))).g, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(fundamental_tensor(poincare, TangentPoint((0, 2), (1, 2))).g, np.eye(2) / 4, atol=1e-14)


def test_randers_g_against_oracle(oracle_values):
    case = oracle_values["finsler"]["randers_constant"]
    spec = MetricSpec.from_dict(case["metric"])
    g = fundamental_tensor(spec, TangentPoint(case["x"], case["y"])).g
    np.testing.assert_allclose(g, case["g"], atol=1e-12)
    np.testing.assert_allclose(g, [[1.25, 0.5], [0.5, 1.0]], atol=1e-12)


def test_quartic_cartan_against_oracle(oracle_values):
    case = oracle_values["finsler"]["quartic"]
    u = TangentPoint(case["x"], case["y"])
    spec = spec_of("quartic_minkowski")
    C = cartan_tensor(spec, u).C
    np.testing.assert_allclose(C, case["C"], atol=1e-12)
    assert np.abs(C).max() > 1e-3
    # finite differences of g in y
    h = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        dg = (fundamental_tensor(spec, TangentPoint(u.xa, u.ya + e)).g - fundamental_tensor(spec, TangentPoint(u.xa, u.ya - e)).g) / (2 * h)
        np.testing.assert_allclose(0.5 * dg, C[:, :, k], atol=1e-8)


@pytest.mark.parametrize("family", RIEMANNIAN)
def test_riemannian_cartan_zero(family):
    for n in (2, 3):
        spec = spec_of(family, n)
        for u in points_for(spec, 4):
            assert np.abs(cartan_tensor(spec, u).C).max() < 1e-12


@pytest.mark.parametrize("family", ("randers", "quartic_minkowski"))
def test_non_riemannian_witness(family):
    spec = spec_of(family)
    for u in points_for(spec, 5):
        assert np.abs(cartan_tensor(spec, u).C).max() > 1e-3


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("n", (2, 3, 4))
def test_first_layer_invariants(family, n):
    spec = spec_of(family, n)
    pts = sample_points(spec, 20, seed=3)
    assert len(pts) == 20
    for u in pts:
        ft = fundamental_tensor(spec, u)
        g = ft.g
        np.testing.assert_allclose(g, g.T, atol=1e-12)
        assert np.linalg.eigvalsh(g)[0] > 0
        np.testing.assert_allclose(g @ ft.g_inv, np.eye(n), atol=1e-10)
        L = finsler_value(spec, u)
        assert abs(u.ya @ g @ u.ya - L * L) / (L * L) < 1e-10
        C = cartan_tensor(spec, u).C
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            assert np.abs(C - C.transpose(perm)).max() < 1e-10
        assert np.abs(np.einsum("ijk,k->ij", C, u.ya)).max() < 1e-10
        assert check_regularity(spec, u).passed


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(0.1, 5.0), st.integers(0, 1000))
def test_energy_homogeneity(family, lam, seed):
    spec = spec_of(family)
    u = sample_points(spec, 1, seed=seed)[0]
    assert energy(spec, u.scaled(lam)) == pytest.approx(lam**2 * energy(spec, u), rel=1e-10)
    assert energy(spec, u.scaled(2.0)) == pytest.approx(4 * energy(spec, u), rel=1e-10)


def test_quartic_axis_degenerate():
    spec = spec_of("quartic_minkowski")
    u = TangentPoint((0, 0), (1, 0))
    rep = check_regularity(spec, u)
    assert not rep["regularity.positive_definite"].passed
    assert rep["regularity.homogeneity"].passed
    with pytest.raises(RegularityError):
        fundamental_tensor(spec, u)


def test_euclidean_regular_everywhere():
    spec = spec_of("euclidean", 3)
    for u in points_for(spec, 5):
        assert check_regularity(spec, u).passed


def test_randers_convexity_guard():
    with pytest.raises(ConfigError):
        spec_of("randers", b=(1.2, 0.0))
    with pytest.raises(ConfigError):
        spec_of("randers", a=[[1, 0], [0, -1]])


def test_bad_specs():
    with pytest.raises(ConfigError):
        MetricSpec.create("hyperbolic", 2)
    with pytest.raises(ConfigError):
        MetricSpec.create("euclidean", 1)
    with pytest.raises(ConfigError):
        MetricSpec.create("euclidean", 2.5)


def test_poincare_domain():
    spec = spec_of("poincare_half_plane")
    with pytest.raises(DomainError):
        finsler_value(spec, TangentPoint((0, -1), (1, 0)))
    assert not check_regularity(spec, TangentPoint((0, -1), (1, 0))).passed


def test_zero_section_rejected():
    with pytest.raises(DomainError):
        TangentPoint((0, 0), (0, 0))


def test_spec_roundtrip_and_hash():
    spec = spec_of("randers")
    again = MetricSpec.from_dict(spec.to_dict())
    assert again == spec and hash(again) == hash(spec)
    assert spec_of("euclidean").riemannian and not spec.riemannian


def test_sampling_is_seeded():
    spec = spec_of("randers", 3)
    a = sample_points(spec, 5, seed=7)
    b = sample_points(spec, 5, seed=7)
    assert all(np.array_equal(p.coords, q.coords) for p, q in zip(a, b))


def test_g_matches_fd_of_energy():
    spec = spec_of("randers")
    u = TangentPoint((0.2, -0.1), (0.6, 0.9))
    g = fundamental_tensor(spec, u).g
    fd = [[fd_partial(spec.energy_function, u, tuple(np.eye(4, dtype=int)[2 + i] + np.eye(4, dtype=int)[2 + j])) for j in range(2)] for i in range(2)]
    np.testing.assert_allclose(g, fd, atol=1e-5)


@pytest.mark.parametrize("family", FAMILIES)
def test_metric_scalars_match_fd_oracle(family):
    from finsler_connections import jet_fd_discrepancy, pipeline_fd_discrepancy

    spec = spec_of(family)
    for u in sample_points(spec, 20, seed=0):
        assert jet_fd_discrepancy(spec.finsler_function, u) < 1e-6
        assert jet_fd_discrepancy(spec.energy_function, u) < 1e-6
        assert pipeline_fd_discrepancy(spec, u)["g"] < 1e-6


# plain nested stencils at the default steps are truncation/round-off limited
FD_BOUNDS = {1: 1e-6, 2: 2e-5, 3: 3e-4, 4: 1e-2}


@pytest.mark.parametrize("family", FAMILIES)
def test_plain_fd_partial_by_order(family):
    from finsler_connections import evaluate_jet
    from finsler_connections.jets import _tables

    spec = spec_of(family)
    for u in sample_points(spec, 5, seed=0):
        J = evaluate_jet(spec.energy_function, u, 4)
        for alpha in _tables(4).exponents[1:]:
            k = int(sum(alpha))
            exact = J.partial(alpha)
            assert abs(exact - fd_partial(spec.energy_function, u, alpha)) / max(1.0, abs(exact)) < FD_BOUNDS[k]
