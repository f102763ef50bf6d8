import numpy as np
import pytest

from platemem import (AnnulusGeometry, PhysicalParams, StateVector,
                      assemble_mode_pencil, build_radial_grid, dissipation, energy,
                      graph_norm, make_initial_data, matrix_exponential,
                      matrix_exponential_reference, membrane_subpencil,
                      pencil_dissipation, simulate, step_crank_nicolson)
from platemem.pencil import ModePencil

from oracles import expm_series_squaring

GEO = AnnulusGeometry()


def make_pencil(p=PhysicalParams(m_damp=1.0, rho_damp=1.0), n=12, mode=0):
    return assemble_mode_pencil(p, build_radial_grid(GEO, n, n, mode))


def fake_pencil(A, M=None, G=None):
    n = A.shape[0]
    grid = build_radial_grid(GEO, 8, 8, 0)
    p = PhysicalParams()
    eye = np.eye(n)
    return ModePencil(mode=0, M=eye if M is None else M, A=A,
                      G=eye if G is None else G, dof_layout=(("v", 0, n),),
                      grid=grid, params=p, energy_parts={}, dissipation_parts={},
                      closures=None)


def test_zero_state_stays_zero():
    pencil = make_pencil()
    out = step_crank_nicolson(pencil, StateVector(0, np.zeros(pencil.dim)), 1e-2)
    assert np.all(out.coefficients == 0.0)


def test_zero_generator_is_identity_propagator():
    pencil = fake_pencil(np.zeros((6, 6)))
    w = np.arange(6.0)
    out = step_crank_nicolson(pencil, StateVector(0, w), 0.3)
    np.testing.assert_allclose(out.coefficients, w, rtol=0, atol=0)


def test_dimension_mismatch_rejected():
    pencil = make_pencil()
    with pytest.raises(ValueError, match="dimension"):
        step_crank_nicolson(pencil, StateVector(0, np.zeros(3)), 1e-2)
    with pytest.raises(ValueError, match="dt"):
        step_crank_nicolson(pencil, StateVector(0, np.zeros(pencil.dim)), -0.1)


def test_energy_zero_state():
    pencil = make_pencil()
    rep = energy(pencil, StateVector(0, np.zeros(pencil.dim)))
    assert rep.total == 0.0
    assert all(v == 0.0 for v in rep.breakdown.values())


def test_energy_theta_only_state():
    pencil = make_pencil()
    w = np.zeros(pencil.dim, dtype=complex)
    th = pencil.block("theta")
    w[th] = 1.0 + 0.5j
    rep = energy(pencil, StateVector(0, w))
    expect = 0.5 * pencil.params.rho0 * float(
        pencil.grid.plate_weights.sum()) * (1.0**2 + 0.5**2)
    assert rep.total == pytest.approx(expect, rel=1e-13)
    assert rep.breakdown["E_thermal"] == pytest.approx(expect, rel=1e-13)
    for k, v in rep.breakdown.items():
        if k != "E_thermal":
            assert v == 0.0


def test_energy_components_sum_and_gamma_zero_has_no_rotational_term():
    pencil = make_pencil(PhysicalParams(gamma=0.0, m_damp=1.0))
    rng = np.random.default_rng(0)
    w = rng.standard_normal(pencil.dim) + 1j * rng.standard_normal(pencil.dim)
    rep = energy(pencil, StateVector(0, w))
    assert rep.breakdown["E_rot"] == 0.0
    assert sum(rep.breakdown.values()) == pytest.approx(rep.total, rel=1e-12)


def test_dissipation_channels_zero_cases():
    pencil = make_pencil(PhysicalParams(rho_damp=0.0, m_damp=0.0, mu=1.0))
    rng = np.random.default_rng(1)
    w = rng.standard_normal(pencil.dim)
    ch = dissipation(pencil, StateVector(0, w))
    assert ch.structural == 0.0 and ch.membrane == 0.0
    zero = dissipation(pencil, StateVector(0, np.zeros(pencil.dim)))
    assert zero.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_dissipation_linear_theta_profile_heats_bulk_and_boundary():
    pencil = make_pencil(n=64)
    w = np.zeros(pencil.dim)
    th = pencil.block("theta")
    w[th] = pencil.grid.plate_nodes - pencil.grid.r_interface  # vanishes at interface
    ch = dissipation(pencil, StateVector(0, w))
    assert ch.thermal_bulk > 0.0
    assert ch.thermal_boundary > 0.0
    # direct quadrature of beta0 |grad theta|^2 = beta0 * 2 pi (r_out^2-r_in^2)/2
    # and beta0 kappa 2 pi r_out theta(r_out)^2 for theta = r - r_in
    p, g = pencil.params, pencil.grid
    bulk = p.beta0 * np.pi * (g.r_outer**2 - g.r_interface**2)
    bdry = p.beta0 * p.kappa * 2.0 * np.pi * g.r_outer * (g.r_outer - g.r_interface)**2
    assert ch.thermal_bulk == pytest.approx(bulk, rel=5e-2)
    assert ch.thermal_boundary == pytest.approx(bdry, rel=5e-2)


def test_dissipation_channels_match_pencil_form_exactly():
    for p in (PhysicalParams(m_damp=1.0, rho_damp=1.0, gamma=1.0),
              PhysicalParams(rho_damp=1.0), PhysicalParams()):
        pencil = make_pencil(p, n=10, mode=2)
        rng = np.random.default_rng(5)
        w = rng.standard_normal(pencil.dim) + 1j * rng.standard_normal(pencil.dim)
        st = StateVector(2, w)
        channels = dissipation(pencil, st)
        scale = max(abs(pencil_dissipation(pencil, st)), 1.0)
        assert abs(pencil_dissipation(pencil, st) - channels.total) <= 1e-10 * scale


def test_dissipation_evaluations_agree_along_refined_trajectories():
    # the pencil-consistent form and the physical four channels agree to
    # round-off here, so the mismatch stays at zero under (h, dt) refinement
    p = PhysicalParams(m_damp=1.0, rho_damp=1.0)
    for n, dt in ((8, 2e-2), (16, 1e-2)):
        pencil = make_pencil(p, n=n)
        st = make_initial_data(pencil, "plate_bump")
        worst = 0.0
        for _ in range(40):
            nxt = step_crank_nicolson(pencil, st, dt)
            mid = StateVector(0, 0.5 * (st.coefficients + nxt.coefficients))
            mismatch = abs(pencil_dissipation(pencil, mid) - dissipation(pencil, mid).total)
            worst = max(worst, mismatch)
            st = nxt
        assert worst <= 1e-10 * energy(pencil, st).total / dt + 1e-13


def test_simulate_residual_identity_and_monotonicity():
    pencil = make_pencil(PhysicalParams(m_damp=1.0, rho_damp=1.0), n=16)
    state = make_initial_data(pencil, "plate_bump")
    trace = simulate(pencil, state, 1e-2, 20.0)
    e0 = trace.energy[0]
    assert np.abs(trace.residuals).max() <= 1e-10 * e0 / 1e-2
    assert np.all(np.diff(trace.energy) <= 1e-10 * e0)
    assert trace.energy[-1] < trace.energy[0]


def test_membrane_only_undamped_conserves_energy():
    grid = build_radial_grid(GEO, 8, 24, 0)
    sub = membrane_subpencil(PhysicalParams(m_damp=0.0), grid)
    rng = np.random.default_rng(2)
    st = StateVector(0, rng.standard_normal(sub.dim).astype(complex))
    trace = simulate(sub, st, 1e-3, 1.0)  # one thousand steps
    e0 = trace.energy[0]
    assert np.abs(trace.energy - e0).max() <= 1e-10 * e0


def test_decoupled_conservative_limit_energy_constant():
    # rho = m = mu = 0 with the temperature dropped: pure plate + membrane
    import scipy.linalg as sla
    pencil = make_pencil(PhysicalParams(mu=0.0), n=16)
    keep = np.r_[np.arange(*pencil.block("u").indices(pencil.dim)),
                 np.arange(*pencil.block("u_t").indices(pencil.dim)),
                 np.arange(*pencil.block("v").indices(pencil.dim)),
                 np.arange(*pencil.block("v_t").indices(pencil.dim))]
    A = pencil.A[np.ix_(keep, keep)]
    M = pencil.M[np.ix_(keep, keep)]
    G = pencil.G[np.ix_(keep, keep)]
    dt = 1e-2
    lu = sla.lu_factor(M - 0.5 * dt * A)
    Mp = M + 0.5 * dt * A
    rng = np.random.default_rng(6)
    w = rng.standard_normal(len(keep))
    e0 = w @ (G @ w)
    for _ in range(500):
        w = sla.lu_solve(lu, Mp @ w)
    assert abs(w @ (G @ w) - e0) <= 1e-10 * e0


def test_simulate_linearity_in_energy():
    pencil = make_pencil(n=10)
    state = make_initial_data(pencil, "membrane_bump")
    tr1 = simulate(pencil, state, 1e-2, 0.5)
    scaled = StateVector(0, 3.0 * state.coefficients)
    tr3 = simulate(pencil, scaled, 1e-2, 0.5)
    np.testing.assert_allclose(tr3.energy, 9.0 * tr1.energy, rtol=1e-12)


def test_crank_nicolson_vs_matrix_exponential_second_order():
    pencil = make_pencil(n=8)  # dimension 40
    rng = np.random.default_rng(4)
    w0 = rng.standard_normal(pencil.dim)
    P = matrix_exponential_reference(pencil, 1.0)
    ref = P @ w0

    def err(dt):
        st = StateVector(0, w0.astype(complex))
        for _ in range(int(round(1.0 / dt))):
            st = step_crank_nicolson(pencil, st, dt)
        d = st.coefficients - ref
        return float(np.sqrt(np.real(np.conj(d) @ (pencil.G @ d))))

    e1, e2 = err(4e-3), err(2e-3)
    assert 1.8 <= np.log2(e1 / e2) <= 2.2


def test_matrix_exponential_identity_at_t_zero():
    pencil = make_pencil(n=8)
    np.testing.assert_array_equal(matrix_exponential_reference(pencil, 0.0),
                                  np.eye(pencil.dim))


def test_matrix_exponential_nilpotent():
    N = np.zeros((4, 4))
    N[0, 1] = 2.0
    N[2, 3] = -1.0
    out = matrix_exponential(N)
    np.testing.assert_allclose(out, np.eye(4) + N, rtol=0, atol=1e-15)


def test_matrix_exponential_vs_series_oracle():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 6))
    X = X - 3.0 * np.eye(6)  # stable
    ref = expm_series_squaring(X)
    out = matrix_exponential(X)
    assert np.abs(out - ref).max() <= 1e-12 * np.abs(ref).max()


def test_matrix_exponential_dimension_cap():
    pencil = make_pencil(n=81)  # dimension 405
    with pytest.raises(ValueError, match="cap"):
        matrix_exponential_reference(pencil, 1.0)


def test_initial_data_unit_energy_and_support():
    pencil = make_pencil(n=16)
    for profile in ("plate_bump", "membrane_bump", "thermal_pulse", "rough"):
        st = make_initial_data(pencil, profile, seed=1)
        assert energy(pencil, st).total == pytest.approx(0.5, rel=1e-12)
    st = make_initial_data(pencil, "plate_bump")
    assert np.all(st.coefficients[pencil.block("v")] == 0.0)
    assert np.all(st.coefficients[pencil.block("theta")] == 0.0)


def test_initial_data_rough_deterministic():
    pencil = make_pencil(n=10)
    a = make_initial_data(pencil, "rough", seed=7)
    b = make_initial_data(pencil, "rough", seed=7)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)
    c = make_initial_data(pencil, "rough", seed=8)
    assert np.any(c.coefficients != a.coefficients)


def test_initial_data_unknown_profile():
    pencil = make_pencil(n=8)
    with pytest.raises(ValueError, match="profile"):
        make_initial_data(pencil, "gaussian")


def test_graph_norm_positive():
    pencil = make_pencil(n=10)
    st = make_initial_data(pencil, "plate_bump")
    assert graph_norm(pencil, st) > 0.0
