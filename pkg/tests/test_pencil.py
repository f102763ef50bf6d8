import numpy as np
import pytest

from platemem import (AnnulusGeometry, PhysicalParams, assemble_mode_pencil,
                      build_radial_grid, closure_residuals, interface_trace,
                      membrane_subpencil)

from oracles import dense_eigenvalues_oracle

GEO = AnnulusGeometry()

# canonical parameter cells used across the suite
CELLS = {
    "exp_rho": PhysicalParams(m_damp=1.0, rho_damp=1.0),
    "exp_rho_gamma": PhysicalParams(m_damp=1.0, rho_damp=1.0, gamma=1.0),
    "exp_thermal": PhysicalParams(m_damp=1.0),
    "strong_only": PhysicalParams(m_damp=1.0, gamma=1.0),
    "poly": PhysicalParams(rho_damp=1.0),
    "no_rate": PhysicalParams(),
}


def make_pencil(p=CELLS["exp_rho"], n=16, mode=0, geo=GEO):
    return assemble_mode_pencil(p, build_radial_grid(geo, n, n, mode))


def blocks(pencil, M):
    return {name: M[pencil.block(name), :][:, pencil.block(name)]
            for name, _, _ in pencil.dof_layout}


def test_gamma_zero_makes_velocity_mass_identity():
    pencil = make_pencil(PhysicalParams(rho1=1.7, gamma=0.0))
    blk = blocks(pencil, pencil.M)["u_t"]
    np.testing.assert_array_equal(blk, 1.7 * np.eye(blk.shape[0]))


def test_m_zero_makes_velocity_damping_block_zero():
    pencil = make_pencil(PhysicalParams(m_damp=0.0))
    blk = blocks(pencil, pencil.A)["v_t"]
    np.testing.assert_array_equal(blk, np.zeros_like(blk))


def test_tiny_pencil_eigenvalues_match_dense_oracle():
    pencil = make_pencil(n=8)  # dimension 40
    import scipy.linalg as sla
    lam = sla.eig(pencil.A, pencil.M, right=False)
    ref = dense_eigenvalues_oracle(pencil.A, pencil.M)
    scale = np.abs(ref).max()
    assert len(lam) == len(ref)
    # nearest-neighbour pairing (sorting conjugate pairs is order-unstable)
    for z in ref:
        assert np.abs(lam - z).min() <= 1e-10 * scale
    for z in lam:
        assert np.abs(ref - z).min() <= 1e-10 * scale


def test_gram_symmetric_exactly():
    pencil = make_pencil(CELLS["exp_rho_gamma"], n=16, mode=3)
    assert np.abs(pencil.G - pencil.G.T).max() == 0.0


@pytest.mark.parametrize("name", sorted(CELLS))
@pytest.mark.parametrize("mode", [0, 1, 2, 5, 16])
def test_gram_and_mass_positive_definite(name, mode):
    pencil = make_pencil(CELLS[name], n=12, mode=mode)
    np.linalg.cholesky(pencil.G)  # raises if not PD
    w = np.concatenate([pencil.grid.plate_weights] * 3
                       + [pencil.grid.membrane_weights] * 2)
    WM = w[:, None] * pencil.M
    asym = np.abs(WM - WM.T).max()
    assert asym <= 1e-12 * np.abs(WM).max()
    np.linalg.cholesky(0.5 * (WM + WM.T))


def test_energy_parts_sum_to_gram():
    pencil = make_pencil(CELLS["exp_rho_gamma"], n=12, mode=2)
    total = sum(pencil.energy_parts.values())
    assert np.abs(total - pencil.G).max() <= 1e-13 * np.abs(pencil.G).max()


def test_gram_matrix_operation_matches_pencil():
    from platemem import build_radial_grid, gram_matrix
    from platemem.pencil import make_closures
    p = CELLS["exp_rho_gamma"]
    grid = build_radial_grid(GEO, 12, 12, 1)
    G = gram_matrix(p, grid, make_closures(p, grid))
    pencil = assemble_mode_pencil(p, grid)
    np.testing.assert_array_equal(G, pencil.G)
    assert np.abs(G - G.T).max() == 0.0
    np.linalg.cholesky(G)


def test_gram_gamma_zero_velocity_block_is_weighted_identity():
    p = PhysicalParams(rho1=2.5, gamma=0.0)
    pencil = make_pencil(p, n=12)
    blk = blocks(pencil, pencil.G)["u_t"]
    np.testing.assert_array_equal(blk, 2.5 * np.diag(pencil.grid.plate_weights))
    assert np.abs(pencil.energy_parts["E_rot"]).max() == 0.0


def test_closure_residuals_vanish_on_random_states():
    pencil = make_pencil(CELLS["exp_thermal"], n=16, mode=1)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(pencil.dim) + 1j * rng.standard_normal(pencil.dim)
    scale = np.abs(w).max()
    for name, res in closure_residuals(pencil, w).items():
        assert res <= 1e-12 * scale, name


def test_interface_trace_is_shared_value():
    pencil = make_pencil(n=16)
    w = np.zeros(pencil.dim, dtype=complex)
    u = w[pencil.block("u")]
    u[:] = 1.0  # constant plate displacement extrapolates to trace 1
    assert interface_trace(pencil, w) == pytest.approx(1.0)


def test_mode_sign_symmetry_bit_identical():
    for n in (1, 3):
        a = assemble_mode_pencil(CELLS["poly"], build_radial_grid(GEO, 12, 12, n))
        b = assemble_mode_pencil(CELLS["poly"], build_radial_grid(GEO, 12, 12, -n))
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.M, b.M)
        np.testing.assert_array_equal(a.G, b.G)


def test_conservative_limit_skew_without_dissipative_blocks():
    # mu = 0 decouples the temperature; dropping its rows/columns leaves the
    # undamped plate+membrane pair, whose generator must be G-skew to round-off
    p = PhysicalParams(mu=0.0)
    pencil = make_pencil(p, n=16, mode=1)
    keep = np.r_[np.arange(*pencil.block("u").indices(pencil.dim)),
                 np.arange(*pencil.block("u_t").indices(pencil.dim)),
                 np.arange(*pencil.block("v").indices(pencil.dim)),
                 np.arange(*pencil.block("v_t").indices(pencil.dim))]
    A = pencil.A[np.ix_(keep, keep)]
    M = pencil.M[np.ix_(keep, keep)]
    G = pencil.G[np.ix_(keep, keep)]
    H = G @ np.linalg.solve(M, A)
    sym = 0.5 * (H + H.T)
    assert np.abs(sym).max() <= 1e-10 * np.abs(H).max()


def test_full_generator_dissipative_in_energy_metric():
    import scipy.linalg as sla
    for name, p in CELLS.items():
        pencil = make_pencil(p, n=12, mode=1)
        H = pencil.G @ np.linalg.solve(pencil.M, pencil.A)
        top = sla.eigh(0.5 * (H + H.T), pencil.G, eigvals_only=True)[-1]
        assert top <= 1e-9, name


def test_membrane_subpencil_dirichlet_structure():
    grid = build_radial_grid(GEO, 8, 32, 0)
    sub = membrane_subpencil(PhysicalParams(), grid)
    assert sub.dim == 64
    np.linalg.cholesky(sub.G)
    H = sub.G @ np.linalg.solve(sub.M, sub.A)
    assert np.abs(H + H.T).max() <= 1e-10 * np.abs(H).max()


def test_gram_quadrature_converges_on_transmission_state():
    # nonzero shared interface value exercises the u=v coupling inside G;
    # a closure mistake there (pinned or double-counted trace) diverges as 1/h
    sp = pytest.importorskip("sympy")
    r, s = sp.symbols("r s", positive=True)
    u = (2 - r) ** 2 * (1 + 2 * (r - 1))       # u(1) = 1, clamped at 2, u'(1) = 0
    w2 = (2 - r) * (r - 1) ** 2
    th = (r - 1) * (2 - r)
    v = 1 + sp.Rational(7, 10) * (1 - s**2)    # v(1) = 1 = u(1)
    w5 = (1 - s**2) / 3
    lap = lambda f, x: sp.diff(f, x, 2) + sp.diff(f, x) / x
    p = PhysicalParams(m_damp=1.0, rho_damp=1.0, gamma=0.8)
    two_e = float(
        p.beta1 * sp.integrate(lap(u, r) ** 2 * 2 * sp.pi * r, (r, 1, 2))
        + p.rho1 * sp.integrate(w2**2 * 2 * sp.pi * r, (r, 1, 2))
        + p.gamma * sp.integrate(sp.diff(w2, r) ** 2 * 2 * sp.pi * r, (r, 1, 2))
        + p.rho0 * sp.integrate(th**2 * 2 * sp.pi * r, (r, 1, 2))
        + p.beta2 * sp.integrate(sp.diff(v, s) ** 2 * 2 * sp.pi * s, (s, 0, 1))
        + p.rho2 * sp.integrate(w5**2 * 2 * sp.pi * s, (s, 0, 1)))
    fns = [sp.lambdify(x, f, "numpy") for f, x in
           ((u, r), (w2, r), (th, r), (v, s), (w5, s))]
    errs = []
    for n in (16, 32, 64):
        grid = build_radial_grid(GEO, n, n, 0)
        pencil = assemble_mode_pencil(p, grid)
        w = np.concatenate([fns[0](grid.plate_nodes), fns[1](grid.plate_nodes),
                            fns[2](grid.plate_nodes), fns[3](grid.membrane_nodes),
                            fns[4](grid.membrane_nodes)])
        errs.append(abs(float(w @ (pencil.G @ w)) - two_e))
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5, errs


def test_mesh_refinement_interior_order_at_least_two():
    sympy = pytest.importorskip("sympy")
    f = _manufactured_quintuple(sympy, mode=0,
                                p=PhysicalParams(m_damp=1.0, rho_damp=1.0, gamma=0.5))
    errs = {}
    for n in (32, 64, 128):
        p = PhysicalParams(m_damp=1.0, rho_damp=1.0, gamma=0.5)
        grid = build_radial_grid(GEO, n, n, 0)
        pencil = assemble_mode_pencil(p, grid)
        w = np.concatenate([f["u"](grid.plate_nodes), f["w2"](grid.plate_nodes),
                            f["th"](grid.plate_nodes), f["v"](grid.membrane_nodes),
                            f["w5"](grid.membrane_nodes)])
        Aw = pencil.A @ w
        ref = np.concatenate([f["r1"](grid.plate_nodes), f["r2"](grid.plate_nodes),
                              f["r3"](grid.plate_nodes), f["r4"](grid.membrane_nodes),
                              f["r5"](grid.membrane_nodes)])
        err = 0.0
        win_p = (grid.plate_nodes > 1.25) & (grid.plate_nodes < 1.75)
        win_m = (grid.membrane_nodes > 0.2) & (grid.membrane_nodes < 0.8)
        for block, win in (("u", win_p), ("u_t", win_p), ("theta", win_p),
                           ("v", win_m), ("v_t", win_m)):
            seg = Aw[pencil.block(block)][win] - ref[pencil.block(block)][win]
            err = max(err, np.abs(seg).max())
        errs[n] = err
    order1 = np.log2(errs[32] / errs[64])
    order2 = np.log2(errs[64] / errs[128])
    assert order1 >= 1.9 and order2 >= 1.9, errs


def _manufactured_quintuple(sp, mode, p):
    """Smooth quintuple satisfying all boundary/transmission conditions,
    plus the analytic generator image, as numpy callables."""
    r, s = sp.symbols("r s", positive=True)
    ri, ro = sp.Integer(1), sp.Integer(2)
    n = mode
    lap = lambda f, x: sp.diff(f, x, 2) + sp.diff(f, x) / x - n**2 * f / x**2

    u = (ro - r) ** 2 * (r - ri) ** 2 * (1 + r / 7)
    a, b = sp.symbols("a b")
    th = (r - ri) * (1 + a * (r - ri) + b * (r - ri) ** 2)
    robin = (sp.diff(th, r) + sp.Rational(p.kappa) * th).subs(r, ro)
    th = th.subs(b, sp.solve(robin, b)[0]).subs(a, sp.Rational(1, 3))
    c = sp.symbols("c")
    v = s ** n * (ri**2 - s**2) * (1 + c)
    balance = (p.beta1 * sp.diff(lap(u, r), r).subs(r, ri)
               + p.beta2 * sp.diff(v, s).subs(s, ri)
               + p.mu * sp.diff(th, r).subs(r, ri))
    v = v.subs(c, sp.solve(balance, c)[0])
    w2 = (ro - r) * (r - ri) ** 2
    w5 = s ** n * (ri**2 - s**2) / 3

    rows = {
        "r1": (w2, r),
        "r2": (-p.beta1 * lap(lap(u, r), r) + p.rho_damp * lap(w2, r) - p.mu * lap(th, r), r),
        "r3": (p.mu * lap(w2, r) + p.beta0 * lap(th, r), r),
        "r4": (w5, s),
        "r5": (p.beta2 * lap(v, s) - p.m_damp * w5, s),
    }
    out = {}
    for name, expr, x in (("u", u, r), ("w2", w2, r), ("th", th, r),
                          ("v", v, s), ("w5", w5, s)):
        out[name] = sp.lambdify(x, expr, "numpy")
    for name, (expr, x) in rows.items():
        out[name] = sp.lambdify(x, expr, "numpy")
    return out
