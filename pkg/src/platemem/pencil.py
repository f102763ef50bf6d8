"""Per-mode generator pencil (M, A) and energy Gram matrix G.

State layout per mode: w = (u, u_t, theta, v, v_t) as contiguous blocks of
nodal values.  The first-order system is M w' = A w with

    M = diag(I, rho1*I - gamma*L2, rho0*I, I, rho2*I)

and A the block operator of the plate/heat/membrane equations.  A is
assembled in the weak (energy-compatible) arrangement: the conservative
pairs of blocks are exact quadrature-duals of the Gram forms, built from the
same centered stencils, ghost closures, and midpoint polar quadrature.  That
makes  Re <M^-1 A w, w>_G  equal, to round-off, to minus the four physical
dissipation channels, so the discrete semigroup is a contraction in the
G-norm by construction and Crank-Nicolson steps can never gain energy.

Ghost closures (one layer per field and end):
  u      mirror at the interface (d_r u = 0), clamped cubic at the rim
         (ghost = 2 u[-1] - u[-2]/9, the cubic with value and slope zero);
  u_t    mirror at the interface, odd reflection at the rim (u_t = 0);
  theta  odd reflection at the interface (theta = 0), Robin at the rim;
  v      parity at the origin (even for mode 0, odd otherwise; the stencil
         coefficient there vanishes anyway), shared-trace at the interface.
The interface value is owned by the plate side, U = (9 u[0] - u[1])/8, and
the membrane's interface half-edge gradient term in the Gram couples v's
last node to U; that single term carries both the u = v continuity and the
flux balance of the transmission conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .grid import TWO_PI, RadialGrid, laplacian_mode
from .model import PhysicalParams

FIELDS = ("u", "u_t", "theta", "v", "v_t")

ENERGY_PARTS = ("E_bend", "E_kin_plate", "E_rot", "E_thermal", "E_mem_pot", "E_mem_kin")
DISSIPATION_CHANNELS = ("D_struct", "D_thermal_bulk", "D_thermal_bdry", "D_membrane")


class AssemblyError(RuntimeError):
    """Raised when a pencil fails a structural check (symmetry, definiteness)."""


@dataclass(frozen=True)
class Closures:
    """Ghost-elimination rows: each ghost value as a row over interior dofs.

    Vectors act on the owning field's interior values; the membrane interface
    ghost additionally needs the plate trace row (over u)."""

    u_inner: np.ndarray
    u_outer: np.ndarray
    ut_inner: np.ndarray
    ut_outer: np.ndarray
    theta_inner: np.ndarray
    theta_outer: np.ndarray
    v_origin: np.ndarray
    v_interface_v: np.ndarray
    v_interface_u: np.ndarray
    trace_u: np.ndarray
    robin_ghost_factor: float


def make_closures(p: PhysicalParams, grid: RadialGrid) -> Closures:
    np_, nm = grid.n_plate, grid.n_mem
    hp = grid.h_plate

    def row(n, entries):
        r = np.zeros(n)
        for i, c in entries:
            r[i] = c
        return r

    robin = (1.0 / hp - p.kappa / 2.0) / (1.0 / hp + p.kappa / 2.0)
    trace_u = row(np_, [(0, 9.0 / 8.0), (1, -1.0 / 8.0)])
    return Closures(
        u_inner=row(np_, [(0, 1.0)]),
        u_outer=row(np_, [(np_ - 1, 2.0), (np_ - 2, -1.0 / 9.0)]),
        ut_inner=row(np_, [(0, 1.0)]),
        ut_outer=row(np_, [(np_ - 1, -1.0)]),
        theta_inner=row(np_, [(0, -1.0)]),
        theta_outer=row(np_, [(np_ - 1, robin)]),
        v_origin=row(nm, [(0, 1.0 if grid.mode == 0 else -1.0)]),
        v_interface_v=row(nm, [(nm - 1, -1.0)]),
        v_interface_u=2.0 * trace_u,
        trace_u=trace_u,
        robin_ghost_factor=robin,
    )


def _closed(L_ext: np.ndarray, inner_row: np.ndarray, outer_row: np.ndarray) -> np.ndarray:
    """Fold ghost columns into interior columns: L_ext is (n, n+2)."""
    n = L_ext.shape[0]
    L = L_ext[:, 1:n + 1].copy()
    L += np.outer(L_ext[:, 0], inner_row)
    L += np.outer(L_ext[:, n + 1], outer_row)
    return L


def _dual(L_closed: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Exact Dirichlet form -W L of a conservatively closed Laplacian."""
    K = -(weights[:, None] * L_closed)
    asym = np.abs(K - K.T).max()
    scale = max(np.abs(K).max(), 1.0)
    if asym > 1e-12 * scale:
        raise AssemblyError(f"weighted Laplacian not symmetric (asymmetry {asym:.2e})")
    return 0.5 * (K + K.T)


@dataclass
class ModePencil:
    """Discrete generator pencil, Gram matrix, and bookkeeping for one mode."""

    mode: int
    M: np.ndarray
    A: np.ndarray
    G: np.ndarray
    dof_layout: tuple[tuple[str, int, int], ...]
    grid: RadialGrid
    params: PhysicalParams
    closures: Closures
    energy_parts: dict[str, np.ndarray]
    dissipation_parts: dict[str, np.ndarray]
    _cache: dict[Any, Any] = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def block(self, name: str) -> slice:
        for fname, a, b in self.dof_layout:
            if fname == name:
                return slice(a, b)
        raise KeyError(name)


def gram_matrix(p: PhysicalParams, grid: RadialGrid, closures: Closures) -> np.ndarray:
    """Discrete energy inner product: symmetric positive definite G with
    w* G w equal to twice the physical energy."""
    G = np.zeros((3 * grid.n_plate + 2 * grid.n_mem,) * 2)
    for part in _energy_parts(p, grid, closures).values():
        G += part
    return 0.5 * (G + G.T)


def _energy_parts(p: PhysicalParams, grid: RadialGrid, closures: Closures) -> dict[str, np.ndarray]:
    """Energy component matrices over the full dof vector.

    The six quadratic terms of the inner product (bending, plate kinetic,
    rotational, thermal, membrane potential, membrane kinetic); their sum is
    the Gram matrix G.  Gradient seminorms use the staggered edge quadrature
    dual to the conservative stencils, so each term is the exact dual of the
    matching operator block.
    """
    np_, nm = grid.n_plate, grid.n_mem
    n = 3 * np_ + 2 * nm
    o_u, o_ut, o_th, o_v, o_vt = 0, np_, 2 * np_, 3 * np_, 3 * np_ + nm
    Wp, Wm = grid.plate_weights, grid.membrane_weights
    Lp = laplacian_mode(grid, "plate")
    Lm = laplacian_mode(grid, "membrane")

    Le = _closed(Lp, closures.u_inner, closures.u_outer)
    L2 = _closed(Lp, closures.ut_inner, closures.ut_outer)
    mirror = np.zeros(nm)
    mirror[nm - 1] = 1.0
    Lm0 = _closed(Lm, closures.v_origin, mirror)  # zero-flux interface edge
    K2 = _dual(L2, Wp)
    # Km is the interior-edge Dirichlet form only; the interface half-edge
    # enters exclusively through the jump term below
    Km = _dual(Lm0, Wm)

    parts = {k: np.zeros((n, n)) for k in ENERGY_PARTS}
    parts["E_bend"][o_u:o_u + np_, o_u:o_u + np_] = p.beta1 * Le.T @ (Wp[:, None] * Le)
    parts["E_kin_plate"][o_ut:o_ut + np_, o_ut:o_ut + np_] = p.rho1 * np.diag(Wp)
    parts["E_rot"][o_ut:o_ut + np_, o_ut:o_ut + np_] = p.gamma * K2
    parts["E_thermal"][o_th:o_th + np_, o_th:o_th + np_] = p.rho0 * np.diag(Wp)
    # membrane gradient: interior edges plus the interface half-edge, whose
    # boundary value is the plate-side trace U; the jump row is U(u) - v[-1]
    mem = np.zeros((n, n))
    mem[o_v:o_v + nm, o_v:o_v + nm] = Km
    ej = np.zeros(n)
    ej[o_u:o_u + np_] = closures.trace_u
    ej[o_v + nm - 1] = -1.0
    mem += (2.0 * TWO_PI * grid.r_interface / grid.h_mem) * np.outer(ej, ej)
    parts["E_mem_pot"] = p.beta2 * mem
    parts["E_mem_kin"][o_vt:o_vt + nm, o_vt:o_vt + nm] = p.rho2 * np.diag(Wm)
    return parts


def assemble_mode_pencil(p: PhysicalParams, grid: RadialGrid) -> ModePencil:
    """Build (M, A, G) for one Fourier mode."""
    np_, nm = grid.n_plate, grid.n_mem
    n = 3 * np_ + 2 * nm
    o_u, o_ut, o_th, o_v, o_vt = 0, np_, 2 * np_, 3 * np_, 3 * np_ + nm
    layout = (
        ("u", o_u, o_u + np_),
        ("u_t", o_ut, o_ut + np_),
        ("theta", o_th, o_th + np_),
        ("v", o_v, o_v + nm),
        ("v_t", o_vt, o_vt + nm),
    )
    closures = make_closures(p, grid)
    Wp, Wm = grid.plate_weights, grid.membrane_weights
    Lp = laplacian_mode(grid, "plate")
    L2 = _closed(Lp, closures.ut_inner, closures.ut_outer)
    Lth = _closed(Lp, closures.theta_inner, closures.theta_outer)
    K2 = _dual(L2, Wp)
    Kth = _dual(Lth, Wp)

    parts = _energy_parts(p, grid, closures)
    G = np.zeros((n, n))
    for m_ in parts.values():
        G += m_
    G = 0.5 * (G + G.T)

    # Q: the (w1, w4) pair form = bending + membrane potential
    pair = parts["E_bend"] + parts["E_mem_pot"]

    A = np.zeros((n, n))
    A[o_u:o_u + np_, o_ut:o_ut + np_] = np.eye(np_)
    A[o_v:o_v + nm, o_vt:o_vt + nm] = np.eye(nm)
    # conservative rows: minus the weighted dual of the pair form
    A[o_ut:o_ut + np_, :] -= pair[o_u:o_u + np_, :] / Wp[:, None]
    A[o_vt:o_vt + nm, :] -= pair[o_v:o_v + nm, :] / Wm[:, None]
    # structural damping and thermo-coupling on the plate
    A[o_ut:o_ut + np_, o_ut:o_ut + np_] += p.rho_damp * L2
    A[o_ut:o_ut + np_, o_th:o_th + np_] += -p.mu * L2
    A[o_th:o_th + np_, o_ut:o_ut + np_] = p.mu * L2
    A[o_th:o_th + np_, o_th:o_th + np_] = p.beta0 * Lth
    A[o_vt:o_vt + nm, o_vt:o_vt + nm] += -p.m_damp * np.eye(nm)

    M = np.eye(n)
    M[o_ut:o_ut + np_, o_ut:o_ut + np_] = p.rho1 * np.eye(np_) - p.gamma * L2
    M[o_th:o_th + np_, o_th:o_th + np_] *= p.rho0
    M[o_vt:o_vt + nm, o_vt:o_vt + nm] *= p.rho2

    # dissipation channel forms (exact split of -Re <M^-1 A w, w>_G)
    robin_edge = Wp[-1] * (1.0 / grid.h_plate**2 + 1.0 / (2.0 * grid.h_plate * grid.plate_nodes[-1]))
    robin_coef = robin_edge * (1.0 - closures.robin_ghost_factor)
    diss = {k: np.zeros((n, n)) for k in DISSIPATION_CHANNELS}
    diss["D_struct"][o_ut:o_ut + np_, o_ut:o_ut + np_] = p.rho_damp * K2
    th_bdry = np.zeros((np_, np_))
    th_bdry[np_ - 1, np_ - 1] = robin_coef
    diss["D_thermal_bulk"][o_th:o_th + np_, o_th:o_th + np_] = p.beta0 * (Kth - th_bdry)
    diss["D_thermal_bdry"][o_th:o_th + np_, o_th:o_th + np_] = p.beta0 * th_bdry
    diss["D_membrane"][o_vt:o_vt + nm, o_vt:o_vt + nm] = p.m_damp * np.diag(Wm)

    pencil = ModePencil(
        mode=grid.mode,
        M=M,
        A=A,
        G=G,
        dof_layout=layout,
        grid=grid,
        params=p,
        closures=closures,
        energy_parts=parts,
        dissipation_parts=diss,
    )
    _check_definiteness(pencil)
    return pencil


def _check_definiteness(pencil: ModePencil) -> None:
    """G and the weighted M must factor (positive definiteness)."""
    w = np.concatenate([
        pencil.grid.plate_weights, pencil.grid.plate_weights,
        pencil.grid.plate_weights, pencil.grid.membrane_weights,
        pencil.grid.membrane_weights,
    ])
    WM = w[:, None] * pencil.M
    WM = 0.5 * (WM + WM.T)
    jitter = 1e-13 * (np.trace(pencil.G) / pencil.dim)
    for name, mat in (("G", pencil.G), ("weighted M", WM)):
        try:
            np.linalg.cholesky(mat + jitter * np.eye(pencil.dim))
        except np.linalg.LinAlgError as exc:
            raise AssemblyError(f"{name} is not positive definite for mode {pencil.mode}") from exc


def interface_trace(pencil: ModePencil, w: np.ndarray) -> complex:
    """Shared interface value U (plate side owns it)."""
    u = w[pencil.block("u")]
    return complex(pencil.closures.trace_u @ u)


def ghost_values(pencil: ModePencil, w: np.ndarray) -> dict[str, tuple[complex, complex]]:
    """Eliminated (inner, outer) ghost values for each field of a state."""
    c = pencil.closures
    u = w[pencil.block("u")]
    ut = w[pencil.block("u_t")]
    th = w[pencil.block("theta")]
    v = w[pencil.block("v")]
    return {
        "u": (complex(c.u_inner @ u), complex(c.u_outer @ u)),
        "u_t": (complex(c.ut_inner @ ut), complex(c.ut_outer @ ut)),
        "theta": (complex(c.theta_inner @ th), complex(c.theta_outer @ th)),
        "v": (complex(c.v_origin @ v), complex(c.v_interface_v @ v + c.v_interface_u @ u)),
    }


def closure_residuals(pencil: ModePencil, w: np.ndarray) -> dict[str, float]:
    """Residuals of the eliminated boundary/transmission rows for a state.

    Each entry is |row residual| of the defining condition evaluated on the
    reconstructed extended field; exact elimination makes them round-off
    small relative to the state magnitude.
    """
    g = ghost_values(pencil, w)
    c = pencil.closures
    hp = pencil.grid.h_plate
    u = w[pencil.block("u")]
    ut = w[pencil.block("u_t")]
    th = w[pencil.block("theta")]
    v = w[pencil.block("v")]
    U = interface_trace(pencil, w)
    kappa = pencil.params.kappa
    gi, go = g["u"]
    res = {
        # clamped rim: (ghost, u[-1], u[-2]) lie on a cubic with value and
        # slope zero at the rim iff 9*ghost - 18 u[-1] + u[-2] = 0
        "u_rim_clamped": abs(9.0 * go - 18.0 * u[-1] + u[-2]),
        "u_interface_slope": abs(gi - u[0]),
        "ut_interface_slope": abs(g["u_t"][0] - ut[0]),
        "ut_rim_value": abs(g["u_t"][1] + ut[-1]),
        "theta_interface_value": abs(g["theta"][0] + th[0]),
        "theta_rim_robin": abs((g["theta"][1] - th[-1]) / hp + kappa * (g["theta"][1] + th[-1]) / 2.0),
        "v_origin_parity": abs(g["v"][0] - (v[0] if pencil.mode == 0 else -v[0])),
        "v_interface_continuity": abs((v[-1] + g["v"][1]) / 2.0 - U),
    }
    return res


def membrane_subpencil(p: PhysicalParams, grid: RadialGrid) -> ModePencil:
    """Membrane-only sub-pencil with the plate frozen (v = 0 on the interface).

    Freezing u pins the shared trace to zero, so the interface closure
    degenerates to a Dirichlet condition; used by the Bessel-frequency
    validation and the near-resonance resolvent checks.
    """
    nm = grid.n_mem
    n = 2 * nm
    Wm = grid.membrane_weights
    Lm = laplacian_mode(grid, "membrane")
    origin = np.zeros(nm)
    origin[0] = 1.0 if grid.mode == 0 else -1.0
    dirichlet = np.zeros(nm)
    dirichlet[nm - 1] = -1.0
    LmD = _closed(Lm, origin, dirichlet)
    Km = _dual(LmD, Wm)

    A = np.zeros((n, n))
    A[:nm, nm:] = np.eye(nm)
    A[nm:, :nm] = p.beta2 * LmD
    A[nm:, nm:] = -p.m_damp * np.eye(nm)
    M = np.eye(n)
    M[nm:, nm:] *= p.rho2
    G = np.zeros((n, n))
    G[:nm, :nm] = p.beta2 * Km
    G[nm:, nm:] = p.rho2 * np.diag(Wm)
    layout = (("v", 0, nm), ("v_t", nm, n))
    parts = {k: np.zeros((n, n)) for k in ENERGY_PARTS}
    parts["E_mem_pot"][:nm, :nm] = p.beta2 * Km
    parts["E_mem_kin"][nm:, nm:] = p.rho2 * np.diag(Wm)
    diss = {k: np.zeros((n, n)) for k in DISSIPATION_CHANNELS}
    diss["D_membrane"][nm:, nm:] = p.m_damp * np.diag(Wm)
    closures = make_closures(p, grid)
    return ModePencil(
        mode=grid.mode, M=M, A=A, G=G, dof_layout=layout, grid=grid, params=p,
        closures=closures, energy_parts=parts, dissipation_parts=diss,
    )
