"""Receiver-power maximization over RIS port currents.

The non-convex QCQP (maximize receiver power, fixed delivered transmit
power, zero real power into every reactively loaded port) is lifted to a
semidefinite program over the Hermitian current outer product. The receiver
termination equality is lifted as a rank-1 PSD trace constraint; solving
happens on the orthogonal complement of that constraint's range, embedded as
a real SDP and handed to a primal-dual interior-point solver. A rank-1
solution certifies the relaxation tight, and the optimal reactances follow
from the recovered current vector.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvxmatrix
from cvxopt import solvers as cvxsolvers

from .dipoles import PortNetwork
from .errors import (
    ComplexityError,
    DegenerateSolutionError,
    DomainError,
    InfeasibleProblemError,
    InvalidTerminationError,
    NotTightError,
    SolverConvergenceError,
)
from .evaluation import LoadSet, compute_pte, solve_loaded_network

#: Relaxations with a larger second-to-first eigenvalue ratio are rejected.
TIGHTNESS_ACCEPT = 1e-4

#: Reactance assigned to ports whose optimal current is zero (any value is
#: optimal there); midpoint of the default varactor range at 3.55 GHz.
INDETERMINATE_REACTANCE = -108.1


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass
class QcqpLift:
    """Lifted matrices of the receiver-power QCQP, all Hermitian (N+2)-side."""

    objective_matrix: np.ndarray
    tx_power_matrix: np.ndarray
    rx_termination_matrix: np.ndarray
    reactive_port_matrices: list[np.ndarray]
    tx_power_target: float
    receiver_row: np.ndarray = field(repr=False, default=None)

    @property
    def n_ports(self):
        return self.objective_matrix.shape[0]


@dataclass
class SdpSolution:
    """PSD solution of the relaxation with its optimality diagnostics."""

    lifted_matrix: np.ndarray
    objective: float
    duality_gap: float
    iterations: int
    eigenvalues: np.ndarray
    tx_power: float


@dataclass
class LoadSolution:
    """Recovered port currents, reactances and consistency diagnostics."""

    currents: np.ndarray
    reactances: np.ndarray
    pte: float
    tightness_ratio: float
    passivity_residuals: np.ndarray
    indeterminate: np.ndarray


def build_lift(
    net: PortNetwork,
    receiver_impedance: complex,
    tx_power: float = 1.0,
    series_resistance: float = 0.0,
) -> QcqpLift:
    """Assemble the lifted QCQP matrices from the scene impedance matrix.

    Any series loss of the tunable devices is folded into the RIS-port
    diagonal first, so the optimizer sees the lossy reality while the load
    constraint stays purely reactive.
    """
    receiver_impedance = complex(receiver_impedance)
    if receiver_impedance.real <= 0:
        raise InvalidTerminationError(
            f"receiver impedance {receiver_impedance} must have positive real part"
        )
    if tx_power <= 0:
        raise DomainError("transmit power must be positive")
    if series_resistance < 0:
        raise DomainError("series resistance must be non-negative")
    if not net.los_zeroed:
        warnings.warn(
            "optimizing a network whose LOS entries are not zeroed; the NLOS "
            "assumption usually applies",
            stacklevel=2,
        )
    n = net.n_ports
    z = net.z.astype(complex, copy=True)
    for p in range(2, n):
        z[p, p] += series_resistance

    b = np.zeros((n, n), dtype=complex)
    b[1, 1] = 0.5 * receiver_impedance.real

    a_t = np.zeros((n, n), dtype=complex)
    a_t[0, :] = 0.5 * z[0, :]
    a_t = _hermitian_part(a_t)

    port_mats = []
    for p in range(2, n):
        a_p = np.zeros((n, n), dtype=complex)
        a_p[p, :] = 0.5 * z[p, :]
        port_mats.append(_hermitian_part(a_p))

    c_row = z[1, :].copy()
    c_row[1] += receiver_impedance
    m_r = np.outer(np.conj(c_row), c_row)

    return QcqpLift(
        objective_matrix=b,
        tx_power_matrix=a_t,
        rx_termination_matrix=m_r,
        reactive_port_matrices=port_mats,
        tx_power_target=float(tx_power),
        receiver_row=c_row,
    )


# --- Hermitian SDP via real embedding ----------------------------------------


def _nullspace_basis(c_row: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of conj(c_row) via a Householder map."""
    u = np.conj(c_row) / np.linalg.norm(c_row)
    alpha = u[0] / abs(u[0]) if u[0] != 0 else 1.0
    v = u + alpha * np.eye(len(u), dtype=complex)[:, 0]
    h = np.eye(len(u), dtype=complex) - 2.0 * np.outer(v, np.conj(v)) / np.vdot(v, v).real
    return h[:, 1:]


def _basis_indices(m: int):
    """Coordinate layout of the Hermitian m x m parametrization."""
    diag = [(i, i) for i in range(m)]
    off = [(i, j) for i in range(m) for j in range(i + 1, m)]
    return diag, off


def _trace_row(mat: np.ndarray, diag, off) -> np.ndarray:
    """Tr(mat @ X) as a linear functional of the real coordinates of X."""
    row = np.empty(len(diag) + 2 * len(off))
    for k, (i, _) in enumerate(diag):
        row[k] = mat[i, i].real
    base = len(diag)
    for k, (i, j) in enumerate(off):
        row[base + k] = 2.0 * mat[i, j].real
        row[base + len(off) + k] = 2.0 * mat[i, j].imag
    return row


def _coords_to_hermitian(x: np.ndarray, m: int, diag, off) -> np.ndarray:
    out = np.zeros((m, m), dtype=complex)
    for k, (i, _) in enumerate(diag):
        out[i, i] = x[k]
    base = len(diag)
    for k, (i, j) in enumerate(off):
        val = complex(x[base + k], x[base + len(off) + k])
        out[i, j] = val
        out[j, i] = np.conj(val)
    return out


def _real_embedding_columns(m: int, diag, off) -> np.ndarray:
    """Column k = vec of the real symmetric embedding of basis matrix E_k."""
    dim = 2 * m
    n_x = len(diag) + 2 * len(off)
    cols = np.zeros((dim * dim, n_x))

    def put(re_part, im_part, k):
        emb = np.zeros((dim, dim))
        emb[:m, :m] = re_part
        emb[m:, m:] = re_part
        emb[m:, :m] = im_part
        emb[:m, m:] = -im_part
        cols[:, k] = emb.reshape(-1, order="F")

    for k, (i, _) in enumerate(diag):
        re = np.zeros((m, m))
        re[i, i] = 1.0
        put(re, np.zeros((m, m)), k)
    base = len(diag)
    for k, (i, j) in enumerate(off):
        re = np.zeros((m, m))
        re[i, j] = 1.0
        re[j, i] = 1.0
        put(re, np.zeros((m, m)), base + k)
        im = np.zeros((m, m))
        im[i, j] = 1.0
        im[j, i] = -1.0
        put(np.zeros((m, m)), im, base + len(off) + k)
    return cols


def _objective_scale(lift: QcqpLift) -> float:
    """Order-of-magnitude estimate of the achievable receiver power.

    Free-space coupling makes the optimum many orders below the transmit
    power, which would defeat the solver's absolute gap test. The estimate
    chains the physical current scales: drive current from the Tx self
    resistance, element currents via the Tx coupling over the (loss-reduced)
    element resistance, receiver current via the Rx coupling rows. Only the
    reported tolerance interpretation depends on it, not the optimum itself.
    """
    a_t = lift.tx_power_matrix
    re_z00 = max(2.0 * a_t[0, 0].real, 1e-12)
    i1 = math.sqrt(2.0 * lift.tx_power_target / re_z00)
    i_elems = []
    for k, a_p in enumerate(lift.reactive_port_matrices):
        p = k + 2
        coupling = abs(4.0 * a_t[0, p])
        r_p = max(2.0 * a_p[p, p].real, 1e-9)
        i_elems.append(i1 * coupling / r_p)
    den = max(abs(lift.receiver_row[1]), 1e-9)
    flow = abs(lift.receiver_row[0]) * i1
    for k, i_p in enumerate(i_elems):
        flow += abs(lift.receiver_row[k + 2]) * i_p
    i2 = flow / den
    i2 = min(max(i2, 1e-12 * i1), 1e6 * i1)
    re_zr = 2.0 * lift.objective_matrix[1, 1].real
    return max(0.5 * i2 * i2 * re_zr, 1e-300)


def solve_sdp(lift: QcqpLift, tol: float = 1e-8) -> SdpSolution:
    """Solve the relaxation: maximize Tr(B I) over PSD I meeting the traces.

    The receiver lifting Tr(M_R I) = 0 pins I's range to the complement of
    the lifted receiver row, which is eliminated exactly before handing the
    reduced Hermitian problem (real embedding) to the interior-point solver.
    Deterministic for identical inputs and tolerance.
    """
    if not 0 < tol < 1:
        raise DomainError("tolerance must be in (0, 1)")
    n = lift.n_ports
    q = _nullspace_basis(lift.receiver_row)
    m = n - 1
    kappa = 1.0 / _objective_scale(lift)

    b_red = _hermitian_part(q.conj().T @ (kappa * lift.objective_matrix) @ q)
    at_red = _hermitian_part(q.conj().T @ lift.tx_power_matrix @ q)
    an_red = [
        _hermitian_part(q.conj().T @ a @ q) for a in lift.reactive_port_matrices
    ]

    diag, off = _basis_indices(m)
    n_x = len(diag) + 2 * len(off)

    c_lp = cvxmatrix(-_trace_row(b_red, diag, off))
    g = cvxmatrix(-_real_embedding_columns(m, diag, off))
    h = cvxmatrix(np.zeros(4 * m * m))
    a_rows = [_trace_row(at_red, diag, off)] + [
        _trace_row(a, diag, off) for a in an_red
    ]
    a_eq = cvxmatrix(np.vstack(a_rows))
    b_eq = cvxmatrix(
        np.concatenate(([lift.tx_power_target], np.zeros(len(an_red))))
    )
    dims = {"l": 0, "q": [], "s": [2 * m]}

    options = {
        "show_progress": False,
        "maxiters": 200,
        "abstol": tol,
        "reltol": tol,
        "feastol": max(1e-9, 0.1 * tol),
        "refinement": 2,
    }
    try:
        sol = cvxsolvers.conelp(c_lp, g, h, dims, a_eq, b_eq, options=options)
    except (ValueError, ArithmeticError) as exc:
        raise SolverConvergenceError(f"interior-point solver failed: {exc}") from exc

    status = sol["status"]
    if status == "primal infeasible":
        raise InfeasibleProblemError(
            "no current distribution meets the power and passivity constraints "
            f"(transmit power {lift.tx_power_target} W unreachable)",
            certificate="primal",
        )
    if status == "dual infeasible":
        raise InfeasibleProblemError(
            "objective unbounded above; the network is not passive",
            certificate="unbounded",
        )
    gap = sol.get("relative gap")
    if gap is None:
        gap = sol.get("gap") or 0.0
    if status != "optimal" and (gap is None or gap > tol):
        raise SolverConvergenceError(
            f"solver stopped with status '{status}' after {sol['iterations']} iterations "
            f"(relative gap {gap})",
            iterations=sol["iterations"],
            gap=gap,
        )

    x = np.array(sol["x"]).ravel()
    i_red = _coords_to_hermitian(x, m, diag, off)
    i_full = _hermitian_part(q @ i_red @ q.conj().T)
    eigenvalues = np.linalg.eigvalsh(i_full)[::-1].copy()
    trace = eigenvalues.sum()
    if trace > 0 and eigenvalues[-1] < -1e-9 * trace:
        raise SolverConvergenceError(
            f"solution not PSD: min eigenvalue {eigenvalues[-1]:.3e} for trace {trace:.3e}"
        )
    objective = float(np.trace(lift.objective_matrix @ i_full).real)
    return SdpSolution(
        lifted_matrix=i_full,
        objective=objective,
        duality_gap=float(gap or 0.0),
        iterations=int(sol["iterations"]),
        eigenvalues=eigenvalues,
        tx_power=lift.tx_power_target,
    )


def tightness_ratio(sol: SdpSolution) -> float:
    """Second-largest over largest eigenvalue of the lifted matrix; 0 if rank 1."""
    lam = sol.eigenvalues
    if lam[0] <= 0:
        raise DegenerateSolutionError(
            f"leading eigenvalue {lam[0]:.3e} is not positive"
        )
    if lam.size < 2:
        return 0.0
    return float(max(lam[1], 0.0) / lam[0])


def recover_solution(
    sol: SdpSolution,
    net: PortNetwork,
    receiver_impedance: complex,
    series_resistance: float = 0.0,
    indeterminate_reactance: float = INDETERMINATE_REACTANCE,
) -> LoadSolution:
    """Extract currents and per-port reactances from a (near-)rank-1 solution.

    Ports carrying negligible current get the configured fallback reactance:
    any value is optimal there, and a fixed choice keeps runs reproducible.
    """
    ratio = tightness_ratio(sol)
    if ratio > TIGHTNESS_ACCEPT:
        raise NotTightError(
            f"relaxation not tight: eigenvalue ratio {ratio:.3e} exceeds {TIGHTNESS_ACCEPT}",
            ratio=ratio,
        )
    lam, vecs = np.linalg.eigh(sol.lifted_matrix)
    principal = vecs[:, -1]
    anchor = int(np.argmax(np.abs(principal)))
    phase = principal[anchor] / abs(principal[anchor])
    currents = math.sqrt(max(lam[-1], 0.0)) * principal / phase

    n = net.n_ports
    z = net.z.astype(complex, copy=True)
    for p in range(2, n):
        z[p, p] += series_resistance
    volts = z @ currents

    rx_residual_num = abs(volts[1] + complex(receiver_impedance) * currents[1])
    rx_scale = abs(volts[1]) + abs(complex(receiver_impedance) * currents[1])
    if rx_scale > 0 and rx_residual_num / rx_scale > 1e-6:
        warnings.warn(
            f"receiver termination residual {rx_residual_num / rx_scale:.3e} is large; "
            "solution may not be tight",
            stacklevel=2,
        )

    scale = np.linalg.norm(currents)
    reactances = np.empty(n - 2)
    residuals = np.zeros(n - 2)
    indeterminate = np.zeros(n - 2, dtype=bool)
    for k, p in enumerate(range(2, n)):
        i_p = currents[p]
        if abs(i_p) < 1e-12 * scale:
            reactances[k] = indeterminate_reactance
            indeterminate[k] = True
            continue
        v_p = volts[p]
        reactances[k] = -(v_p * np.conj(i_p)).imag / abs(i_p) ** 2
        denom = abs(v_p) * abs(i_p)
        residuals[k] = abs((v_p * np.conj(i_p)).real) / denom if denom > 0 else 0.0

    return LoadSolution(
        currents=currents,
        reactances=reactances,
        pte=float(sol.objective / sol.tx_power),
        tightness_ratio=ratio,
        passivity_residuals=residuals,
        indeterminate=indeterminate,
    )


def brute_force_pte(
    net: PortNetwork,
    x_grid,
    receiver_impedance: complex,
    source_impedance: complex,
    series_resistance: float = 0.0,
):
    """Exhaustive PTE maximization over a reactance grid; the oracle path.

    Evaluates every point of the Cartesian grid through the loaded-network
    solve and returns (best reactance vector, best PTE). Ties go to the
    lexicographically smallest grid index. Refused above 3 elements.
    """
    grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("reactance grid is empty")
    n_el = net.n_elements
    if n_el > 3:
        raise ComplexityError(
            f"brute force over {grid.size}^{n_el} points refused; "
            "use at most 3 elements"
        )
    best_pte = -math.inf
    best_idx = None
    for combo in itertools.product(range(grid.size), repeat=n_el):
        loads = LoadSet(
            series_resistance + 1j * grid[list(combo)],
            source_impedance=source_impedance,
            receiver_impedance=receiver_impedance,
        )
        currents = solve_loaded_network(net, loads)
        pte = compute_pte(currents, net, loads)
        if pte > best_pte:
            best_pte = pte
            best_idx = combo
    return grid[list(best_idx)], float(best_pte)
