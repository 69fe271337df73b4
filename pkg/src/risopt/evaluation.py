"""Loaded-network evaluation: port currents, power transfer efficiency,
bistatic RCS, angle/capacitance sweeps, plate baseline and tolerance
Monte Carlo."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C0

from . import varactor
from .dipoles import PortNetwork, SceneConfig, build_scene_matrix, zero_los
from .errors import DomainError, NonPhysicalError, SingularNetworkError

#: Relative residual allowed on the loaded-network solve.
SOLVE_RTOL = 1e-10


@dataclass(frozen=True)
class LoadSet:
    """Complex series loads on the RIS ports plus the Tx/Rx terminations."""

    loads: np.ndarray
    source_impedance: complex = 50.0 + 0.0j
    receiver_impedance: complex = 50.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "loads", np.atleast_1d(np.asarray(self.loads, dtype=complex)))
        if np.any(self.loads.real < -1e-12):
            raise DomainError("RIS loads must be passive (non-negative real part)")
        if self.source_impedance.real < 0 or self.receiver_impedance.real < 0:
            raise DomainError("terminations must be passive")

    @property
    def n_elements(self):
        return self.loads.shape[0]

    def termination_diagonal(self) -> np.ndarray:
        return np.concatenate(
            ([self.source_impedance, self.receiver_impedance], self.loads)
        )


@dataclass
class SweepResult:
    """Receiver-angle sweep rows; arrays share the same ordering as the input."""

    alpha_deg: np.ndarray
    beta_deg: np.ndarray
    pte: np.ndarray
    brcs_m2: np.ndarray
    brcs_db: np.ndarray
    plate_brcs_db: np.ndarray | None = None


def solve_loaded_network(
    net: PortNetwork, loads: LoadSet, source_voltage: complex = 1.0
) -> np.ndarray:
    """Port currents of the terminated network driven at the Tx port.

    Solves (Z + Z_L) i = V_s e1 with Z_L the termination diagonal; one step
    of iterative refinement keeps the residual below SOLVE_RTOL.
    """
    if loads.n_elements != net.n_elements:
        raise DomainError(
            f"load count {loads.n_elements} does not match network elements {net.n_elements}"
        )
    a = net.z + np.diag(loads.termination_diagonal())
    rhs = np.zeros(net.n_ports, dtype=complex)
    rhs[0] = source_voltage
    try:
        i = np.linalg.solve(a, rhs)
        i += np.linalg.solve(a, rhs - a @ i)
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(
            f"loaded network is singular: {exc}", condition_estimate=math.inf
        ) from exc
    residual = np.linalg.norm(a @ i - rhs)
    if residual > SOLVE_RTOL * np.linalg.norm(rhs):
        cond = float(np.linalg.cond(a))
        raise SingularNetworkError(
            f"loaded network too ill-conditioned: residual {residual:.3e}, "
            f"condition estimate {cond:.3e}",
            condition_estimate=cond,
        )
    return i


def compute_pte(
    currents: np.ndarray, net: PortNetwork, loads: LoadSet, source_voltage: complex = 1.0
) -> float:
    """Receiver-delivered over transmitter-delivered power."""
    i1 = currents[0]
    i2 = currents[1]
    v1 = source_voltage - loads.source_impedance * i1
    p_t = 0.5 * (v1 * np.conj(i1)).real
    if p_t <= 0:
        raise NonPhysicalError(f"non-positive transmit power {p_t:.3e} W")
    p_r = 0.5 * abs(i2) ** 2 * loads.receiver_impedance.real
    return float(p_r / p_t)


def compute_brcs(pte: float, scene: SceneConfig) -> float:
    """Bistatic RCS from PTE by inverting the radar equation."""
    if pte < 0:
        raise DomainError("pte must be non-negative")
    lam = scene.wavelength
    num = (4 * math.pi) ** 3 * scene.tx_distance**2 * scene.rx_distance**2 * pte
    return num / (scene.tx_gain * scene.rx_gain * lam**2)


def plate_brcs(width: float, height: float, alpha: float, beta: float, f: float) -> float:
    """Physical-optics bistatic RCS of a flat conducting plate, in-plane scan.

    width is the dimension lying in the scan plane; angles are in degrees off
    the plate normal. The specular peak sits at alpha = -beta.
    """
    if abs(alpha) >= 90 or abs(beta) >= 90:
        raise DomainError("angles must satisfy |angle| < 90 degrees")
    lam = C0 / f
    al = math.radians(alpha)
    be = math.radians(beta)
    projection = 0.5 * (math.cos(al) + math.cos(be))
    taper = np.sinc(width * (math.sin(al) + math.sin(be)) / lam)
    return float(4 * math.pi * (width * height / lam) ** 2 * projection**2 * taper**2)


def _brcs_db(sigma: float) -> float:
    return 10.0 * math.log10(sigma) if sigma > 0 else -math.inf


def evaluate_scene(
    scene: SceneConfig, loads: LoadSet, nlos: bool = True
) -> tuple[float, float]:
    """(pte, brcs_m2) of one scene with fixed loads; rebuilds the matrix."""
    net = build_scene_matrix(scene)
    if nlos:
        net = zero_los(net)
    currents = solve_loaded_network(net, loads)
    pte = compute_pte(currents, net, loads)
    return pte, compute_brcs(pte, scene)


def angle_sweep(
    scene: SceneConfig,
    loads: LoadSet,
    beta: float,
    alpha_list,
    nlos: bool = True,
    with_plate: bool = False,
) -> SweepResult:
    """BRCS versus receiver angle with the transmitter fixed at beta.

    The loads stay fixed (optimized at a designated design angle); each alpha
    rebuilds the scene matrix because the Rx antenna moves.
    """
    alphas = np.atleast_1d(np.asarray(alpha_list, dtype=float))
    pte = np.empty_like(alphas)
    brcs = np.empty_like(alphas)
    for idx, alpha in enumerate(alphas):
        step = replace(scene, rx_angle_alpha=float(alpha), tx_angle_beta=float(beta))
        pte[idx], brcs[idx] = evaluate_scene(step, loads, nlos=nlos)
    brcs_db = np.array([_brcs_db(s) for s in brcs])
    plate_db = None
    if with_plate:
        width = scene.cols * scene.col_spacing
        height = scene.rows * scene.row_spacing
        plate_db = np.array(
            [
                _brcs_db(plate_brcs(width, height, float(a), float(beta), scene.frequency))
                for a in alphas
            ]
        )
    return SweepResult(
        alpha_deg=alphas,
        beta_deg=np.full_like(alphas, float(beta)),
        pte=pte,
        brcs_m2=brcs,
        brcs_db=brcs_db,
        plate_brcs_db=plate_db,
    )


def sensitivity_sweep(
    scene: SceneConfig,
    loads: LoadSet,
    element_index: int,
    c_grid,
    nlos: bool = True,
) -> np.ndarray:
    """BRCS versus one element's capacitance, all other loads untouched.

    element_index is 1-based (port = element_index + 2). Returns an array of
    (capacitance_farads, brcs_db) rows in grid order. The network matrix is
    built once; only the swept termination changes.
    """
    if not 1 <= element_index <= loads.n_elements:
        raise DomainError(
            f"element index {element_index} outside [1, {loads.n_elements}]"
        )
    grid = np.atleast_1d(np.asarray(c_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("capacitance grid is empty")
    net = build_scene_matrix(scene)
    if nlos:
        net = zero_los(net)
    rows = np.empty((grid.size, 2))
    base = loads.loads.copy()
    series = base[element_index - 1].real
    for idx, cap in enumerate(grid):
        x = varactor.reactance_of_capacitance(float(cap), scene.frequency)
        trial = base.copy()
        trial[element_index - 1] = complex(series, x)
        ls = LoadSet(trial, loads.source_impedance, loads.receiver_impedance)
        currents = solve_loaded_network(net, ls)
        pte = compute_pte(currents, net, ls)
        rows[idx] = (cap, _brcs_db(compute_brcs(pte, scene)))
    return rows


@dataclass
class MonteCarloResult:
    brcs_db: np.ndarray
    mean: float
    p5: float
    p95: float


def tolerance_monte_carlo(
    scene: SceneConfig,
    loads: LoadSet,
    trials: int,
    seed: int,
    model: varactor.VaractorModel = varactor.SMV2201_040LF,
    nlos: bool = True,
) -> MonteCarloResult:
    """BRCS spread under device capacitance tolerance.

    Each trial perturbs every element's nominal capacitance by a uniform
    multiplicative error drawn from the varactor tolerance band. Deterministic
    for a fixed seed.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    net = build_scene_matrix(scene)
    if nlos:
        net = zero_los(net)
    nominal_caps = np.array(
        [
            varactor.capacitance_of_reactance(float(z.imag), scene.frequency)
            for z in loads.loads
        ]
    )
    fracs = np.array([varactor.tolerance_fraction(model, c) for c in nominal_caps])
    rng = np.random.default_rng(seed)
    samples = np.empty(trials)
    for t in range(trials):
        delta = rng.uniform(-fracs, fracs)
        caps = nominal_caps * (1.0 + delta)
        trial = np.array(
            [
                complex(z.real, varactor.reactance_of_capacitance(float(c), scene.frequency))
                for z, c in zip(loads.loads, caps)
            ]
        )
        ls = LoadSet(trial, loads.source_impedance, loads.receiver_impedance)
        currents = solve_loaded_network(net, ls)
        pte = compute_pte(currents, net, ls)
        samples[t] = _brcs_db(compute_brcs(pte, scene))
    return MonteCarloResult(
        brcs_db=samples,
        mean=float(samples.mean()),
        p5=float(np.percentile(samples, 5)),
        p95=float(np.percentile(samples, 95)),
    )


# --- CSV writers -------------------------------------------------------------


def write_sweep_csv(result: SweepResult, destination) -> None:
    header = ["alpha_deg", "beta_deg", "pte", "brcs_m2", "brcs_db"]
    if result.plate_brcs_db is not None:
        header.append("plate_brcs_db")
    with open(destination, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for idx in range(result.alpha_deg.size):
            row = [
                repr(float(result.alpha_deg[idx])),
                repr(float(result.beta_deg[idx])),
                repr(float(result.pte[idx])),
                repr(float(result.brcs_m2[idx])),
                repr(float(result.brcs_db[idx])),
            ]
            if result.plate_brcs_db is not None:
                row.append(repr(float(result.plate_brcs_db[idx])))
            writer.writerow(row)


def write_sensitivity_csv(rows: np.ndarray, destination) -> None:
    with open(destination, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["capacitance_pf", "brcs_db"])
        for cap, db in rows:
            writer.writerow([repr(float(cap) * 1e12), repr(float(db))])


def write_montecarlo_csv(result: MonteCarloResult, destination) -> None:
    with open(destination, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "brcs_db"])
        for idx, db in enumerate(result.brcs_db):
            writer.writerow([idx, repr(float(db))])
