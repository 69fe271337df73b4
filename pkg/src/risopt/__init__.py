"""Desk-scale design loop for reactively loaded reflective surfaces.

Models the transmitter/surface/receiver link as a multiport impedance
network built from thin-dipole formulas, finds provably optimal reactive
loads by semidefinite relaxation, maps them to varactor bias voltages and
verifies the result with bistatic-RCS sweeps, sensitivity curves, a
brute-force oracle and a time-gating simulation.
"""

from .dipoles import (
    DEFAULT_ELEMENT,
    PRINTED_ELEMENT,
    DipoleSpec,
    PortNetwork,
    SceneConfig,
    build_scene_matrix,
    load_matrix,
    load_scene,
    mutual_impedance,
    save_matrix,
    save_scene,
    self_impedance,
    zero_los,
)
from .evaluation import (
    LoadSet,
    SweepResult,
    angle_sweep,
    compute_brcs,
    compute_pte,
    plate_brcs,
    sensitivity_sweep,
    solve_loaded_network,
    tolerance_monte_carlo,
)
from .pipeline import OptimizationResult, loads_from_solution, optimize_scene
from .sdr import (
    LoadSolution,
    QcqpLift,
    SdpSolution,
    brute_force_pte,
    build_lift,
    recover_solution,
    solve_sdp,
    tightness_ratio,
)
from .timegate import (
    FrequencyResponse,
    GateConfig,
    apply_gate,
    auto_gate,
    gated_center_value,
    synthesize_response,
    to_time,
)
from .varactor import (
    SMV2201_040LF,
    BiasPoint,
    VaractorModel,
    bias_voltage,
    capacitance_of_reactance,
    clip_reactance,
    realized_load,
    reactance_of_capacitance,
)

__version__ = "0.1.0"
