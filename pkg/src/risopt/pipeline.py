"""End-to-end orchestration: scene -> optimization -> realizable loads.

Glues the network builder, the relaxation solver and the varactor mapping
into the artifacts the command-line front end reads and writes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import varactor
from .dipoles import (
    PortNetwork,
    SceneConfig,
    _complex_from_json,
    _complex_to_json,
    build_scene_matrix,
    zero_los,
)
from .errors import ConfigurationError
from .evaluation import LoadSet
from .sdr import LoadSolution, build_lift, recover_solution, solve_sdp


@dataclass
class OptimizationResult:
    """Everything the optimize step produces, solver-side and realizable-side."""

    scene: SceneConfig
    network: PortNetwork
    solution: LoadSolution
    bias_points: list[varactor.BiasPoint]
    model: varactor.VaractorModel
    tx_power: float

    @property
    def load_set(self) -> LoadSet:
        """Realizable loads: series loss plus the clipped reactances."""
        realized = np.array(
            [complex(self.model.series_resistance, bp.reactance) for bp in self.bias_points]
        )
        return LoadSet(
            realized,
            source_impedance=self.scene.source_impedance,
            receiver_impedance=self.scene.receiver_impedance,
        )

    @property
    def capacitances(self) -> np.ndarray:
        return np.array([bp.capacitance for bp in self.bias_points])

    @property
    def n_clipped(self) -> int:
        return sum(bp.clipped for bp in self.bias_points)


def optimize_scene(
    scene: SceneConfig,
    tol: float = 1e-8,
    model: varactor.VaractorModel = varactor.SMV2201_040LF,
    tx_power: float = 1.0,
    nlos: bool = True,
    net: PortNetwork | None = None,
) -> OptimizationResult:
    """Run the full design loop for one scene (or a pre-built network)."""
    if net is None:
        net = build_scene_matrix(scene)
        if nlos:
            net = zero_los(net)
    lift = build_lift(
        net,
        scene.receiver_impedance,
        tx_power=tx_power,
        series_resistance=model.series_resistance,
    )
    sol = solve_sdp(lift, tol=tol)
    x_lo, x_hi = model.reactance_range(scene.frequency)
    rec = recover_solution(
        sol,
        net,
        scene.receiver_impedance,
        series_resistance=model.series_resistance,
        indeterminate_reactance=0.5 * (x_lo + x_hi),
    )
    bias = [
        varactor.bias_point(model, float(x), scene.frequency) for x in rec.reactances
    ]
    return OptimizationResult(
        scene=scene,
        network=net,
        solution=rec,
        bias_points=bias,
        model=model,
        tx_power=tx_power,
    )


def solution_to_json(result: OptimizationResult) -> dict:
    """Loads/solution document: solver view per port, realizable view per element."""
    rec = result.solution
    ports = []
    for k, x in enumerate(rec.reactances):
        port = k + 3
        i_p = rec.currents[port - 1]
        ports.append(
            {
                "port": port,
                "reactance_ohms": float(x),
                "current_re": float(i_p.real),
                "current_im": float(i_p.imag),
                "passivity_residual": float(rec.passivity_residuals[k]),
            }
        )
    elements = []
    for k, bp in enumerate(result.bias_points):
        elements.append(
            {
                "element": k + 1,
                "reactance_ohms": float(bp.reactance),
                "capacitance_pf": float(bp.capacitance * 1e12),
                "voltage_v": float(bp.voltage),
                "clipped": bool(bp.clipped),
                "clamped": bool(bp.clamped),
            }
        )
    return {
        "pte": float(rec.pte),
        "objective_watts": float(rec.pte * result.tx_power),
        "tightness_ratio": float(rec.tightness_ratio),
        "frequency_hz": float(result.scene.frequency),
        "tx_power_watts": float(result.tx_power),
        "series_resistance_ohms": float(result.model.series_resistance),
        "source_impedance": _complex_to_json(result.scene.source_impedance),
        "receiver_impedance": _complex_to_json(result.scene.receiver_impedance),
        "ports": ports,
        "elements": elements,
    }


def loads_from_solution(doc: dict) -> tuple[LoadSet, np.ndarray]:
    """Rebuild the realizable LoadSet and capacitances from a solution doc."""
    try:
        series = float(doc["series_resistance_ohms"])
        elements = doc["elements"]
        src = _complex_from_json(doc.get("source_impedance", 50.0), "source_impedance")
        rcv = _complex_from_json(doc.get("receiver_impedance", 50.0), "receiver_impedance")
    except KeyError as exc:
        raise ConfigurationError(f"solution document is missing {exc}") from exc
    if not elements:
        raise ConfigurationError("solution document has no elements")
    order = sorted(elements, key=lambda e: int(e["element"]))
    loads = np.array([complex(series, float(e["reactance_ohms"])) for e in order])
    caps = np.array([float(e["capacitance_pf"]) * 1e-12 for e in order])
    return LoadSet(loads, source_impedance=src, receiver_impedance=rcv), caps


def save_solution(result: OptimizationResult, destination) -> None:
    with open(destination, "w") as fh:
        json.dump(solution_to_json(result), fh, indent=2)
        fh.write("\n")


def load_solution(source) -> dict:
    with open(source) as fh:
        return json.load(fh)
