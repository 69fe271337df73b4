"""Command-line front end for the design loop.

Subcommands mirror the pipeline stages: model (impedance matrix), optimize
(loads from the relaxation), sweep (BRCS vs angle), sensitivity (BRCS vs one
capacitance), oracle (brute-force grid search), timegate (gated spectra) and
montecarlo (device tolerance spread). Every run writes a manifest next to
its primary output; --plot additionally renders a figure beside the CSVs.

Exit codes: 0 ok, 2 configuration error, 3 relaxation not tight,
4 infeasible problem, 5 refused complexity.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

__version__ = "0.1.0"

EXIT_CONFIG = 2
EXIT_NOT_TIGHT = 3
EXIT_INFEASIBLE = 4
EXIT_COMPLEXITY = 5


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _range_spec(text):
    """start:stop:step triple (floats)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got '{text}'")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad range '{text}'")
    return start, stop, step


def _count_spec(text):
    """start:stop:count triple (floats, integer count)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got '{text}'")
    start, stop = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid '{text}'")
    return start, stop, count


def _expand_range(spec):
    import numpy as np

    start, stop, step = spec
    n = int(round((stop - start) / step)) + 1
    values = start + step * np.arange(n)
    return values[values <= stop + 1e-9 * max(1.0, abs(stop))]


def _load_scene(path):
    from .dipoles import SceneConfig, load_scene

    if path is None:
        return SceneConfig()
    return load_scene(path)


def _write_manifest(out_path: Path, command: str, config: dict, inputs, outputs, t0):
    manifest = {
        "command": command,
        "tool_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "wall_time_s": round(time.monotonic() - t0, 6),
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }
    path = out_path.with_name(out_path.stem + "_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


# --- subcommand handlers ------------------------------------------------------


def _cmd_model(args):
    import numpy as np

    from .dipoles import build_scene_matrix, save_matrix, zero_los

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    net = build_scene_matrix(scene)
    if args.zero_los:
        net = zero_los(net)
    out = Path(args.out)
    save_matrix(net, out)
    cond = float(np.linalg.cond(net.z))
    print(f"elements: {net.n_elements}  ports: {net.n_ports}")
    print(f"condition estimate: {cond:.4g}")
    print(f"wrote {out}")
    _write_manifest(
        out,
        "model",
        {"scene": args.scene, "zero_los": args.zero_los},
        [p for p in [args.scene] if p],
        [out],
        t0,
    )
    return 0


def _cmd_optimize(args):
    from .dipoles import load_matrix
    from .pipeline import optimize_scene, save_solution
    from .varactor import SMV2201_040LF

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    net = load_matrix(args.zmat) if args.zmat else None
    result = optimize_scene(
        scene,
        tol=args.tol,
        model=SMV2201_040LF,
        tx_power=args.tx_power,
        nlos=not args.keep_los,
        net=net,
    )
    out = Path(args.out)
    save_solution(result, out)
    rec = result.solution
    print(f"pte: {rec.pte:.6e}")
    print(f"tightness ratio: {rec.tightness_ratio:.3e}")
    print(f"clipped elements: {result.n_clipped}/{len(result.bias_points)}")
    print(f"wrote {out}")
    _write_manifest(
        out,
        "optimize",
        {
            "scene": args.scene,
            "zmat": args.zmat,
            "tol": args.tol,
            "tx_power": args.tx_power,
            "keep_los": args.keep_los,
        },
        [p for p in [args.scene, args.zmat] if p],
        [out],
        t0,
    )
    return 0


def _cmd_sweep(args):
    from .evaluation import angle_sweep, write_sweep_csv
    from .pipeline import load_solution, loads_from_solution

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    loads, _ = loads_from_solution(load_solution(args.loads))
    beta = args.beta if args.beta is not None else scene.tx_angle_beta
    alphas = _expand_range(args.alpha)
    result = angle_sweep(
        scene, loads, beta, alphas, nlos=not args.keep_los, with_plate=args.plate
    )
    out = Path(args.out)
    write_sweep_csv(result, out)
    outputs = [out]
    if args.plot:
        from .plots import save_sweep_figure

        fig_path = out.with_suffix(".png")
        save_sweep_figure(result, fig_path)
        outputs.append(fig_path)
    print(f"swept {alphas.size} angles at beta = {beta:g} deg")
    print(f"wrote {', '.join(str(p) for p in outputs)}")
    _write_manifest(
        out,
        "sweep",
        {
            "scene": args.scene,
            "loads": args.loads,
            "beta": beta,
            "alpha": list(args.alpha),
            "plate": args.plate,
            "keep_los": args.keep_los,
        },
        [p for p in [args.scene, args.loads] if p],
        outputs,
        t0,
    )
    return 0


def _cmd_sensitivity(args):
    import numpy as np

    from .evaluation import sensitivity_sweep, write_sensitivity_csv
    from .pipeline import load_solution, loads_from_solution

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    doc = load_solution(args.loads)
    loads, caps = loads_from_solution(doc)
    start, stop, step = args.grid
    grid = _expand_range(args.grid) * 1e-12
    rows = sensitivity_sweep(
        scene, loads, args.element, grid, nlos=not args.keep_los
    )
    out = Path(args.out)
    write_sensitivity_csv(rows, out)
    outputs = [out]
    if args.plot:
        from .plots import save_sensitivity_figure

        fig_path = out.with_suffix(".png")
        save_sensitivity_figure(
            rows, fig_path, c_opt=caps[args.element - 1], element=args.element
        )
        outputs.append(fig_path)
    best = rows[int(np.argmax(rows[:, 1]))]
    print(
        f"element {args.element}: argmax at {best[0] * 1e12:.4g} pF "
        f"({best[1]:.2f} dB), nominal {caps[args.element - 1] * 1e12:.4g} pF"
    )
    print(f"wrote {', '.join(str(p) for p in outputs)}")
    _write_manifest(
        out,
        "sensitivity",
        {
            "scene": args.scene,
            "loads": args.loads,
            "element": args.element,
            "grid_pf": [start, stop, step],
            "keep_los": args.keep_los,
        },
        [p for p in [args.scene, args.loads] if p],
        outputs,
        t0,
    )
    return 0


def _cmd_oracle(args):
    import numpy as np

    from .dipoles import load_matrix
    from .sdr import brute_force_pte

    t0 = time.monotonic()
    net = load_matrix(args.zmat)
    start, stop, count = args.grid
    grid = np.linspace(start, stop, count)
    x_best, pte_best = brute_force_pte(
        net,
        grid,
        receiver_impedance=args.receiver_r,
        source_impedance=args.source_r,
        series_resistance=args.series_r,
    )
    out = Path(args.out)
    with open(out, "w") as fh:
        json.dump(
            {
                "pte_best": pte_best,
                "x_best_ohms": [float(x) for x in x_best],
                "grid": {"start": start, "stop": stop, "count": count},
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(f"grid {count}^{net.n_elements}: best pte {pte_best:.6e}")
    print(f"best reactances (ohm): {np.round(x_best, 3).tolist()}")
    print(f"wrote {out}")
    _write_manifest(
        out,
        "oracle",
        {
            "zmat": args.zmat,
            "grid": [start, stop, count],
            "receiver_r": args.receiver_r,
            "source_r": args.source_r,
            "series_r": args.series_r,
        },
        [args.zmat],
        [out],
        t0,
    )
    return 0


def _cmd_timegate(args):
    import math

    import numpy as np

    from .pipeline import load_solution, loads_from_solution
    from .timegate import (
        GateConfig,
        apply_gate,
        auto_gate,
        gated_center_value,
        synthesize_response,
        to_frequency,
        to_time,
        write_response_csv,
        write_time_csv,
    )

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    loads, _ = loads_from_solution(load_solution(args.loads))
    band = tuple(args.band)
    include_los = not args.no_los
    ungated = synthesize_response(scene, loads, band, include_los=include_los)
    ris_only = (
        synthesize_response(scene, loads, band, include_los=False)
        if include_los
        else ungated
    )
    if args.gate_start is not None:
        gate = GateConfig(start=args.gate_start * 1e-9, width=args.gate_width * 1e-9)
    else:
        gate = auto_gate(scene)
    trace = to_time(ungated, args.pad)
    gated_trace = apply_gate(trace, gate)
    gated = to_frequency(gated_trace, ungated.f_start, ungated.f_stop)

    prefix = Path(args.out)
    paths = {
        "ungated": prefix.with_name(prefix.name + "_ungated.csv"),
        "gated": prefix.with_name(prefix.name + "_gated.csv"),
        "time": prefix.with_name(prefix.name + "_time.csv"),
    }
    write_response_csv(ungated, paths["ungated"])
    write_response_csv(gated, paths["gated"])
    write_time_csv(trace, paths["time"])
    outputs = list(paths.values())

    ic = ungated.center_index
    center = gated_center_value(ungated, gate, args.pad)
    target = ris_only.values[ic]
    if include_los:
        from .timegate import FrequencyResponse

        # raw (uncompensated) leakage of the non-surface content through the gate
        diff = FrequencyResponse(
            ungated.f_start, ungated.f_stop, ungated.values - ris_only.values
        )
        leaked = to_frequency(
            apply_gate(to_time(diff, args.pad), gate), diff.f_start, diff.f_stop
        ).values[ic]
        if abs(leaked) > 0 and abs(diff.values[ic]) > 0:
            suppression = 20 * math.log10(abs(diff.values[ic]) / abs(leaked))
            print(f"direct-path content suppressed by {suppression:.1f} dB at band center")
    if abs(target) > 0:
        fidelity = 20 * math.log10(abs(center) / abs(target))
        print(f"gated vs surface-only response at band center: {fidelity:+.3f} dB")
    print(f"gate: {gate.start * 1e9:.2f} ns + {gate.width * 1e9:.2f} ns wide")
    if args.plot:
        from .plots import save_timegate_figure

        fig_path = prefix.with_name(prefix.name + "_timegate.png")
        save_timegate_figure(ungated, gated, trace, gate, fig_path)
        outputs.append(fig_path)
    print(f"wrote {', '.join(str(p) for p in outputs)}")
    _write_manifest(
        paths["ungated"],
        "timegate",
        {
            "scene": args.scene,
            "loads": args.loads,
            "band": list(band),
            "pad": args.pad,
            "no_los": args.no_los,
            "gate_start_ns": args.gate_start,
            "gate_width_ns": args.gate_width,
        },
        [p for p in [args.scene, args.loads] if p],
        outputs,
        t0,
    )
    return 0


def _cmd_montecarlo(args):
    from .evaluation import tolerance_monte_carlo, write_montecarlo_csv
    from .pipeline import load_solution, loads_from_solution

    t0 = time.monotonic()
    scene = _load_scene(args.scene)
    loads, _ = loads_from_solution(load_solution(args.loads))
    result = tolerance_monte_carlo(
        scene, loads, trials=args.trials, seed=args.seed, nlos=not args.keep_los
    )
    out = Path(args.out)
    write_montecarlo_csv(result, out)
    outputs = [out]
    if args.plot:
        from .plots import save_montecarlo_figure

        fig_path = out.with_suffix(".png")
        save_montecarlo_figure(result, fig_path)
        outputs.append(fig_path)
    print(
        f"{args.trials} trials: mean {result.mean:.2f} dB, "
        f"p5 {result.p5:.2f} dB, p95 {result.p95:.2f} dB"
    )
    print(f"wrote {', '.join(str(p) for p in outputs)}")
    _write_manifest(
        out,
        "montecarlo",
        {
            "scene": args.scene,
            "loads": args.loads,
            "trials": args.trials,
            "seed": args.seed,
            "keep_los": args.keep_los,
        },
        [p for p in [args.scene, args.loads] if p],
        outputs,
        t0,
    )
    return 0


# --- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risopt",
        description="Surface design loop: impedance model, load optimization, "
        "verification sweeps and time gating.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads",
        type=_positive_int,
        default=None,
        help="cap the worker/BLAS thread count for this run",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="build and save the scene impedance matrix")
    p.add_argument("scene", nargs="?", help="scene JSON (omit for the default scene)")
    p.add_argument("--zero-los", action="store_true", help="zero the direct Tx-Rx entries")
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("optimize", help="solve the relaxation and emit loads JSON")
    p.add_argument("scene", nargs="?", help="scene JSON (omit for the default scene)")
    p.add_argument("--zmat", help="use a saved impedance matrix instead of rebuilding")
    p.add_argument("--out", required=True, help="output loads/solution JSON")
    p.add_argument("--tol", type=float, default=1e-8, help="solver tolerance (default 1e-8)")
    p.add_argument("--tx-power", type=float, default=1.0, help="transmit power in W")
    p.add_argument(
        "--keep-los", action="store_true", help="keep the direct path in the model"
    )
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", help="BRCS versus receiver angle for fixed loads")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("loads", help="loads JSON from optimize")
    p.add_argument("--beta", type=float, default=None, help="transmitter angle (deg)")
    p.add_argument(
        "--alpha", type=_range_spec, required=True, help="receiver angles start:stop:step (deg)"
    )
    p.add_argument("--plate", action="store_true", help="add the plate baseline column")
    p.add_argument("--keep-los", action="store_true")
    p.add_argument("--out", required=True, help="output sweep CSV")
    p.add_argument("--plot", action="store_true", help="render a PNG beside the CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("sensitivity", help="BRCS versus one element's capacitance")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("loads", help="loads JSON from optimize")
    p.add_argument("--element", type=_positive_int, required=True, help="element index (1-based)")
    p.add_argument(
        "--grid",
        type=_range_spec,
        default=(0.23, 2.1, 0.01),
        help="capacitance grid start:stop:step in pF (default 0.23:2.1:0.01)",
    )
    p.add_argument("--keep-los", action="store_true")
    p.add_argument("--out", required=True, help="output curve CSV")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("oracle", help="brute-force grid search over load reactances")
    p.add_argument("--zmat", required=True, help="impedance matrix CSV")
    p.add_argument(
        "--grid",
        type=_count_spec,
        default=(-300.0, -10.0, 64),
        help="reactance grid start:stop:count in ohm (default -300:-10:64)",
    )
    p.add_argument("--receiver-r", type=float, default=50.0, help="receiver impedance (ohm)")
    p.add_argument("--source-r", type=float, default=50.0, help="source impedance (ohm)")
    p.add_argument("--series-r", type=float, default=0.0, help="series loss per load (ohm)")
    p.add_argument("--out", required=True, help="output JSON")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("timegate", help="synthesize, gate and dump the band response")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("loads", help="loads JSON from optimize")
    p.add_argument(
        "--band",
        type=_count_spec,
        default=(2.05e9, 5.05e9, 601),
        help="band start:stop:points in Hz (default 2.05e9:5.05e9:601)",
    )
    p.add_argument("--pad", type=_positive_int, default=8, help="zero-padding factor")
    p.add_argument("--no-los", action="store_true", help="synthesize without the direct path")
    p.add_argument("--gate-start", type=float, default=None, help="gate start (ns); default auto")
    p.add_argument("--gate-width", type=float, default=10.0, help="gate width (ns)")
    p.add_argument("--out", required=True, help="output prefix for the three CSVs")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=_cmd_timegate)

    p = sub.add_parser("montecarlo", help="BRCS spread under device tolerances")
    p.add_argument("scene", help="scene JSON")
    p.add_argument("loads", help="loads JSON from optimize")
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--keep-los", action="store_true")
    p.add_argument("--out", required=True, help="output samples CSV")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=_cmd_montecarlo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from .errors import (
        ComplexityError,
        InfeasibleProblemError,
        NotTightError,
        RisoptError,
    )

    try:
        return args.func(args)
    except NotTightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_TIGHT
    except InfeasibleProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ComplexityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPLEXITY
    except (RisoptError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
