import logging
import math
import os
import sys
from argparse import (
    ArgumentParser,
    Namespace
)
from datetime import (
    datetime,
    timezone
)
from typing import (
    Any,
    Dict,
    List,
    Optional,
    Sequence
)

import numpy as np

from array_ensemble import (
    ArrayGeometry,
    BeamProfile,
    calibrate_peak_rabi,
    ensemble_rabi,
    middle_rows,
    row_rabi_spread
)
from config import (
    SCHEMA_VERSION,
    ExperimentConfig,
    Simulations,
    load_config,
    resolve_out_dir
)
from conversion import (
    ConversionMethod,
    ConversionMethods,
    MethodReport,
    fig2b_curve,
    refine_curve_peak,
    required_beta_for_optimum,
    table_s1,
    write_reports_csv
)
from dispersion import (
    DispersiveElement,
    DispersiveElements,
    alpha_from_gdd,
    catalogue,
    fig1e_dataset,
    reflect,
    write_fig1e_csv
)
from errors import (
    ConfigurationError,
    DegenerateSpectrumError,
    DomainError,
    FitError,
    IntegrationError,
    SingularityError,
    TruncationError
)
from export import (
    write_csv,
    write_json
)
from fitting import (
    FitModels,
    fit_decay
)
from light_shift import (
    Handedness,
    PolarizationVector,
    circular,
    fictitious_field,
    linear,
    transition_class
)
from pulse_sequences import (
    Closers,
    DetuningDistribution,
    DetuningDistributions,
    NoiseModel,
    SequenceKinds,
    SequenceResult,
    build_sequence,
    fidelity_from_decay,
    ramsey_contrast,
    simulate_scan
)
from raman_dynamics import (
    ThreeLevelParams,
    evolve_three_level,
    evolve_tls,
    raman_rabi_frequency,
    scattering_figures,
    trajectory_to_csv
)
from special_functions import default_truncation
from spectrum import (
    SidebandSpectrum,
    am_efficiency,
    phase_modulate
)

logger = logging.getLogger("ramanforge")

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
NUMERIC_ERRORS = (
    DegenerateSpectrumError,
    DomainError,
    FitError,
    IntegrationError,
    SingularityError,
    TruncationError,
)
FIG2B_POINTS = 200
FIG2B_ALPHA = 0.73
AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def _clean(values: Sequence[float]) -> List[float]:
    # + 0.0 turns -0.0 into 0.0
    return [float(round(v, 12)) + 0.0 for v in values]


def _report_row(report: MethodReport) -> Dict[str, Any]:
    return {
        "method": report.method,
        "beta_star": report.beta,
        "T": report.transmission,
        "eta": report.am_efficiency,
        "C": report.coherence,
        "alpha": report.alpha,
    }


def _write_outputs(out_dir: str, label: str, summary: Dict[str, Any], argv: Sequence[str]) -> None:
    write_json(os.path.join(out_dir, f"{label}.json"), {"schema_version": SCHEMA_VERSION, **summary})
    write_json(
        os.path.join(out_dir, f"{label}.meta.json"),
        {
            "schema_version": SCHEMA_VERSION,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "argv": list(argv),
        },
    )


def cmd_table_s1(out_dir: str, beta_max: float, alpha: float, argv: Sequence[str], label: str = "table_s1") -> None:
    reports = table_s1(beta_max=beta_max, alpha=alpha)
    write_reports_csv(os.path.join(out_dir, f"{label}.csv"), reports)
    _write_outputs(out_dir, label, {"beta_max": beta_max, "rows": [_report_row(r) for r in reports]}, argv)

    for r in reports:
        print(f"{r.method}: β* = {r.beta:.3f}, T = {r.transmission:.3f}, η = {r.am_efficiency:.3f}, C = {r.coherence:.3f}")


def cmd_fig1e(out_dir: str, argv: Sequence[str], label: str = "fig1e") -> None:
    rows = fig1e_dataset(catalogue())
    write_fig1e_csv(os.path.join(out_dir, f"{label}.csv"), rows)
    summary = {
        "rows": [
            {
                "label": r.label,
                "gdd_fs2": r.gdd_fs2,
                "alpha_rad": r.alpha,
                "required_beta_rad": r.required_beta,
                "reachable": r.reachable,
            }
            for r in rows
        ]
    }
    _write_outputs(out_dir, label, summary, argv)

    for r in rows:
        print(f"{r.label}: α = {r.alpha:.4g} rad, required β = {r.required_beta:.4g} rad, reachable = {r.reachable}")


def cmd_fig2b(out_dir: str, alpha: float, points: int, argv: Sequence[str], label: str = "fig2b") -> None:
    betas = np.linspace(math.pi / points, math.pi, points)
    rows = fig2b_curve(betas, alpha)
    write_csv(os.path.join(out_dir, f"{label}.csv"), ["beta", "am_efficiency"], rows)

    peak_beta, peak_eta = refine_curve_peak(rows, alpha)
    summary = {
        "alpha": alpha,
        "peak_beta": peak_beta,
        "peak_am_efficiency": peak_eta,
        "required_beta": required_beta_for_optimum(alpha),
    }
    _write_outputs(out_dir, label, summary, argv)
    print(f"peak η = {peak_eta:.3f} at β = {peak_beta:.3f}")


def _element(config: ExperimentConfig) -> Optional[DispersiveElement]:
    if config.method.element is None:
        return None
    return DispersiveElement.create(DispersiveElements(config.method.element), center_offset=config.method.center_offset)


def _method(config: ExperimentConfig) -> ConversionMethod:
    alpha = config.method.alpha_rad
    element = _element(config)
    if element is not None:
        # curvature at the sideband spacing ω_q/k
        mod_frequency = config.spectrum.qubit_frequency / config.method.order
        alpha = alpha_from_gdd(element, mod_frequency, config.method.reflections).alpha
    return ConversionMethod.create(ConversionMethods(config.method.name), alpha=alpha, order=config.method.order)


def _spectrum(config: ExperimentConfig, method: ConversionMethod) -> SidebandSpectrum:
    beta = config.spectrum.beta_rad
    element = _element(config)
    if element is None:
        spec = method.spectrum(beta, config.spectrum.qubit_frequency)
    else:
        mod_frequency = config.spectrum.qubit_frequency / method.order
        spec = reflect(phase_modulate(beta, mod_frequency, default_truncation(beta)), element, config.method.reflections)
    return spec.with_power_scale(config.dynamics.carrier_power_scale)


def _noise(config: ExperimentConfig) -> NoiseModel:
    n = config.noise
    return NoiseModel(
        scatter_prob=n.scatter_prob,
        detuning=DetuningDistribution(
            kind=DetuningDistributions(n.detuning_kind),
            mean=2.0 * math.pi * n.detuning_mean_hz,
            sigma=2.0 * math.pi * n.detuning_sigma_hz,
        ),
        amplitude_error=n.amplitude_error,
        idle_t1=math.inf if n.idle_t1_s is None else n.idle_t1_s,
        seed=config.seed,
    )


def run_rabi(config: ExperimentConfig, out_dir: str) -> Dict[str, Any]:
    method = _method(config)
    spec = _spectrum(config, method)
    params = ThreeLevelParams(
        qubit_frequency=config.spectrum.qubit_frequency,
        detuning=config.dynamics.detuning,
        spectrum=spec,
        linewidth=config.dynamics.linewidth,
        order=method.order,
    )

    times = np.linspace(0.0, config.dynamics.duration_s, config.dynamics.samples)
    evolve = evolve_tls if config.dynamics.model == "tls" else evolve_three_level
    trajectory = evolve(params, config.dynamics.duration_s, times=times)
    trajectory_to_csv(trajectory, os.path.join(out_dir, f"{config.label}.csv"))

    predicted = raman_rabi_frequency(params)
    fitted = fit_decay(trajectory.times, trajectory.p1, FitModels.DAMPED_COSINE)
    gamma_sc, pulses = scattering_figures(params) if params.linewidth > 0.0 else (None, None)
    print(f"predicted Rabi: {predicted / (2.0 * math.pi):.6g} Hz, fitted: {abs(fitted.params['omega']) / (2.0 * math.pi):.6g} Hz")
    return {
        "method": str(method),
        "beta_rad": config.spectrum.beta_rad,
        "alpha_rad": method.alpha,
        "model": config.dynamics.model,
        "transmission": spec.total_power,
        "am_efficiency": am_efficiency(spec, method.order),
        "predicted_rabi_hz": predicted / (2.0 * math.pi),
        "fitted_rabi_hz": abs(fitted.params["omega"]) / (2.0 * math.pi),
        "scattering_rate": gamma_sc,
        "pi_pulses_per_scatter": pulses,
        "norm_drift": trajectory.norm_drift,
    }


def _sequence_summary(result: SequenceResult, out_dir: str, label: str) -> Dict[str, Any]:
    result.write_csv(os.path.join(out_dir, f"{label}.csv"))
    summary = result.summary()
    summary["label"] = label
    if result.fitted is not None:
        print(f"{result.fit_model.value} fit: 1/e = {result.fitted.one_over_e_time:.6g}")
    return summary


def run_ramsey(config: ExperimentConfig, out_dir: str, num_workers: int) -> Dict[str, Any]:
    result = ramsey_contrast(
        _noise(config),
        config.sequence.gaps_s,
        config.sequence.shots,
        pi_time=config.sequence.pi_time_s,
        num_workers=num_workers,
        label=config.label,
    )
    return _sequence_summary(result, out_dir, config.label)


def run_echo(config: ExperimentConfig, out_dir: str, num_workers: int, kind: SequenceKinds) -> Dict[str, Any]:
    s = config.sequence
    sequences = [
        build_sequence(kind, s.pi_time_s, n=n, gap=s.gap_s, closer=Closers(s.closer))
        for n in s.counts
    ]
    scan_values = [seq.n_pi_pulses for seq in sequences]
    noise = _noise(config)
    decays = noise.scatter_prob > 0.0 or math.isfinite(noise.idle_t1)
    fit_model = FitModels.EXPONENTIAL if decays and len(sequences) >= 5 else None

    result = simulate_scan(sequences, scan_values, noise, s.shots, fit_model, num_workers, label=config.label)
    summary = _sequence_summary(result, out_dir, config.label)
    if result.fitted is not None and result.fitted.one_over_e_time > 0.0:
        summary["pi_pulse_fidelity"] = fidelity_from_decay(result.fitted.one_over_e_time)
    return summary


def run_ensemble(config: ExperimentConfig, out_dir: str) -> Dict[str, Any]:
    a = config.array
    geom = ArrayGeometry.from_extent(a.rows, a.cols, a.extent_x_m, a.extent_y_m, a.fill_probability)
    rows = a.selected_rows if a.selected_rows is not None else middle_rows(geom)
    beam = calibrate_peak_rabi(geom, BeamProfile(a.waist_minor_m, a.waist_major_m, 1.0), a.rabi, rows)
    mean, spread = row_rabi_spread(geom, beam, rows)

    result = ensemble_rabi(
        geom,
        beam,
        a.duration_s,
        rows=rows,
        samples=a.samples,
        power_noise=a.power_noise,
        seed=config.seed,
    )
    result.write_csv(os.path.join(out_dir, f"{config.label}.csv"))
    fitted_hz = abs(result.fitted.params["omega"]) / (2.0 * math.pi)
    print(f"ensemble Rabi: {fitted_hz:.6g} Hz, row spread {100.0 * spread:.2f}%")
    return {
        "rows": list(rows),
        "peak_rabi_hz": beam.peak_rabi / (2.0 * math.pi),
        "mean_rabi_hz": mean / (2.0 * math.pi),
        "row_spread": spread,
        "fitted_rabi_hz": fitted_hz,
        "fitted_gamma": result.fitted.params["gamma"],
        "atoms": len(result.per_atom_rabi),
    }


def _polarization(name: str) -> PolarizationVector:
    parts = name.split("_")
    axis = AXES[parts[1]]
    if parts[0] == "linear":
        return linear(axis)
    handedness = Handedness.RIGHT if len(parts) > 2 and parts[2] == "right" else Handedness.LEFT
    return circular(axis, handedness)


def run_lightshift(config: ExperimentConfig, out_dir: str) -> Dict[str, Any]:
    ls = config.light_shift
    field = fictitious_field(_polarization(ls.polarization), ls.intensity, ls.laser_frequency, ls.d1, ls.d2)
    kind = transition_class(field, ls.quantization_axis)
    direction = _clean(field.direction)
    write_csv(
        os.path.join(out_dir, f"{config.label}.csv"),
        ["direction_x", "direction_y", "direction_z", "magnitude_scale", "detuning_factor", "class"],
        [direction + [field.magnitude_scale, field.detuning_factor, kind.value]],
    )
    print(f"fictitious field along {direction}: {kind.value} transitions")
    return {
        "polarization": ls.polarization,
        "direction": direction,
        "magnitude_scale": field.magnitude_scale,
        "detuning_factor": field.detuning_factor,
        "class": kind.value,
    }


def cmd_run(config: ExperimentConfig, out_dir: str, num_workers: int, argv: Sequence[str]) -> None:
    simulation = Simulations(config.simulation)
    logger.info(f"running `{simulation.value}` as `{config.label}`")

    if simulation is Simulations.RABI:
        summary = run_rabi(config, out_dir)
    elif simulation is Simulations.RAMSEY:
        summary = run_ramsey(config, out_dir, num_workers)
    elif simulation is Simulations.CPMG:
        summary = run_echo(config, out_dir, num_workers, SequenceKinds.CPMG)
    elif simulation is Simulations.XY16:
        summary = run_echo(config, out_dir, num_workers, SequenceKinds.XY16)
    elif simulation is Simulations.ENSEMBLE:
        summary = run_ensemble(config, out_dir)
    elif simulation is Simulations.FIG1E:
        cmd_fig1e(out_dir, argv, label=config.label)
        return
    elif simulation is Simulations.LIGHTSHIFT:
        summary = run_lightshift(config, out_dir)
    else:
        raise ValueError(f"Cannot run simulation of type `{simulation}`")

    summary = {"simulation": simulation.value, "label": config.label, "seed": config.seed, **summary}
    _write_outputs(out_dir, config.label, summary, argv)


def _parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out-dir", type=str, default=None)
    common.add_argument("--shots", type=int, default=None)
    common.add_argument("--num-workers", type=int, default=1)
    common.add_argument("--log-level", type=str, default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = ArgumentParser(prog="ramanforge")
    commands = parser.add_subparsers(dest="command", required=True)

    table = commands.add_parser("table-s1", parents=[common])
    table.add_argument("--beta-max", type=float, default=2.0 * math.pi)
    table.add_argument("--alpha", type=float, default=0.76)

    commands.add_parser("fig1e", parents=[common])

    fig2b = commands.add_parser("fig2b", parents=[common])
    fig2b.add_argument("--alpha", type=float, default=FIG2B_ALPHA)
    fig2b.add_argument("--points", type=int, default=FIG2B_POINTS)

    run = commands.add_parser("run", parents=[common])
    run.add_argument("config")
    return parser


def _dispatch(args: Namespace, argv: Sequence[str]) -> None:
    if args.command == "run":
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.shots is not None:
            if args.shots < 1:
                raise ConfigurationError(f"must be >= 1, got {args.shots}", "--shots")
            config.sequence.shots = args.shots
        cmd_run(config, resolve_out_dir(args.out_dir, config), args.num_workers, argv)
        return

    out_dir = resolve_out_dir(args.out_dir)
    if args.command == "table-s1":
        cmd_table_s1(out_dir, args.beta_max, args.alpha, argv)
    elif args.command == "fig1e":
        cmd_fig1e(out_dir, argv)
    elif args.command == "fig2b":
        if args.points < 2:
            raise ConfigurationError(f"must be >= 2, got {args.points}", "--points")
        cmd_fig2b(out_dir, args.alpha, args.points, argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        _dispatch(args, argv)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except NUMERIC_ERRORS as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
