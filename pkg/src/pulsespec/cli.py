"""Batch front-end: configure a run, execute the pipeline, write results.

Configuration comes from command-line flags, optionally layered on top of a
plain ``key=value`` file (``#`` comments allowed); flags win. Results go to
a CSV (one row per frequency) with a ``<output>.meta`` sidecar recording
every resolved parameter, and optionally a gnuplot script.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from .core import PulseAxis, PulseSchedule, SimParams, SpectrumResult, default_omega_grid
from .correlations import accumulate_kernel
from .sequences import no_drive_schedule, periodic_schedule, uhrig_schedule
from .spectra import detuning_average, emission_sum_rule, spectrum_from_kernel

PROTOCOLS = ("none", "px", "pxpy", "pz", "uhrig")
OBSERVABLES = ("emission", "absorption", "both")
_PERIODIC = {"px": [PulseAxis.X], "pxpy": [PulseAxis.X, PulseAxis.Y],
             "pz": [PulseAxis.Z]}
CSV_HEADER = "omega,emission,direct_absorption,net_absorption"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    protocol: str
    output_path: str
    delta: float = 0.0
    gamma: float = 2.0
    n_pulses: int | None = None
    tau: float | None = None
    t_end: float | None = None
    dt: float = 1e-3
    omega_min: float = -40.0
    omega_max: float = 40.0
    omega_step: float = 0.025
    observable: str = "both"
    average_deltas: list[tuple[float, float]] | None = None
    plot_script: str | None = None

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(
                f"protocol: must be one of {'/'.join(PROTOCOLS)}, got {self.protocol!r}"
            )
        periodic = self.protocol in _PERIODIC
        if periodic and self.tau is None:
            raise ConfigError(f"tau: required for protocol {self.protocol!r}")
        if not periodic and self.tau is not None:
            raise ConfigError(f"tau: not applicable to protocol {self.protocol!r}")
        if not periodic and self.t_end is None:
            raise ConfigError(f"t_end: required for protocol {self.protocol!r}")
        if periodic and self.t_end is not None:
            raise ConfigError(
                f"t_end: derived as n_pulses*tau for protocol {self.protocol!r}, "
                f"do not set it"
            )
        if self.protocol != "none" and self.n_pulses is None:
            raise ConfigError(f"n_pulses: required for protocol {self.protocol!r}")
        if self.protocol == "none" and self.n_pulses is not None:
            raise ConfigError("n_pulses: not applicable to protocol 'none'")
        if self.observable not in OBSERVABLES:
            raise ConfigError(
                f"observable: must be one of {'/'.join(OBSERVABLES)}, "
                f"got {self.observable!r}"
            )
        if not self.output_path:
            raise ConfigError("output: required")
        if self.average_deltas is not None:
            weights = [w for _, w in self.average_deltas]
            if any(w < 0 for w in weights):
                raise ConfigError("average_deltas: weights must be nonnegative")
            if abs(sum(weights) - 1.0) > 1e-12:
                raise ConfigError(
                    f"average_deltas: weights must sum to 1, got {sum(weights)}"
                )

    def build_schedule(self) -> PulseSchedule:
        if self.protocol == "none":
            return no_drive_schedule(self.t_end)
        if self.protocol == "uhrig":
            return uhrig_schedule(self.n_pulses, self.t_end)
        return periodic_schedule(_PERIODIC[self.protocol], self.tau, self.n_pulses)

    def build_params(self) -> SimParams:
        schedule_end = (self.n_pulses * self.tau
                        if self.protocol in _PERIODIC else self.t_end)
        return SimParams(
            delta=self.delta,
            gamma=self.gamma,
            t_end=schedule_end,
            dt=self.dt,
            omega_grid=default_omega_grid(self.omega_min, self.omega_max,
                                          self.omega_step),
        )


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad flags; surface them as ConfigError
    # instead so the caller controls the exit code.
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="pulsespec", add_help=True, description=__doc__)
    p.add_argument("--config", metavar="FILE", help="key=value configuration file")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--n-pulses", type=int, dest="n_pulses")
    p.add_argument("--tau", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--dt", type=float)
    p.add_argument("--omega-min", type=float, dest="omega_min")
    p.add_argument("--omega-max", type=float, dest="omega_max")
    p.add_argument("--omega-step", type=float, dest="omega_step")
    p.add_argument("--observable", choices=OBSERVABLES)
    p.add_argument("--output", "-o", dest="output_path", metavar="CSV")
    p.add_argument("--average-deltas", dest="average_deltas", metavar="D:W,D:W,...",
                   help="detuning:weight pairs for ensemble averaging")
    p.add_argument("--plot-script", dest="plot_script", metavar="FILE",
                   help="also write a gnuplot script referencing the CSV")
    return p


def _parse_average(text: str) -> list[tuple[float, float]]:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            d, w = item.split(":")
            pairs.append((float(d), float(w)))
        except ValueError:
            raise ConfigError(
                f"average_deltas: expected delta:weight pairs, got {item!r}"
            ) from None
    if not pairs:
        raise ConfigError("average_deltas: no pairs given")
    return pairs


_FILE_PARSERS = {
    "protocol": str,
    "delta": float,
    "gamma": float,
    "n_pulses": int,
    "tau": float,
    "t_end": float,
    "dt": float,
    "omega_min": float,
    "omega_max": float,
    "omega_step": float,
    "observable": str,
    "output": str,
    "average_deltas": str,
    "plot_script": str,
}


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _FILE_PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _FILE_PARSERS[key](value)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: {key}: cannot parse {value!r}"
                ) from None
    return values


def parse_config(args: list[str], config_file: str | None = None) -> RunConfig:
    """Resolve a RunConfig from flags layered over an optional config file."""
    ns = _build_parser().parse_args(args)
    file_values = {}
    path = ns.config or config_file
    if path:
        file_values = _read_config_file(path)
    if "output" in file_values:
        file_values["output_path"] = file_values.pop("output")

    merged = dict(file_values)
    for key in ("protocol", "delta", "gamma", "n_pulses", "tau", "t_end", "dt",
                "omega_min", "omega_max", "omega_step", "observable",
                "output_path", "average_deltas", "plot_script"):
        flag = getattr(ns, key)
        if flag is not None:
            merged[key] = flag

    if "protocol" not in merged:
        raise ConfigError("protocol: required")
    if "output_path" not in merged:
        raise ConfigError("output: required")
    if isinstance(merged.get("average_deltas"), str):
        merged["average_deltas"] = _parse_average(merged["average_deltas"])

    defaults = RunConfig(protocol=merged["protocol"],
                         output_path=merged["output_path"])
    for key, value in merged.items():
        setattr(defaults, key, value)
    defaults.validate()
    return defaults


def _write_csv(path: str, spec: SpectrumResult) -> None:
    rows = zip(spec.omega, spec.emission, spec.direct_absorption,
               spec.net_absorption)
    with open(path, "w", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for o, p, pp, q in rows:
            f.write(f"{o:.11e},{p:.11e},{pp:.11e},{q:.11e}\n")


def _write_metadata(path: str, config: RunConfig, spec: SpectrumResult,
                    sum_rule: tuple[float, float] | None) -> None:
    lines = [
        f"protocol={config.protocol}",
        f"delta={config.delta:.17g}",
        f"gamma={config.gamma:.17g}",
        f"n_pulses={'' if config.n_pulses is None else config.n_pulses}",
        f"tau={'' if config.tau is None else format(config.tau, '.17g')}",
        f"t_end={spec.params.t_end:.17g}",
        f"dt={config.dt:.17g}",
        f"omega_min={config.omega_min:.17g}",
        f"omega_max={config.omega_max:.17g}",
        f"omega_step={config.omega_step:.17g}",
        f"observable={config.observable}",
        f"average_deltas={'' if config.average_deltas is None else ','.join(f'{d:.17g}:{w:.17g}' for d, w in config.average_deltas)}",
        f"schedule_digest={spec.schedule_digest}",
    ]
    if sum_rule is not None:
        lines.append(f"sum_rule_lhs={sum_rule[0]:.17g}")
        lines.append(f"sum_rule_rhs={sum_rule[1]:.17g}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


_PLOT_COLUMNS = {
    "emission": [("emission", 2)],
    "absorption": [("net absorption", 4)],
    "both": [("emission", 2), ("net absorption", 4)],
}


def _write_plot_script(path: str, csv_path: str, observable: str) -> None:
    curves = ", ".join(
        f"'{csv_path}' using 1:{col} with lines title '{label}'"
        for label, col in _PLOT_COLUMNS[observable]
    )
    body = (
        "set datafile separator ','\n"
        "set xlabel 'omega'\n"
        "set ylabel 'spectrum (arb. units)'\n"
        "set key top right\n"
        f"plot {curves}\n"
    )
    with open(path, "w", newline="\n") as f:
        f.write(body)


def run(config: RunConfig) -> SpectrumResult:
    """Execute the configured pipeline and write the output files."""
    config.validate()
    schedule = config.build_schedule()
    params = config.build_params()

    if config.average_deltas is not None:
        deltas = np.array([d for d, _ in config.average_deltas])
        weights = np.array([w for _, w in config.average_deltas])
        spec = detuning_average(schedule, params, deltas, weights)
        sum_rule = None
    else:
        kernel = accumulate_kernel(schedule, params)
        spec = spectrum_from_kernel(kernel, params.omega_grid)
        try:
            sum_rule = emission_sum_rule(spec, kernel)
        except ValueError:
            sum_rule = None  # grid outside the sum rule's validity
        if sum_rule is not None and sum_rule[1] != 0.0:
            deviation = abs(sum_rule[0] / sum_rule[1] - 1.0)
            if deviation > 0.10:
                print(
                    f"warning: emission sum rule off by {deviation:.1%} "
                    f"(lhs={sum_rule[0]:.6g}, rhs={sum_rule[1]:.6g})",
                    file=sys.stderr,
                )

    _write_csv(config.output_path, spec)
    _write_metadata(config.output_path + ".meta", config, spec, sum_rule)
    if config.plot_script:
        _write_plot_script(config.plot_script, config.output_path,
                           config.observable)
    return spec


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        run(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_entry() -> None:
    raise SystemExit(main())
