"""Command-line front end: ``bjjmz <subcommand> [flags]``.

Settings resolve as flag > ``--config`` file > built-in default, into one
:class:`RunConfig` that is written as the first line of every CSV.  Exit
codes are 0 on success, 2 on usage or validation errors and 1 when a
numerical routine fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import csvio
from .errors import ConvergenceError
from .evolution import DEFAULT_DT, DEFAULT_SAMPLE_EVERY
from .hamiltonian import JunctionParams
from .metrology import noon_max_fidelity, phase_estimate, sample_measurement
from .protocol import (ProtocolConfig, delta_scan, detect, interfere, phase_imprint, readout,
                       recombine, split, split_trajectory)
from .spectral import gap_scan
from .spin import SpinBasis, dump_state, load_state

TWO_PI = 2 * math.pi


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (endpoints included), ``start:stop:step`` or one number.

    An integer third field is a point count; a field with a decimal point or
    exponent is a step.  A comma list of numbers is also accepted.
    """
    text = (text or "").strip()
    if not text:
        raise UsageError("empty grid")
    try:
        if ":" not in text:
            pts = [float(x) for x in text.split(",")]
        else:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"grid {text!r} must be start:stop:count")
            a, b = float(parts[0]), float(parts[1])
            third = parts[2].strip()
            if third.lstrip("+").isdigit():
                n = int(third)
                if n < 1:
                    raise UsageError(f"grid count must be positive in {text!r}")
                if n == 1:
                    pts = [a]
                else:
                    pts = list(np.linspace(a, b, n))
            else:
                step = float(third)
                if step == 0 or (b - a) * step < 0:
                    raise UsageError(f"grid step {step} does not move from {a} to {b}")
                n = int(math.floor((b - a) / step + 1e-9)) + 1
                pts = [a + i * step for i in range(n)]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"malformed grid {text!r}: {exc}") from exc
    if not all(math.isfinite(p) for p in pts):
        raise UsageError(f"grid {text!r} has non-finite points")
    return [float(p) for p in pts]


@dataclass(frozen=True)
class RunConfig:
    n_particles: int = 20
    charging: float = -2.0
    coupling_max: float = 40.0
    ramp_duration: float = 40.0
    delta: float = 0.0
    delta_detect: float | None = None
    detect_delta_ramp: float = 0.0
    t_final_coupling: float = 0.0
    dt: float = DEFAULT_DT
    sample_every: int = DEFAULT_SAMPLE_EVERY
    allow_weak_coupling: bool = False
    t_grid: str = "0:40:81"
    levels: int = 2
    phi_grid: str = "0:6.283185307179586:33"
    delta_grid: str = "-0.03:0.03:31"
    phi: float = 0.0
    shots: int | None = None
    seed: int = 0
    threads: int | None = None

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(
            n_particles=self.n_particles, charging=self.charging,
            coupling_max=self.coupling_max, ramp_duration=self.ramp_duration,
            delta_split=self.delta, delta_detect=self.delta_detect, dt=self.dt,
            sample_every=self.sample_every, t_final_coupling=self.t_final_coupling,
            detect_delta_ramp=self.detect_delta_ramp,
            allow_weak_coupling=self.allow_weak_coupling,
        )

    def as_dict(self, command: str) -> dict:
        d = dataclasses.asdict(self)
        d.pop("threads")
        d["command"] = command
        return d


# flag dest -> RunConfig field
FLAG_FIELDS = {
    "n": "n_particles", "ec": "charging", "tmax": "coupling_max",
    "duration": "ramp_duration", "delta": "delta", "delta_detect": "delta_detect",
    "delta_ramp": "detect_delta_ramp", "t_final": "t_final_coupling", "dt": "dt",
    "sample_every": "sample_every", "allow_weak_coupling": "allow_weak_coupling",
    "t_grid": "t_grid", "levels": "levels", "phi_grid": "phi_grid",
    "delta_grid": "delta_grid", "phi": "phi", "shots": "shots", "seed": "seed",
    "threads": "threads",
}


def resolve_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a single JSON object")
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = sorted(set(loaded) - known - {"command"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        loaded.pop("command", None)
        values.update(loaded)
    for dest, field in FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[field] = v
    cfg = RunConfig(**values)
    if cfg.shots is not None and cfg.shots < 1:
        raise UsageError("--shots must be positive")
    if cfg.levels < 1:
        raise UsageError("--levels must be positive")
    return cfg


class Output:
    """CSV destination plus the channel for human-readable summaries."""

    def __init__(self, path):
        self.path = path

    def write(self, text: str):
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w", newline="\n") as fh:
                fh.write(text)

    def say(self, line: str):
        stream = sys.stderr if self.path in (None, "-") else sys.stdout
        print(line, file=stream)


def _write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_spectrum(cfg: RunConfig, out: Output, args) -> None:
    grid = parse_grid(cfg.t_grid)
    basis = SpinBasis(cfg.n_particles)
    if cfg.levels > basis.dim:
        raise UsageError(f"--levels {cfg.levels} exceeds the {basis.dim} available levels")
    base = JunctionParams(cfg.delta, grid[0], cfg.charging, basis)
    rows = gap_scan(base, grid, k=cfg.levels, workers=cfg.threads)
    header, table = csvio.gap_scan_table(rows, cfg.levels)
    out.write(csvio.render(header, table, cfg.as_dict("spectrum")))
    out.say(f"min gap01 = {min(r.gap01 for r in rows):.6g} over {len(rows)} couplings")


def cmd_split(cfg: RunConfig, out: Output, args) -> None:
    pc = cfg.protocol()
    traj = split_trajectory(pc)
    header, table = csvio.trajectory_table(traj)
    out.write(csvio.render(header, table, cfg.as_dict("split")))
    if args.state_out:
        _write_text(args.state_out, dump_state(traj.final_state) + "\n")
    fit = noon_max_fidelity(traj.final_state)
    out.say(f"noon_max_fidelity = {fit.fidelity:.10f}")
    out.say(f"noon_phase = {fit.phase:.10f}")
    out.say(f"min F0+F1 = {traj.min_subspace_population:.10f}")


def cmd_interfere(cfg: RunConfig, out: Output, args) -> None:
    grid = parse_grid(cfg.phi_grid)
    pc = cfg.protocol()
    state = split(pc)
    keep = cfg.shots is not None
    from .parallel import map_ordered

    def point(item):
        i, phi = item
        res = interfere(state, pc, phi, keep_state=keep)
        row = [res.phase, res.f0, res.f1, res.residual_leakage]
        if keep:
            dist = detect(res.final_state, pc)
            rec = sample_measurement(dist, cfg.shots, cfg.seed + i)
            lo = rec.count(-pc.basis.j)
            est = phase_estimate(lo, cfg.shots, pc.n_particles)
            row += [lo, rec.count(pc.basis.j), lo / cfg.shots, est.phi_hat, est.std_error]
        return row

    rows = map_ordered(point, list(enumerate(grid)), cfg.threads)
    header = ["phi", "F0", "F1", "leakage"]
    if keep:
        header += ["count_minus_J", "count_plus_J", "F0_sampled", "phi_hat", "phi_std_error"]
    out.write(csvio.render(header, rows, cfg.as_dict("interfere")))
    f0 = np.array([r[1] for r in rows])
    if len(rows) >= 2:
        out.say(f"visibility = {(f0.max() - f0.min()) / (f0.max() + f0.min()):.10f}")


def cmd_delta_scan(cfg: RunConfig, out: Output, args) -> None:
    grid = parse_grid(cfg.delta_grid)
    rows = delta_scan(cfg.protocol(), grid, workers=cfg.threads)
    out.write(csvio.render(["delta", "max_noon_fidelity"], rows, cfg.as_dict("delta-scan")))
    out.say(f"min fidelity = {min(f for _, f in rows):.10f} over {len(rows)} imbalances")


def cmd_detect(cfg: RunConfig, out: Output, args) -> None:
    with open(args.state) as fh:
        state = load_state(fh.read())
    if state.basis.n_particles != cfg.n_particles:
        cfg = dataclasses.replace(cfg, n_particles=state.basis.n_particles)
    pc = cfg.protocol()
    dist = detect(state, pc)
    header, table = csvio.distribution_table(dist)
    out.write(csvio.render(header, table, cfg.as_dict("detect")))
    out.say(f"p_-J = {dist.p_lowest:.10f}")
    out.say(f"p_+J = {dist.p_highest:.10f}")


def cmd_full(cfg: RunConfig, out: Output, args) -> None:
    pc = cfg.protocol()
    s_split = split(pc)
    s_phase = phase_imprint(s_split, cfg.phi)
    s_out = recombine(s_phase, pc)
    f0, f1 = readout(s_out, pc)
    dist = detect(s_out, pc)
    j = pc.basis.j
    report = {
        "config": cfg.as_dict("full"),
        "phi": cfg.phi,
        "f0": f0,
        "f1": f1,
        "residual_leakage": 1.0 - f0 - f1,
        "noon_max_fidelity": noon_max_fidelity(s_split).fidelity,
        "p_minus_J": dist.p_lowest,
        "p_plus_J": dist.p_highest,
    }
    rec = None
    if cfg.shots is not None:
        rec = sample_measurement(dist, cfg.shots, cfg.seed)
        est = phase_estimate(rec.count(-j), cfg.shots, pc.n_particles)
        report["shots"] = cfg.shots
        report["seed"] = cfg.seed
        report["counts"] = [[m, c] for m, c in rec.counts.items() if c]
        report["phase_estimate"] = est._asdict()
    if args.dump_states:
        os.makedirs(args.dump_states, exist_ok=True)
        for name, st in (("split", s_split), ("imprinted", s_phase), ("recombined", s_out)):
            _write_text(os.path.join(args.dump_states, f"{name}.json"), dump_state(st) + "\n")
        header, table = csvio.distribution_table(dist)
        _write_text(os.path.join(args.dump_states, "detected.csv"),
                    csvio.render(header, table, cfg.as_dict("full")))
        if rec is not None:
            _write_text(os.path.join(args.dump_states, "measurement.json"), rec.to_json() + "\n")
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out.path in (None, "-"):
        sys.stdout.write(text)
    else:
        out.write(text)
        out.say(f"f0 = {f0:.10f}  f1 = {f1:.10f}")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "split": cmd_split,
    "interfere": cmd_interfere,
    "delta-scan": cmd_delta_scan,
    "detect": cmd_detect,
    "full": cmd_full,
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file of RunConfig fields (flags take precedence)")
    p.add_argument("--n", type=int, help="particle number N")
    p.add_argument("--ec", type=float, help="charging energy E_C")
    p.add_argument("--tmax", type=float, help="strong-coupling endpoint of the ramps")
    p.add_argument("--duration", type=float, help="ramp duration")
    p.add_argument("--delta", type=float, help="imbalance during splitting (and spectrum)")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--sample-every", type=int, help="steps between trajectory samples")
    p.add_argument("--allow-weak-coupling", action="store_const", const=True,
                   help="accept --tmax below 10|E_C| with a warning")
    p.add_argument("--threads", type=int, help="sweep workers (0 = all cores)")
    p.add_argument("--out", "-o", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bjjmz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest levels versus coupling")
    _common(p)
    p.add_argument("--t-grid", help="coupling grid start:stop:count (default 0:40:81)")
    p.add_argument("--levels", type=int, help="levels per row (default 2)")

    p = sub.add_parser("split", help="adiabatic splitter trajectory")
    _common(p)
    p.add_argument("--state-out", help="write the final state dump here")

    p = sub.add_parser("interfere", help="interference fringe over a phase grid")
    _common(p)
    p.add_argument("--phi-grid", help="phase grid (default 0:2pi:33)")
    p.add_argument("--shots", type=int, help="add sampled readout columns")
    p.add_argument("--seed", type=int, help="base seed; row i uses seed+i")

    p = sub.add_parser("delta-scan", help="splitter fidelity versus imbalance")
    _common(p)
    p.add_argument("--delta-grid", help="imbalance grid (default -0.03:0.03:31)")

    p = sub.add_parser("detect", help="detection ramp applied to a dumped state")
    _common(p)
    p.add_argument("state", help="state dump to detect")
    p.add_argument("--delta-detect", type=float, help="detection imbalance (default |E_C|/4)")
    p.add_argument("--delta-ramp", type=float, help="time over which the imbalance is switched on")
    p.add_argument("--t-final", type=float, help="coupling at the end of detection")

    p = sub.add_parser("full", help="split, imprint, recombine, detect and sample")
    _common(p)
    p.add_argument("--phi", type=float, help="imprinted phase")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--delta-detect", type=float)
    p.add_argument("--delta-ramp", type=float)
    p.add_argument("--dump-states", metavar="DIR", help="write intermediate states here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg, Output(args.out), args)
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"bjjmz: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError) as exc:
        print(f"bjjmz: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
