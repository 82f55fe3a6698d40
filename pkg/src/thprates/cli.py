"""Command-line front end: closed-form sweeps, full-chain simulation, and
the self-verification suite, all emitting one fixed CSV schema.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from typing import List, Optional

from . import __version__
from .bounds import (NoiseModel, RatePoint, asymptote, awgn_capacity,
                     bound_new, bound_original)
from .channel import RngStream, gen_channel
from .modulo import Modulus
from .precoder import SingularChannelError
from .rates import exact_modt_rate_from_snr_prime, per_user_rate_sim

CSV_HEADER = ("snr_db,c_awgn_bits,bound_original_bits,bound_new_bits,"
              "asymptote_bits,exact_modt_bits,mc_rate_bits,snr_prime_db,sigma_s2")


@dataclass
class SweepConfig:
    snr_start_db: float = -10.0
    snr_stop_db: float = 30.0
    snr_step_db: float = 1.0
    users: int = 4
    tx_antennas: int = 4
    trials: int = 100
    samples: int = 1_000_000
    bins: int = 256
    seed: int = 1
    clamp_zero: bool = False
    output_path: Optional[str] = None
    ascii_plot: bool = False
    figure_path: Optional[str] = None
    precoder: str = "mmse"
    receiver: str = "model"

    def __post_init__(self):
        if self.snr_start_db > self.snr_stop_db:
            raise ValueError("snr-start must not exceed snr-stop")
        if self.snr_step_db <= 0:
            raise ValueError("snr-step must be positive")
        if self.users > self.tx_antennas:
            raise ValueError("users must not exceed tx antennas")

    def grid_db(self) -> List[float]:
        count = int(math.floor((self.snr_stop_db - self.snr_start_db)
                               / self.snr_step_db + 1e-9)) + 1
        return [self.snr_start_db + i * self.snr_step_db for i in range(count)]

    # I/O routing knobs that do not affect the numbers stay out of the echo
    # so the CSV bytes depend only on the scientific configuration.
    _NO_ECHO = ("output_path", "figure_path", "ascii_plot")

    def echo(self, command: str) -> str:
        parts = [f"command={command}"]
        for f in fields(self):
            if f.name in self._NO_ECHO:
                continue
            parts.append(f"{f.name}={getattr(self, f.name)}")
        return " ".join(parts)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.12g}"


def _clamp(v: Optional[float], on: bool) -> Optional[float]:
    if v is None:
        return None
    return max(v, 0.0) if on else v


def render_csv(points: List[RatePoint], cfg: SweepConfig, command: str,
               footer: Optional[List[str]] = None) -> str:
    """Serialize a rate curve to the fixed CSV schema (UTF-8, LF, 12 sig digits)."""
    lines = [f"# thprates {__version__}", f"# {cfg.echo(command)}", CSV_HEADER]
    last = None
    for p in points:
        if last is not None and not p.snr_db > last:
            raise ValueError("rate curve rows must have strictly increasing snr_db")
        last = p.snr_db
        lines.append(",".join([
            _fmt(p.snr_db), _fmt(p.c_awgn), _fmt(p.bound_original),
            _fmt(p.bound_new), _fmt(p.asymptote), _fmt(p.exact_modt),
            _fmt(p.mc_rate), _fmt(p.snr_prime_db), _fmt(p.sigma_s2),
        ]))
    for extra in footer or []:
        lines.append(f"# {extra}")
    return "\n".join(lines) + "\n"


def cmd_bounds(cfg: SweepConfig) -> List[RatePoint]:
    """Evaluate the four closed-form curves on the configured SNR grid."""
    points = []
    for db in cfg.grid_db():
        snr = 10.0 ** (db / 10.0)
        points.append(RatePoint(
            snr_db=db,
            c_awgn=awgn_capacity(snr),
            bound_original=_clamp(bound_original(snr), cfg.clamp_zero),
            bound_new=_clamp(bound_new(snr), cfg.clamp_zero),
            asymptote=_clamp(asymptote(snr), cfg.clamp_zero),
        ))
    return points


def cmd_simulate(cfg: SweepConfig) -> tuple[List[RatePoint], List[str]]:
    """Full-chain Monte Carlo sweep.

    Per grid point: draw ``trials`` channels, synthesize the selected
    precoder, measure residual interference, and estimate per-user rates
    over ``samples`` chain uses each. The reported mc_rate is the grand
    mean per-user rate; bound_new and exact_modt are evaluated at the
    pooled effective SNR so the columns stay directly comparable.
    """
    m = Modulus(1.0)
    master = RngStream(cfg.seed)
    points = []
    resampled = 0
    for idx, db in enumerate(cfg.grid_db()):
        snr = 10.0 ** (db / 10.0)
        noise = NoiseModel.from_snr(snr, p_total=m.p_t)
        point_rng = master.derive(idx)
        rate_acc, sigma_acc = [], []
        for trial in range(cfg.trials):
            trial_rng = point_rng.derive(trial)
            h = None
            for attempt in range(100):
                try:
                    candidate = gen_channel(cfg.users, cfg.tx_antennas,
                                            trial_rng.derive(1000 + attempt))
                    sim = per_user_rate_sim(
                        candidate, noise, m, samples=cfg.samples,
                        rng=trial_rng.derive(1), kind=cfg.precoder,
                        bins=cfg.bins, receiver=cfg.receiver)
                    h = candidate
                    break
                except SingularChannelError:
                    resampled += 1
            if h is None:
                raise RuntimeError("could not draw a nonsingular channel in 100 attempts")
            rate_acc.extend(r.bits for r in sim.rates)
            sigma_acc.append(sim.sigma_s2)
        sigma_s2 = sum(sigma_acc) / len(sigma_acc)
        sp = m.p_t / (sigma_s2 + noise.sigma_n2)
        points.append(RatePoint(
            snr_db=db,
            c_awgn=awgn_capacity(snr),
            bound_original=_clamp(bound_original(snr), cfg.clamp_zero),
            bound_new=_clamp(bound_new(sp), cfg.clamp_zero),
            asymptote=_clamp(asymptote(snr), cfg.clamp_zero),
            exact_modt=_clamp(exact_modt_rate_from_snr_prime(sp), cfg.clamp_zero),
            mc_rate=_clamp(sum(rate_acc) / len(rate_acc), cfg.clamp_zero),
            snr_prime_db=10.0 * math.log10(sp),
            sigma_s2=sigma_s2,
        ))
    footer = [f"resampled_draws={resampled}"] if resampled else []
    return points, footer


_ASCII_MARKS = (("c_awgn", "C"), ("bound_new", "N"), ("bound_original", "O"),
                ("asymptote", "A"), ("mc_rate", "M"))


def ascii_plot(points: List[RatePoint], height: int = 18) -> str:
    """Terminal chart of the rate curves (one column per grid point)."""
    series = {}
    for name, mark in _ASCII_MARKS:
        vals = [getattr(p, name) for p in points]
        if any(v is not None for v in vals):
            series[mark] = vals
    all_vals = [v for vals in series.values() for v in vals if v is not None]
    lo, hi = min(all_vals), max(all_vals)
    span = hi - lo or 1.0
    canvas = [[" "] * len(points) for _ in range(height)]
    for mark, vals in series.items():
        for col, v in enumerate(vals):
            if v is None:
                continue
            row = height - 1 - int(round((v - lo) / span * (height - 1)))
            canvas[row][col] = mark
    lines = [f"{hi:8.3f} |" + "".join(canvas[0])]
    lines += ["         |" + "".join(r) for r in canvas[1:-1]]
    lines.append(f"{lo:8.3f} |" + "".join(canvas[-1]))
    lines.append("          " + "-" * len(points))
    lines.append(f"          SNR {points[0].snr_db:g} .. {points[-1].snr_db:g} dB   "
                 + "  ".join(f"{m}={n}" for n, m in _ASCII_MARKS if m in series))
    return "\n".join(lines)


def _emit(text: str, cfg: SweepConfig) -> None:
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _finish_curve(points: List[RatePoint], cfg: SweepConfig, command: str,
                  footer: Optional[List[str]] = None) -> int:
    try:
        _emit(render_csv(points, cfg, command, footer), cfg)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2
    if cfg.figure_path is not None:
        from .plotting import save_rate_curve_figure
        try:
            save_rate_curve_figure(points, cfg.figure_path)
        except OSError as exc:
            print(f"error: cannot write figure: {exc}", file=sys.stderr)
            return 2
    if cfg.ascii_plot:
        chart = ascii_plot(points)
        # keep the CSV stream clean when it goes to stdout
        dest = sys.stderr if cfg.output_path is None else sys.stdout
        print(chart, file=dest)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--snr-start", type=float, default=-10.0, dest="snr_start_db",
                        help="sweep start in dB (default -10)")
    parser.add_argument("--snr-stop", type=float, default=30.0, dest="snr_stop_db",
                        help="sweep stop in dB (default 30)")
    parser.add_argument("--snr-step", type=float, default=1.0, dest="snr_step_db",
                        help="sweep step in dB (default 1)")
    parser.add_argument("--users", type=int, default=4)
    parser.add_argument("--tx-antennas", type=int, default=4, dest="tx_antennas")
    parser.add_argument("--trials", type=int, default=100,
                        help="channel draws per SNR point (simulate)")
    parser.add_argument("--samples", type=int, default=1_000_000,
                        help="chain uses per trial (simulate)")
    parser.add_argument("--bins", type=int, default=256,
                        help="histogram bins for the rate estimator")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--clamp-zero", action="store_true", dest="clamp_zero",
                        help="clamp negative rate columns to zero (presentation only)")
    parser.add_argument("--ascii-plot", action="store_true", dest="ascii_plot")
    parser.add_argument("--output", default=None, dest="output_path",
                        help="CSV output path (default stdout)")
    parser.add_argument("--figure", default=None, dest="figure_path",
                        help="also render the curves to this image file")


def _cfg_from_args(args: argparse.Namespace) -> SweepConfig:
    kwargs = {f.name: getattr(args, f.name) for f in fields(SweepConfig)
              if hasattr(args, f.name)}
    return SweepConfig(**kwargs)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="thprates",
        description="Rate bounds and link simulation for modulo-lattice "
                    "precoding on the multiuser downlink.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="closed-form curves on an SNR grid")
    _add_common(p_bounds)

    p_sim = sub.add_parser("simulate", help="full-chain Monte Carlo sweep")
    _add_common(p_sim)
    p_sim.add_argument("--precoder", choices=("mmse", "zf"), default="mmse")
    p_sim.add_argument("--receiver", choices=("model", "literal"), default="model",
                       help="decode map for rate estimation (see docs)")

    p_verify = sub.add_parser("verify", help="run the cross-module invariant suite")
    p_verify.add_argument("--seed", type=int, default=1)

    args = parser.parse_args(argv)

    if args.command == "verify":
        from .verify import run_verification
        report, ok = run_verification(seed=args.seed)
        print(report)
        return 0 if ok else 1

    try:
        cfg = _cfg_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "bounds":
        return _finish_curve(cmd_bounds(cfg), cfg, "bounds")
    if args.command == "simulate":
        points, footer = cmd_simulate(cfg)
        return _finish_curve(points, cfg, "simulate", footer)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
