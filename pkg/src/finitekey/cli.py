"""Command-line front end.

Subcommands: keyrate (one optimizer query), curve (sweep to CSV, with
optional figure and JSON), simulate (Monte Carlo protocol runs), verify
(bound-vs-empirical suites).  Every command is deterministic under
--seed; trials derive per-index random streams, so --threads changes
wall time but never output.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channels import ChannelModel, EntangledPairSource, PreparedStateChannel
from .codes import generate_code, leakage_bits
from .numerics import LogProb
from .optimize import RateQuery, curve_csv, max_key_length, rate_curve
from .protocol import PASS, run_eb, run_pm
from .security import ProtocolParams
from .streams import stream
from .verify import SUITES


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(blob: dict, path: str | None) -> None:
    _write(json.dumps(blob, indent=2, sort_keys=True) + "\n", path)


# ---------------------------------------------------------------------------
# configs (parse -> serialize -> parse must be the identity)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KeyrateConfig:
    m: int
    delta: float
    eps: float
    cbar: float
    leakage_factor: float = 1.1

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, blob: dict) -> "KeyrateConfig":
        return cls(**blob)

    def query(self) -> RateQuery:
        return RateQuery(m=self.m, delta=self.delta,
                         eps_target=LogProb.from_linear(self.eps),
                         cbar=self.cbar, leakage_factor=self.leakage_factor)


@dataclass(frozen=True)
class CurveConfig:
    m_grid: tuple
    deltas: tuple
    eps: float
    cbar: float
    leakage_factor: float = 1.1

    def to_json(self) -> dict:
        return {"m_grid": list(self.m_grid), "deltas": list(self.deltas),
                "eps": self.eps, "cbar": self.cbar,
                "leakage_factor": self.leakage_factor}

    @classmethod
    def from_json(cls, blob: dict) -> "CurveConfig":
        return cls(m_grid=tuple(blob["m_grid"]), deltas=tuple(blob["deltas"]),
                   eps=blob["eps"], cbar=blob["cbar"],
                   leakage_factor=blob.get("leakage_factor", 1.1))


@dataclass(frozen=True)
class SimulateConfig:
    protocol: str
    m: int
    k: int
    delta: float
    t: int
    ell: int
    r: int
    channel: ChannelModel
    trials: int
    master_seed: int
    big_m: int | None = None

    def to_json(self) -> dict:
        out = {"protocol": self.protocol, "m": self.m, "k": self.k,
               "delta": self.delta, "t": self.t, "ell": self.ell,
               "r": self.r, "channel": self.channel.to_json(),
               "trials": self.trials, "master_seed": self.master_seed}
        if self.big_m is not None:
            out["big_m"] = self.big_m
        return out

    @classmethod
    def from_json(cls, blob: dict) -> "SimulateConfig":
        blob = dict(blob)
        blob["channel"] = ChannelModel.from_json(blob["channel"])
        return cls(**blob)

    def params(self) -> ProtocolParams:
        return ProtocolParams(m=self.m, k=self.k, delta=self.delta, r=self.r,
                              t=self.t, ell=self.ell, cbar=0.5)


# ---------------------------------------------------------------------------
# simulate workers (module level so they pickle for --threads)
# ---------------------------------------------------------------------------

def _one_trial(cfg: SimulateConfig, code, index: int, want_trace: bool):
    rng = stream(cfg.master_seed, f"simulate-{cfg.protocol}", index)
    steps = [] if want_trace else None
    trace = steps.append if want_trace else None
    pe_errors = {}

    def spy(event):
        if event["step"] == "parameter_estimation":
            pe_errors["count"] = event["errors"]
        if trace is not None:
            trace(event)

    params = cfg.params()
    if cfg.protocol == "eb":
        source = EntangledPairSource(cfg.channel)
        out = run_eb(source, params, code, rng, trace=spy)
    else:
        channel = PreparedStateChannel(cfg.channel)
        out = run_pm(channel, cfg.big_m, params, code, rng, trace=spy)
    summary = (out.flags.f_si, out.flags.f_pe, out.flags.f_ec,
               out.flags.all_pass, out.keys_equal,
               pe_errors.get("count"))
    return index, summary, steps


def _run_trials(cfg: SimulateConfig, code, threads: int, want_trace: bool):
    results = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_one_trial, cfg, code, i, want_trace)
                       for i in range(cfg.trials)]
            results = [f.result() for f in futures]
    else:
        results = [_one_trial(cfg, code, i, want_trace)
                   for i in range(cfg.trials)]
    results.sort(key=lambda item: item[0])
    return results


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_keyrate(args) -> int:
    cfg = KeyrateConfig(m=args.m, delta=args.delta, eps=args.eps,
                        cbar=args.cbar, leakage_factor=args.leakage_factor)
    point = max_key_length(cfg.query())
    _dump(point.to_json(), args.out)
    if args.json_out:
        _dump(point.to_json(), args.json_out)
    return 0


def cmd_curve(args) -> int:
    cfg = CurveConfig(m_grid=tuple(args.m_grid), deltas=tuple(args.deltas),
                      eps=args.eps, cbar=args.cbar,
                      leakage_factor=args.leakage_factor)
    template = RateQuery(m=int(cfg.m_grid[0]), delta=cfg.deltas[0],
                         eps_target=LogProb.from_linear(cfg.eps),
                         cbar=cfg.cbar, leakage_factor=cfg.leakage_factor)
    curve = rate_curve([int(v) for v in cfg.m_grid], list(cfg.deltas),
                       template)
    _write(curve_csv(curve), args.out)
    if args.json_out:
        _dump(curve.to_json(), args.json_out)
    if args.plot:
        from .plotting import render_curve
        render_curve(curve, args.plot)
    summary = {"points": len(curve.points),
               "half_asymptote_m": {str(d): m for d, m in
                                    curve.half_asymptote_m.items()},
               "csv": args.out, "plot": args.plot}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def cmd_simulate(args) -> int:
    if args.channel_json:
        channel = ChannelModel.from_json(json.loads(args.channel_json))
    else:
        channel = ChannelModel(variant=args.variant, qber=args.qber,
                               eta=args.eta,
                               attack_fraction=args.attack_fraction)
    n = args.m - args.k
    r = args.r if args.r is not None else leakage_bits(n, args.delta, 1.1)
    big_m = args.big_m
    if args.protocol == "pm" and big_m is None:
        big_m = int(np.ceil(4 * args.m / channel.eta))
    cfg = SimulateConfig(protocol=args.protocol, m=args.m, k=args.k,
                         delta=args.delta, t=args.t, ell=args.ell, r=r,
                         channel=channel, trials=args.trials,
                         master_seed=args.seed, big_m=big_m)
    cfg.params()  # re-validate every embedded invariant before running
    code = generate_code(n, r, stream(args.seed, "simulate-code"))
    results = _run_trials(cfg, code, args.threads, args.trace)

    sift_pass = sum(1 for _, s, _ in results if s[0] in (PASS, "absent"))
    pe_pass = sum(1 for _, s, _ in results if s[1] == PASS)
    ec_pass = sum(1 for _, s, _ in results if s[2] == PASS)
    all_pass = sum(1 for _, s, _ in results if s[3])
    keys_equal = sum(1 for _, s, _ in results if s[3] and s[4])
    observed = [s[5] for _, s, _ in results if s[5] is not None]
    mean_qber = (sum(observed) / (len(observed) * cfg.k)) if observed else None

    report = {
        "config": cfg.to_json(),
        "trials": cfg.trials,
        "sift_pass": sift_pass,
        "pe_pass": pe_pass,
        "ec_pass": ec_pass,
        "all_pass": all_pass,
        "keys_equal_given_pass": keys_equal,
        "mean_observed_qber": mean_qber,
    }
    if args.trace:
        report["traces"] = [
            {"trial": idx, "steps": steps} for idx, _, steps in results]
    _dump(report, args.out)
    if args.json_out:
        _dump(report, args.json_out)
    return 0


def cmd_verify(args) -> int:
    suite = SUITES[args.suite]
    kwargs = {}
    if args.suite == "correctness":
        kwargs = {"t": args.t, "trials": args.trials,
                  "master_seed": args.seed}
    elif args.suite in ("serfling", "overlap"):
        kwargs = {"master_seed": args.seed}
    report = suite(**kwargs)
    _dump(report, args.out)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _delta(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 0.5:
        raise argparse.ArgumentTypeError(
            f"delta must lie in (0, 0.5), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finitekey",
        description="Finite-key QKD security calculus and protocol simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="master seed for all randomness")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for independent trials")
    common.add_argument("--out", type=str, default=None,
                        help="output path (default: stdout)")
    common.add_argument("--json", dest="json_out", type=str, default=None,
                        help="also write a JSON rendition to this path")

    sub = parser.add_subparsers(dest="command", required=True)

    p_rate = sub.add_parser("keyrate", parents=[common],
                            help="maximize the key length for one block")
    p_rate.add_argument("--m", type=int, required=True)
    p_rate.add_argument("--delta", type=_delta, required=True)
    p_rate.add_argument("--eps", type=float, default=1e-10)
    p_rate.add_argument("--cbar", type=float, default=0.5)
    p_rate.add_argument("--leakage-factor", type=float, default=1.1)
    p_rate.set_defaults(func=cmd_keyrate)

    p_curve = sub.add_parser("curve", parents=[common],
                             help="sweep (m, delta) and emit the rate CSV")
    p_curve.add_argument("--m-grid", type=_float_list, required=True,
                         help="comma-separated block lengths, e.g. 1e3,1e4")
    p_curve.add_argument("--deltas", type=_float_list, required=True)
    p_curve.add_argument("--eps", type=float, default=1e-10)
    p_curve.add_argument("--cbar", type=float, default=0.5)
    p_curve.add_argument("--leakage-factor", type=float, default=1.1)
    p_curve.add_argument("--plot", type=str, default=None,
                         help="render the sweep figure to this file")
    p_curve.set_defaults(func=cmd_curve)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="Monte Carlo protocol runs")
    p_sim.add_argument("--protocol", choices=("eb", "pm"), required=True)
    p_sim.add_argument("--m", type=int, required=True)
    p_sim.add_argument("--k", type=int, required=True)
    p_sim.add_argument("--delta", type=_delta, required=True)
    p_sim.add_argument("--t", type=int, default=5)
    p_sim.add_argument("--ell", type=int, default=4)
    p_sim.add_argument("--r", type=int, default=None,
                       help="syndrome bits (default: leakage model)")
    p_sim.add_argument("--big-m", dest="big_m", type=int, default=None,
                       help="states sent in a pm run (default: 4m/eta)")
    p_sim.add_argument("--channel-json", type=str, default=None,
                       help="channel model as a JSON object")
    p_sim.add_argument("--variant", type=str, default="eb_honest")
    p_sim.add_argument("--qber", type=float, default=0.0)
    p_sim.add_argument("--eta", type=float, default=1.0)
    p_sim.add_argument("--attack-fraction", type=float, default=0.0)
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--trace", action="store_true",
                       help="emit one JSON object per protocol step")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", parents=[common],
                           help="run a bound-vs-empirical suite")
    p_ver.add_argument("--suite", choices=sorted(SUITES), required=True)
    p_ver.add_argument("--t", type=int, default=8)
    p_ver.add_argument("--trials", type=int, default=100_000)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"finitekey: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
