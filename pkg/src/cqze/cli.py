"""Command-line front end.

Subcommands::

    cqze run      --M 25 --N 320 --bob-bit 1
    cqze sweep    --preset fig3 --output fig3.csv
    cqze message  --bits 0101 --M 150 --N 10000
    cqze timing   --L 1000

Every table is written in one piece after all points are computed, so a
failed run leaves no partial output. Floats carry 12 significant digits.
Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .engine import FIELDS, ProtocolParams
from .metrics import build_statistics, mutual_information
from .noise import NoiseModel, monte_carlo
from .session import SessionConfig, random_bits, transmit

SPEED_OF_LIGHT = 299_792_458.0  # m/s

COLUMNS = (
    "M", "N", "s", "B", "eta", "bob_bit",
    "p_d1", "p_d2", "p_d3", "p_bob", "p_noise",
    "stderr_d1", "stderr_d2", "stderr_d3", "stderr_bob", "stderr_noise",
    "mutual_information", "seed",
)

PRESETS = {
    "fig3": dict(
        M=[5, 10, 15, 20, 25, 50, 75, 100, 150],
        N=[10, 20, 50, 100, 200, 320, 500, 1000, 1250, 2000, 5000, 10000],
        bob_bit=[0, 1],
    ),
    "fig4a": dict(
        pairs=[(25, 320), (50, 1250)],
        s=[i / 4 for i in range(17)],
        bob_bit=[0, 1],
    ),
    "fig4b": dict(
        pairs=[(25, 320), (50, 1250)],
        B=[0.0, 0.0005, 0.001, 0.002, 0.005, 0.01],
        bob_bit=[0],
    ),
}


class UsageError(Exception):
    pass


def sm_timing_bound(L: float) -> float:
    """Upper bound ``2L / c0`` (seconds) on switchable-mirror control time
    for an Alice-Bob distance ``L`` in meters."""
    if not L > 0:
        raise ValueError(f"distance must be positive, got {L!r}")
    return 2.0 * L / SPEED_OF_LIGHT


@dataclass(frozen=True)
class SweepSpec:
    pairs: tuple[tuple[int, int], ...]
    s: tuple[float, ...] = (0.0,)
    B: tuple[float, ...] = (0.0,)
    eta: tuple[float, ...] = (1.0,)
    bob_bit: tuple[int, ...] = (0, 1)
    trials: int = 10_000
    seed: int = 0
    final_inner_chain: bool = False

    def __post_init__(self):
        for name in ("pairs", "s", "B", "eta", "bob_bit"):
            if not getattr(self, name):
                raise ValueError(f"sweep grid axis {name!r} is empty")
        for M, N in self.pairs:
            ProtocolParams(M, N)
        for B in self.B:
            NoiseModel(B, self.seed, self.trials)
        if any(not 0.0 <= e <= 1.0 for e in self.eta):
            raise ValueError("eta values must lie in [0, 1]")
        if any(b not in (0, 1) for b in self.bob_bit):
            raise ValueError("bob_bit values must be 0 or 1")

    def points(self):
        """Grid points in output order."""
        for M, N in self.pairs:
            for s in self.s:
                for B in self.B:
                    for eta in self.eta:
                        for bit in self.bob_bit:
                            yield M, N, s, B, eta, bit


def _fmt(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return float(f"{value:.12g}")
    return value


def _point_distributions(M, N, s, B, trials, seed, final, workers=1):
    params = ProtocolParams.uniform(M, N, s, final_inner_chain=final)
    model = NoiseModel(B, seed, trials)
    return tuple(monte_carlo(params, bit, model, workers=workers) for bit in (0, 1))


def evaluate_grid(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    keys = list(dict.fromkeys((M, N, s, B) for M, N, s, B, _, _ in spec.points()))
    args = [(M, N, s, B, spec.trials, spec.seed, spec.final_inner_chain) for M, N, s, B in keys]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point_distributions, *zip(*args)))
    elif jobs > 1:
        results = [_point_distributions(*a, workers=jobs) for a in args]
    else:
        results = [_point_distributions(*a) for a in args]
    table = dict(zip(keys, results))

    rows = []
    for M, N, s, B, eta, bit in spec.points():
        pass_mc, block_mc = table[(M, N, s, B)]
        mc = (pass_mc, block_mc)[bit]
        info = mutual_information(build_statistics(pass_mc.mean, block_mc.mean, eta))
        row = dict(M=M, N=N, s=float(s), B=float(B), eta=float(eta), bob_bit=bit)
        row.update(mc.mean.as_dict())
        row.update(
            {f"stderr_{f[2:]}": v for f, v in zip(FIELDS, mc.std_error.as_tuple())}
        )
        row.update(mutual_information=info, seed=spec.seed)
        rows.append({k: _fmt(row[k]) for k in COLUMNS})
    return rows


def render(rows, fmt: str, single: bool = False) -> str:
    if fmt == "json":
        payload = rows[0] if single else rows
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: f"{v:.12g}" if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def emit(text: str, output: str | None, force: bool) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    path.write_text(text)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pair_list(text):
    pairs = []
    for item in filter(None, (v.strip() for v in text.split(","))):
        try:
            M, N = item.lower().split("x")
            pairs.append((int(M), int(N)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected MxN pairs like 25x320, got {item!r}")
    return pairs


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _default_seed():
    raw = os.environ.get("RUN_SEED")
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"RUN_SEED must be an unsigned 64-bit integer, got {raw!r}")


def read_config(path: str) -> dict:
    """Read ``key = value`` defaults; keys are option names, e.g. ``M = 25``."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[defaults]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    section = parser["defaults"]
    values = {}
    for key in section:
        dest = key.lstrip("-").replace("-", "_")
        if dest in ("final_inner_chain", "force"):
            try:
                values[dest] = section.getboolean(key)
            except ValueError as exc:
                raise UsageError(f"config {path}: {exc}")
        else:
            values[dest] = section[key]
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqze", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying defaults")
    common.add_argument("--format", choices=("csv", "json"), help="default csv (json for message)")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--force", action="store_true", help="overwrite --output")

    protocol = argparse.ArgumentParser(add_help=False)
    protocol.add_argument("--seed", type=_seed)
    protocol.add_argument("--trials", type=int, default=10_000)
    protocol.add_argument("--final-inner-chain", action="store_true")
    protocol.add_argument("--jobs", type=int, default=1, help="worker processes")

    run = sub.add_parser("run", parents=[common, protocol], help="single configuration")
    run.add_argument("--M", type=int, default=25)
    run.add_argument("--N", type=int, default=320)
    run.add_argument("--bob-bit", type=int, choices=(0, 1), default=0)
    run.add_argument("--s", type=float, default=0.0)
    run.add_argument("--B", type=float, default=0.0)
    run.add_argument("--eta", type=float, default=1.0)

    sweep = sub.add_parser("sweep", parents=[common, protocol], help="grid of configurations")
    sweep.add_argument("--preset", choices=sorted(PRESETS))
    sweep.add_argument("--M", type=_int_list)
    sweep.add_argument("--N", type=_int_list)
    sweep.add_argument("--pairs", type=_pair_list, help="explicit MxN points, e.g. 25x320,50x1250")
    sweep.add_argument("--s", type=_float_list)
    sweep.add_argument("--B", type=_float_list)
    sweep.add_argument("--eta", type=_float_list)
    sweep.add_argument("--bob-bit", type=_int_list)

    message = sub.add_parser("message", parents=[common, protocol], help="send a bitstream")
    bits = message.add_mutually_exclusive_group()
    bits.add_argument("--bits", help="string of 0/1 characters")
    bits.add_argument("--random-bits", type=int, metavar="COUNT")
    message.add_argument("--M", type=int, default=25)
    message.add_argument("--N", type=int, default=320)
    message.add_argument("--s", type=float, default=0.0)
    message.add_argument("--B", type=float, default=0.0)
    message.add_argument("--eta", type=float, default=1.0)
    message.add_argument("--max-retries", type=int, default=10)

    timing = sub.add_parser("timing", parents=[common], help="switchable-mirror control bound")
    timing.add_argument("--L", type=float, required=True, help="Alice-Bob distance in meters")
    return parser


def _sweep_spec(args) -> SweepSpec:
    grid = dict(PRESETS.get(args.preset, {}))
    for name in ("M", "N", "pairs", "s", "B", "eta", "bob_bit"):
        value = getattr(args, name)
        if value is not None:
            grid[name] = value
    if "pairs" not in grid:
        if "M" not in grid or "N" not in grid:
            raise UsageError("sweep needs --pairs, --M and --N, or --preset")
        grid["pairs"] = [(M, N) for M in grid["M"] for N in grid["N"]]
    return SweepSpec(
        pairs=tuple(grid["pairs"]),
        s=tuple(grid.get("s", (0.0,))),
        B=tuple(grid.get("B", (0.0,))),
        eta=tuple(grid.get("eta", (1.0,))),
        bob_bit=tuple(grid.get("bob_bit", (0, 1))),
        trials=args.trials,
        seed=args.seed,
        final_inner_chain=args.final_inner_chain,
    )


def cmd_run(args) -> str:
    spec = SweepSpec(
        pairs=((args.M, args.N),), s=(args.s,), B=(args.B,), eta=(args.eta,),
        bob_bit=(args.bob_bit,), trials=args.trials, seed=args.seed,
        final_inner_chain=args.final_inner_chain,
    )
    return render(evaluate_grid(spec, jobs=args.jobs), args.format, single=True)


def cmd_sweep(args) -> str:
    return render(evaluate_grid(_sweep_spec(args), jobs=args.jobs), args.format)


def cmd_message(args) -> str:
    if args.bits is not None:
        if not args.bits or set(args.bits) - {"0", "1"}:
            raise UsageError(f"--bits must be a non-empty string of 0/1, got {args.bits!r}")
        bits = tuple(int(c) for c in args.bits)
    elif args.random_bits is not None:
        if args.random_bits < 1:
            raise UsageError("--random-bits must be positive")
        bits = random_bits(args.random_bits, args.seed)
    else:
        raise UsageError("message needs --bits or --random-bits")
    config = SessionConfig(
        bits=bits,
        params=ProtocolParams.uniform(args.M, args.N, args.s, args.final_inner_chain),
        noise=NoiseModel(args.B, args.seed, args.trials),
        eta=args.eta,
        max_retries=args.max_retries,
        seed=args.seed,
    )
    result = transmit(config)
    record = dict(
        M=args.M, N=args.N, s=float(args.s), B=float(args.B), eta=float(args.eta),
        max_retries=args.max_retries, seed=args.seed, n_bits=len(bits),
        sent="".join(map(str, bits)),
        received="".join("-" if d is None else str(d) for d in result.decoded),
    )
    record.update(result.to_dict())
    record = {k: _fmt(v) for k, v in record.items()}
    if args.format == "csv":
        flat = {k: v for k, v in record.items() if not isinstance(v, (list, tuple, dict))}
        flat["ber"] = "" if flat["ber"] is None else flat["ber"]
        return render([flat], "csv")
    return json.dumps(record, indent=2) + "\n"


def cmd_timing(args) -> str:
    row = dict(L=_fmt(float(args.L)), bound_seconds=_fmt(sm_timing_bound(args.L)))
    return render([row], args.format, single=True)


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "message": cmd_message, "timing": cmd_timing}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("command", nargs="?")
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if known.config and known.command in COMMANDS:
            sub = parser._subparsers._group_actions[0].choices[known.command]
            sub.set_defaults(**read_config(known.config))
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if args.format is None:
            args.format = "json" if args.command == "message" else "csv"
        text = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cqze: error: {exc}", file=sys.stderr)
        return 2
    try:
        emit(text, args.output, args.force)
    except OSError as exc:
        print(f"cqze: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
