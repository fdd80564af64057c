"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or configuration error,
3 numerical failure during training.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from .data import NAMED_PROFILES, SynthSpec, fahrenheit_to_celsius, load_csv, load_synth_spec, synthesize, write_csv
from .errors import NumericalFailureError, SweepError, VitalRLError
from .harness import (
    PER_EPISODE,
    PER_STEP,
    RunConfig,
    SweepGrid,
    evaluate_greedy,
    file_checksum,
    run_sweep,
    run_training,
    write_run,
)
from .mews import VitalKind, classify, met_for_score
from .neural import load_file
from .rewards import DEFAULT_REWARDS, RewardMatrix
from .seeding import default_seed

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
CORE_VITALS = ("heart_rate", "resp_rate", "temperature")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vital_list(text: str) -> list[VitalKind]:
    try:
        return [VitalKind.parse(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _vital(text: str) -> VitalKind:
    try:
        return VitalKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _non_negative_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def _temp_unit(text: str) -> str:
    unit = text.lower()
    if unit in ("c", "celsius"):
        return "celsius"
    if unit in ("f", "fahrenheit"):
        return "fahrenheit"
    raise argparse.ArgumentTypeError(f"unknown temperature unit {text!r} (use c or f)")


def _add_synth_flags(p):
    p.add_argument("--noise", type=float, default=0.5,
                   help="Gaussian noise std of synthetic readings, physical units (default 0.5)")
    p.add_argument("--dwell", type=_positive_int, default=10,
                   help="consecutive samples per synthetic band visit (default 10)")


def _add_source_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="subject CSV file, or directory of CSV files")
    src.add_argument("--synth", help="named profile (uniform, normal, calm) or JSON spec path")
    p.add_argument("--temp-unit", type=_temp_unit, default="celsius",
                   help="temperature unit of --data files: c or f (default c)")
    _add_synth_flags(p)


def _add_train_flags(p):
    _add_source_flags(p)
    p.add_argument("--vitals", type=_vital_list, default=_vital_list(",".join(CORE_VITALS)))
    p.add_argument("--episodes", type=_positive_int, default=10)
    p.add_argument("--length", type=_non_negative_int, default=500, help="monitor length N")
    p.add_argument("--alpha", type=float, default=RunConfig.alpha)
    p.add_argument("--gamma", type=float, default=RunConfig.gamma)
    p.add_argument("--epsilon", type=float, default=RunConfig.epsilon)
    p.add_argument("--epsilon-decay", type=float, default=RunConfig.epsilon_decay)
    p.add_argument("--epsilon-min", type=float, default=RunConfig.epsilon_min)
    p.add_argument("--batch-size", type=_positive_int, default=RunConfig.batch_size)
    p.add_argument("--hidden", type=_positive_int, default=RunConfig.hidden)
    p.add_argument("--memory", type=_positive_int, default=RunConfig.memory_capacity,
                   help="replay memory capacity")
    p.add_argument("--window", type=_positive_int, default=1,
                   help="stack the last k readings as network input")
    cadence = p.add_mutually_exclusive_group()
    cadence.add_argument("--replay-every-step", dest="cadence", action="store_const",
                         const=PER_STEP, help="replay after every step (default)")
    cadence.add_argument("--replay-every-episode", dest="cadence", action="store_const",
                         const=PER_EPISODE, help="replay once at the end of each episode")
    p.add_argument("--reward-matrix", help="5x5 reward CSV (rows action 0..4, columns MEWS 4..0)")
    p.add_argument("--seed", type=_seed, default=None,
                   help="run seed (default: $VITALRL_SEED or 0)")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vitalrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="MEWS score and alert level of one reading")
    p.add_argument("--vital", type=_vital, required=True)
    p.add_argument("--value", required=True)
    p.add_argument("--temp-unit", type=_temp_unit, default="celsius")

    p = sub.add_parser("simulate", help="write a synthetic subject CSV")
    p.add_argument("--profile", default="uniform",
                   help="named profile or five comma-separated fractions for scores 0..4")
    p.add_argument("--spec", help="JSON synthesizer spec (overrides --profile/--vitals)")
    p.add_argument("--vitals", type=_vital_list, default=[VitalKind.HEART_RATE],
                   help="vitals following --profile; other core columns stay in band 0")
    p.add_argument("--length", type=int, default=None, help="samples to generate (default 500)")
    p.add_argument("--subject", default="synth")
    p.add_argument("--seed", type=_seed, default=None)
    _add_synth_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("train", help="train one DQN agent per vital and subject")
    _add_train_flags(p)

    p = sub.add_parser("sweep", help="grid sweep over alpha or gamma")
    p.add_argument("--param", choices=("alpha", "gamma"), required=True)
    p.add_argument("--values", type=_float_list, required=True)
    _add_train_flags(p)

    p = sub.add_parser("evaluate", help="greedy score of a saved model")
    p.add_argument("--model", required=True)
    _add_source_flags(p)
    p.add_argument("--length", type=_non_negative_int, default=500)
    p.add_argument("--subject", help="subject id when --data holds several")
    p.add_argument("--seed", type=_seed, default=None)
    return parser


# ------------------------------------------------------------------ commands

def cmd_score(args) -> int:
    if args.vital.is_categorical:
        value = args.value
    else:
        try:
            value = float(args.value)
        except ValueError:
            raise UsageError(f"--value must be a number, got {args.value!r}") from None
        if not math.isfinite(value):
            raise UsageError("--value must be finite")
        if args.vital is VitalKind.TEMPERATURE and args.temp_unit == "fahrenheit":
            value = fahrenheit_to_celsius(value)
    try:
        score = classify(args.vital, value)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"score={score} met={met_for_score(score)}")
    return EXIT_OK


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else default_seed()


def _synth_spec(source: str, vitals, length: int, args, seed: int) -> SynthSpec:
    if source in NAMED_PROFILES:
        return SynthSpec.named(source, vitals, length, noise_std=args.noise, seed=seed,
                               dwell=args.dwell)
    path = Path(source)
    if not path.exists():
        raise UsageError(
            f"--synth must be one of {', '.join(NAMED_PROFILES)} or an existing JSON file")
    return load_synth_spec(path, length=length, seed=seed)


def _load_streams(args, vitals, length: int, seed: int):
    """Streams plus a manifest description of where they came from."""
    if args.data is not None:
        streams = load_csv(args.data, temp_unit=args.temp_unit)
        path = Path(args.data)
        files = sorted(path.glob("*.csv")) if path.is_dir() else [path]
        inputs = {"data": {f.name: file_checksum(f) for f in files},
                  "temp_unit": args.temp_unit}
        return streams, inputs
    spec = _synth_spec(args.synth, vitals, length + 1, args, seed)
    doc = asdict(spec)
    doc["profiles"] = {v.value: list(f) for v, f in spec.profiles.items()}
    return [synthesize(spec)], {"synth": doc}


def _run_config(args, seed: int) -> RunConfig:
    rewards = RewardMatrix.from_csv(args.reward_matrix) if args.reward_matrix else DEFAULT_REWARDS
    return RunConfig(
        monitor_length=args.length,
        episodes=args.episodes,
        gamma=args.gamma,
        seed=seed,
        alpha=args.alpha,
        batch_size=args.batch_size,
        hidden=args.hidden,
        epsilon=args.epsilon,
        epsilon_decay=args.epsilon_decay,
        epsilon_min=args.epsilon_min,
        vitals=tuple(args.vitals),
        replay_cadence=args.cadence or PER_STEP,
        memory_capacity=args.memory,
        window=args.window,
        rewards=rewards,
    )


def cmd_train(args) -> int:
    seed = _resolve_seed(args)
    config = _run_config(args, seed)
    streams, inputs = _load_streams(args, config.vitals, config.monitor_length, seed)
    metrics = run_training(streams, config)
    write_run(metrics, args.out, inputs)
    print(f"rows={len(metrics.rows)} out={args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args)
    config = _run_config(args, seed)
    grid = SweepGrid(args.param, tuple(args.values))
    streams, inputs = _load_streams(args, config.vitals, config.monitor_length, seed)
    sweep = run_sweep(streams, config, grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep.write_csv(out / "sweep.csv")
    manifest = {"seed": seed, "config": config.snapshot(), "inputs": inputs,
                "grid": {"param": grid.param, "values": list(grid.values)},
                "sweep": "sweep.csv"}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n",
                                       encoding="utf-8")
    print(f"runs={len(grid.values)} rows={len(sweep.rows)} out={args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    net = load_file(args.model)
    if net.vital is None:
        raise UsageError("model document does not name its vital")
    seed = _resolve_seed(args)
    streams, _ = _load_streams(args, [net.vital], args.length, seed)
    if args.subject is not None:
        matches = [s for s in streams if s.subject_id == args.subject]
        if not matches:
            raise UsageError(f"no subject {args.subject!r} in {args.data}")
        stream = matches[0]
    else:
        stream = streams[0]
    score = evaluate_greedy(net, stream, args.length)
    top = 10 * args.length
    fraction = score / top if top else 1.0
    print(f"score={score} max={top} fraction={fraction:.3f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.length is not None and args.length < 1:
        raise UsageError("--length must be >= 1")
    seed = _resolve_seed(args)
    if args.spec:
        spec = load_synth_spec(args.spec, length=args.length, seed=seed, subject_id=args.subject)
    else:
        if args.profile in NAMED_PROFILES:
            profile = args.profile
        else:
            try:
                profile = tuple(float(x) for x in args.profile.split(","))
            except ValueError:
                raise UsageError(f"bad --profile {args.profile!r}") from None
        profiles = {v: profile for v in args.vitals}
        spec = SynthSpec(length=args.length or 500, profiles=profiles, noise_std=args.noise, seed=seed,
                         dwell=args.dwell, subject_id=args.subject)
    # the ingestion schema needs every core column
    profiles = dict(spec.profiles)
    for name in CORE_VITALS:
        profiles.setdefault(VitalKind(name), "calm")
    spec = SynthSpec(length=spec.length, profiles=profiles, noise_std=spec.noise_std,
                     seed=spec.seed, dwell=spec.dwell, subject_id=spec.subject_id)
    stream = synthesize(spec)
    write_csv(stream, args.out)
    print(f"samples={stream.sample_count} out={args.out}")
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "simulate": cmd_simulate,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
}


def _is_numerical(exc: BaseException) -> bool:
    if isinstance(exc, NumericalFailureError):
        return True
    return isinstance(exc, SweepError) and _is_numerical(exc.cause)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"vitalrl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VitalRLError, OSError, ValueError) as exc:
        code = EXIT_NUMERIC if _is_numerical(exc) else EXIT_DATA
        print(f"vitalrl {args.command}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
