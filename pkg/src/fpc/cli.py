"""Command-line entry point: dataset generation, closed-loop simulation, and
offline fusion replay.

Exit codes: 0 success, 1 runtime failure, 2 usage/schema error. Reports are
machine-first JSON (byte-identical across reruns with the same seed and
config) with a human-readable table on stdout where it helps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .actions import ActionVector, PredictionBuffer, PredictionChunk
from .backends import ENV_SUPERVISOR_URL, BACKEND_KINDS, BackendConfig
from .dataset import (
    GenerationConfig,
    SchemaError,
    generate_dataset,
    read_episodes,
    write_records,
)
from .fusion import FusionParams, fuse, kernel_name
from .language import Thresholds
from .sim import Disturbance, Scenario, derive_seeds, evaluate

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    if not os.path.exists(path):
        raise SchemaError(path, 0, "config file not found")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(path, exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise SchemaError(path, 1, "config file must hold a JSON object")
    return cfg


class Settings:
    """Precedence: command-line flag > environment > config file > default."""

    def __init__(self, args: argparse.Namespace, file_cfg: dict):
        self._args = args
        self._file = file_cfg

    def get(self, key: str, default, env_key: str | None = None, cast=None):
        flag = getattr(self._args, key, None)
        if flag is not None:
            return flag
        if env_key:
            env = os.environ.get(env_key)
            if env:
                return cast(env) if cast else env
        if key in self._file:
            value = self._file[key]
            return cast(value) if cast else value
        return default


def _thresholds(s: Settings) -> Thresholds:
    small = float(s.get("delta_small", 0.01))
    large = float(s.get("delta_large", 0.1))
    return Thresholds(
        small=small,
        large=large,
        step_small=float(s.get("step_small", small)),
        step_large=float(s.get("step_large", large)),
    )


def _fusion_params(s: Settings) -> FusionParams:
    return FusionParams(
        alpha=float(s.get("alpha", 0.1)),
        lam=float(s.get("lam", 0.01)),
        beta=float(s.get("beta", 0.01)),
        epsilon=float(s.get("epsilon", 1e-7)),
        n=int(s.get("n", 4)),
    )


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)


# ---------------------------------------------------------------------------
# gen-dataset
# ---------------------------------------------------------------------------


def cmd_gen_dataset(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    s = Settings(args, file_cfg)
    if not os.path.exists(args.input):
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return EXIT_USAGE
    cfg = GenerationConfig(
        delta_g=float(s.get("delta_g", 0.5)),
        window=int(s.get("window", 3)),
        thresholds=_thresholds(s),
    )
    episodes = read_episodes(args.input)
    records, report = generate_dataset(episodes, cfg)
    write_records(records, args.out)
    print(_dump_json(report.as_dict()))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _parse_noise_range(text: str) -> tuple[float, float]:
    try:
        lo, _, hi = text.partition(":")
        return float(lo), float(hi) if hi else float(lo)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH, got {text!r}") from exc


def _backend_for(name: str, s: Settings, script: tuple[str, ...]) -> BackendConfig:
    endpoint = s.get("endpoint", None, env_key=ENV_SUPERVISOR_URL)
    return BackendConfig(
        kind=name,
        endpoint=endpoint,
        timeout_ms=int(s.get("timeout_ms", 5000)),
        retries=int(s.get("retries", 0)),
        script=script if name == "scripted" else (),
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    s = Settings(args, file_cfg)

    noise = s.get("noise", None)
    if isinstance(noise, str):
        noise = _parse_noise_range(noise)
    mode = s.get("noise_mode", "none")
    disturbance = (
        Disturbance(mode=mode, low=noise[0], high=noise[1])
        if noise is not None
        else Disturbance(mode=mode)
    )
    scenario = Scenario(
        grasp_tolerance=float(s.get("grasp_tol", 0.02)),
        step_cap=int(s.get("step_cap", 200)),
        horizon=int(s.get("horizon", 15)),
        delta_g=float(s.get("delta_g", 0.5)),
        disturbance=disturbance,
        thresholds=_thresholds(s),
    )
    fusion = _fusion_params(s)
    if fusion.n > scenario.horizon:
        print(
            f"error: history depth n={fusion.n} exceeds horizon {scenario.horizon}",
            file=sys.stderr,
        )
        return EXIT_USAGE

    script = tuple(args.script or s.get("script", ()))
    names = [v.strip() for v in str(s.get("supervisor", "none")).split(",") if v.strip()]
    for name in names:
        if name not in BACKEND_KINDS:
            print(f"error: unknown supervisor {name!r} (choose from {BACKEND_KINDS})", file=sys.stderr)
            return EXIT_USAGE
    variants = [(name, _backend_for(name, s, script)) for name in names]

    episodes = int(s.get("episodes", 100))
    master_seed = int(s.get("seed", 0))
    seeds = derive_seeds(master_seed, episodes)
    report = evaluate(scenario, seeds, variants, fusion=fusion, jobs=int(s.get("jobs", 1)))

    for metrics in report.variants:
        if metrics.fail_open_incidents:
            print(
                f"warning: variant {metrics.name!r} fell back to unsupervised "
                f"execution {metrics.fail_open_incidents} time(s)",
                file=sys.stderr,
            )

    payload = {
        "command": "simulate",
        "settings": {
            "episodes": episodes,
            "seed": master_seed,
            "noise_mode": disturbance.mode,
            "noise_range": [disturbance.low, disturbance.high],
            "grasp_tolerance": scenario.grasp_tolerance,
            "supervisors": names,
            "fusion": {
                "alpha": fusion.alpha,
                "lam": fusion.lam,
                "beta": fusion.beta,
                "epsilon": fusion.epsilon,
                "n": fusion.n,
            },
        },
        "report": report.as_dict(),
    }
    print(report.format_table())
    if args.out:
        Path(args.out).write_text(_dump_json(payload) + "\n", encoding="utf-8")
    else:
        print(_dump_json(payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# fuse-replay
# ---------------------------------------------------------------------------


def _read_chunk_log(path) -> list[PredictionChunk]:
    chunks = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or "issued_at" not in obj or "actions" not in obj:
                raise SchemaError(path, line_no, "chunk needs 'issued_at' and 'actions'")
            try:
                actions = tuple(ActionVector.from_sequence(a) for a in obj["actions"])
                chunks.append(PredictionChunk(int(obj["issued_at"]), actions))
            except (TypeError, ValueError) as exc:
                raise SchemaError(path, line_no, str(exc)) from exc
    return chunks


def cmd_fuse_replay(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    s = Settings(args, file_cfg)
    if not os.path.exists(args.input):
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return EXIT_USAGE
    fusion = _fusion_params(s)
    chunks = _read_chunk_log(args.input)
    if not chunks:
        print("error: chunk log is empty", file=sys.stderr)
        return EXIT_USAGE
    min_horizon = min(c.horizon for c in chunks)
    if fusion.n > min_horizon:
        print(
            f"error: history depth n={fusion.n} exceeds chunk horizon {min_horizon}",
            file=sys.stderr,
        )
        return EXIT_USAGE

    buffer = PredictionBuffer(capacity=fusion.n)
    lines = []
    for chunk in chunks:
        buffer.push(chunk)
        t = chunk.issued_at
        aligned = buffer.aligned_predictions(t, min(fusion.n, len(buffer)))
        result = fuse(aligned.actions, fusion)
        for note in aligned.notes:
            print(f"t={t}: {note}", file=sys.stderr)
        lines.append(
            json.dumps(
                {
                    "t": t,
                    "used": aligned.count,
                    "fused": list(result.fused.as_tuple()),
                    "pose_weights": list(result.pose_weights),
                    "gripper_weights": list(result.gripper_weights),
                    "similarities": list(result.similarities),
                    "notes": list(aligned.notes),
                },
                sort_keys=True,
            )
        )
    output = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpc",
        description="Keyframe-supervised action correction toolkit "
        f"(fusion kernel: {kernel_name()})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")

    fuse_flags = argparse.ArgumentParser(add_help=False)
    fuse_flags.add_argument("--alpha", type=float, help="similarity sigmoid scale")
    fuse_flags.add_argument("--lam", type=float, help="recency decay rate")
    fuse_flags.add_argument("--beta", type=float, help="weight regularization in [0, 1)")
    fuse_flags.add_argument("--epsilon", type=float, help="cosine stability constant")
    fuse_flags.add_argument("--n", type=int, help="history depth (must not exceed horizon)")

    bin_flags = argparse.ArgumentParser(add_help=False)
    bin_flags.add_argument("--delta-small", dest="delta_small", type=float,
                           help="small-bin threshold (m or rad)")
    bin_flags.add_argument("--delta-large", dest="delta_large", type=float,
                           help="large-bin threshold (m or rad)")
    bin_flags.add_argument("--step-small", dest="step_small", type=float,
                           help="decoded step for Small (defaults to --delta-small)")
    bin_flags.add_argument("--step-large", dest="step_large", type=float,
                           help="decoded step for Large (defaults to --delta-large)")

    gen = sub.add_parser("gen-dataset", parents=[common, bin_flags],
                         help="generate QA records from episode JSONL")
    gen.add_argument("--input", required=True, help="episode JSONL path")
    gen.add_argument("--out", required=True, help="QA JSONL output path")
    gen.add_argument("--delta-g", dest="delta_g", type=float, help="gripper change threshold")
    gen.add_argument("--window", type=int, help="frames kept before each change event")
    gen.set_defaults(func=cmd_gen_dataset)

    simulate = sub.add_parser("simulate", parents=[common, fuse_flags, bin_flags],
                              help="run paired closed-loop evaluations")
    simulate.add_argument("--episodes", type=int, help="episodes per variant (default 100)")
    simulate.add_argument("--seed", type=int, help="master seed (default 0)")
    simulate.add_argument("--noise-mode", dest="noise_mode",
                          choices=["none", "keyframe", "perstep"], help="disturbance mode")
    simulate.add_argument("--noise", help="disturbance amplitude range LOW:HIGH")
    simulate.add_argument("--supervisor", help="comma-separated variants: none,oracle,scripted,http")
    simulate.add_argument("--script", action="append",
                          help="scripted backend response (repeatable, in order)")
    simulate.add_argument("--endpoint", help=f"http backend URL (or ${ENV_SUPERVISOR_URL})")
    simulate.add_argument("--timeout-ms", dest="timeout_ms", type=int, help="http timeout")
    simulate.add_argument("--retries", type=int, help="http retry count")
    simulate.add_argument("--grasp-tol", dest="grasp_tol", type=float, help="grasp tolerance (m)")
    simulate.add_argument("--step-cap", dest="step_cap", type=int, help="max steps per episode")
    simulate.add_argument("--horizon", type=int, help="chunk horizon (default 15)")
    simulate.add_argument("--delta-g", dest="delta_g", type=float, help="keyframe trigger threshold")
    simulate.add_argument("--jobs", type=int, help="episode parallelism (default 1)")
    simulate.add_argument("--out", help="write the JSON report here instead of stdout")
    simulate.set_defaults(func=cmd_simulate)

    replay = sub.add_parser("fuse-replay", parents=[common, fuse_flags],
                            help="fuse a logged chunk stream offline")
    replay.add_argument("--input", required=True, help="chunk log JSONL path")
    replay.add_argument("--out", help="fused output JSONL path (default stdout)")
    replay.set_defaults(func=cmd_fuse_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
