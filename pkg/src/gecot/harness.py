"""Experiment driver: configs, Monte-Carlo campaigns, reports and the CLI.

A campaign is a pure function of (config, master seed): per-trial
generators derive from ``SeedSequence([seed, n, trial, role])`` so any
trial reproduces in isolation, reports serialize with sorted keys and no
timestamps, and rerunning a campaign yields byte-identical files.

Config files are JSON with snake_case keys matching
:class:`ExperimentConfig`; the ``OTCAP_SEED`` environment variable
overrides the configured seed.  The default parameter schedule shrinks
``alpha``, ``eps_typ`` and ``gamma`` like ``c/sqrt(n)`` so the per-use
rate k/n climbs toward the ``p_star * C(W0)`` reference as n grows.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import adversary, subset_codec
from .channel import GecSpec, MalformedChannel, capacity_solve, load_gec
from .interactive_hashing import ih_run
from .protocol import ProtocolParams, derive_params, run_session

DEFAULT_SCHEDULE_C1 = 0.25
DEFAULT_SCHEDULE_C2 = 0.1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    channel: str
    n_grid: list[int] = field(default_factory=lambda: [20])
    trials: int = 10_000
    seed: int = 0
    mode: str = "honest"  # honest | case1 | case2 | good_fraction | privacy
    alpha: float | None = None
    eps_typ: float | None = None
    gamma: float | None = None
    schedule_c1: float = DEFAULT_SCHEDULE_C1
    schedule_c2: float = DEFAULT_SCHEDULE_C2
    out_dir: str | None = None
    write_transcripts: bool = False
    decode: str = "auto"  # search | genie | auto
    bob_choice: int | None = None
    alice_strategy: str = "indifferent"


@dataclass(frozen=True)
class RateRow:
    n: int
    k: int
    rate: float
    bound: float
    trials: int
    completed: int
    abort_rate: float | None
    correctness_failure_rate: float | None


@dataclass(frozen=True)
class RateReport:
    channel: dict
    capacity_bits: float
    seed: int
    mode: str
    rows: list[RateRow]

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["rows"] = [asdict(r) for r in self.rows]
        return doc


@dataclass(frozen=True)
class CampaignResult:
    rate_report: RateReport
    attack_reports: list[adversary.AttackReport]


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "channel" not in doc:
        raise ConfigError("config needs a 'channel' path")
    cfg = ExperimentConfig(**doc)
    if any(n % 2 or n < 2 for n in cfg.n_grid):
        raise ConfigError("every n in the grid must be even and positive")
    if cfg.trials < 0:
        raise ConfigError("trials must be non-negative")
    if cfg.mode not in ("honest", "case1", "case2", "good_fraction", "privacy"):
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    if cfg.decode not in ("search", "genie", "auto"):
        raise ConfigError(f"unknown decode setting {cfg.decode!r}")
    env_seed = os.environ.get("OTCAP_SEED")
    if env_seed is not None:
        cfg.seed = int(env_seed)
    return cfg


def schedule_params(cfg: ExperimentConfig, n: int, p_star: float, stats) -> ProtocolParams:
    """Per-n parameters: explicit values win, otherwise the c/sqrt(n) schedule."""
    alpha = cfg.alpha if cfg.alpha is not None else cfg.schedule_c1 / math.sqrt(n)
    eps = cfg.eps_typ if cfg.eps_typ is not None else cfg.schedule_c2 / math.sqrt(n)
    gamma = cfg.gamma if cfg.gamma is not None else cfg.schedule_c2 / math.sqrt(n)
    return derive_params(n, p_star, stats, alpha, eps, gamma)


def trial_rngs(seed: int, n: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    alice = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, n, trial, 0])))
    bob = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, n, trial, 1])))
    return alice, bob


def _decode_mode(cfg: ExperimentConfig, gec: GecSpec, params: ProtocolParams) -> str:
    if cfg.decode != "auto":
        return cfg.decode
    space = gec.inner.input_alphabet_size**params.mu_n
    return "search" if space <= 1 << 12 else "genie"


def run_campaign(cfg: ExperimentConfig) -> CampaignResult:
    gec = load_gec(cfg.channel)
    input_dist, stats = capacity_solve(gec.inner)
    bound = gec.erasure_prob * stats.capacity_bits
    rows: list[RateRow] = []
    attack_reports: list[adversary.AttackReport] = []
    transcripts: list[tuple[int, int, str]] = []

    for n in cfg.n_grid:
        params = schedule_params(cfg, n, gec.erasure_prob, stats)
        if cfg.mode == "honest":
            completed = 0
            correct = 0
            aborted = 0
            mode = _decode_mode(cfg, gec, params)
            for trial in range(cfg.trials):
                alice_rng, bob_rng = trial_rngs(cfg.seed, n, trial)
                result = run_session(
                    gec, input_dist, params, alice_rng, bob_rng, cfg.bob_choice, decode_mode=mode
                )
                if result.completed:
                    completed += 1
                    correct += result.correct
                else:
                    aborted += 1
                if cfg.write_transcripts:
                    transcripts.append((n, trial, result.transcript.to_jsonl()))
            rows.append(
                RateRow(
                    n=n,
                    k=params.k,
                    rate=params.rate,
                    bound=bound,
                    trials=cfg.trials,
                    completed=completed,
                    abort_rate=aborted / cfg.trials if cfg.trials else None,
                    correctness_failure_rate=(completed - correct) / completed if completed else None,
                )
            )
        else:
            rows.append(
                RateRow(
                    n=n,
                    k=params.k,
                    rate=params.rate,
                    bound=bound,
                    trials=cfg.trials,
                    completed=0,
                    abort_rate=None,
                    correctness_failure_rate=None,
                )
            )
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, n])))
            if cfg.mode == "case1":
                attack_reports.append(adversary.attack_case1(gec, input_dist, params, cfg.trials, rng))
            elif cfg.mode == "case2":
                attack_reports.append(adversary.attack_case2_entropy(gec, input_dist, params, cfg.trials, rng))
            elif cfg.mode == "good_fraction":
                u_r = math.ceil(2 * params.alpha * params.n)
                codec = subset_codec.codec_params(n // 2, params.beta_n)
                exhaustive = codec.total <= 200_000 and codec.m_bits <= 20
                attack_reports.append(
                    adversary.attack_good_subset_fraction(
                        params, u_r, trials=cfg.trials, rng=rng, exhaustive=exhaustive
                    )
                )
            elif cfg.mode == "privacy":
                try:
                    alice_cls = adversary.ALICE_STRATEGIES[cfg.alice_strategy]
                except KeyError as exc:
                    raise ConfigError(f"unknown alice strategy {cfg.alice_strategy!r}") from exc
                attack_reports.append(
                    adversary.bob_privacy_advantage(gec, input_dist, params, alice_cls, cfg.trials, rng)
                )

    report = RateReport(
        channel={"path": cfg.channel, "p_star": gec.erasure_prob},
        capacity_bits=stats.capacity_bits,
        seed=cfg.seed,
        mode=cfg.mode,
        rows=rows,
    )
    if cfg.out_dir:
        _write_outputs(cfg, report, attack_reports, transcripts)
    return CampaignResult(rate_report=report, attack_reports=attack_reports)


def _write_outputs(cfg, report, attack_reports, transcripts) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    if attack_reports:
        with open(os.path.join(cfg.out_dir, "attacks.json"), "w", encoding="utf-8") as fh:
            json.dump([r.to_json() for r in attack_reports], fh, sort_keys=True, indent=2)
            fh.write("\n")
    if transcripts:
        tdir = os.path.join(cfg.out_dir, "transcripts")
        os.makedirs(tdir, exist_ok=True)
        for n, trial, text in transcripts:
            with open(os.path.join(tdir, f"session_n{n}_t{trial}.jsonl"), "w", encoding="utf-8") as fh:
                fh.write(text)


def _cmd_capacity(args) -> int:
    gec = load_gec(args.channel)
    dist, stats = capacity_solve(gec.inner)
    print(f"capacity_bits={stats.capacity_bits:.9f}")
    print(f"h_x={stats.h_x:.9f}")
    print(f"h_x_given_y0={stats.h_x_given_y0:.9f}")
    print(f"p_star={gec.erasure_prob}")
    print(f"ot_rate_reference={gec.erasure_prob * stats.capacity_bits:.9f}")
    print("input_distribution=" + json.dumps([round(float(v), 9) for v in dist.probs]))
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_campaign(cfg)
    print(f"{'n':>6} {'k':>5} {'rate':>9} {'bound':>9} {'abort':>8} {'fail':>8}")
    for row in result.rate_report.rows:
        abort = f"{row.abort_rate:.4f}" if row.abort_rate is not None else "-"
        fail = f"{row.correctness_failure_rate:.4f}" if row.correctness_failure_rate is not None else "-"
        print(f"{row.n:>6} {row.k:>5} {row.rate:>9.4f} {row.bound:>9.4f} {abort:>8} {fail:>8}")
    for rep in result.attack_reports:
        print(json.dumps(rep.to_json(), sort_keys=True))
    if cfg.out_dir:
        print(f"reports written to {cfg.out_dir}")
    return 0


def _cmd_attack(args) -> int:
    cfg = load_config(args.config)
    if args.name not in ("case1", "case2", "good_fraction", "privacy"):
        raise ConfigError(f"unknown attack {args.name!r}")
    cfg.mode = args.name
    result = run_campaign(cfg)
    for rep in result.attack_reports:
        print(json.dumps(rep.to_json(), sort_keys=True, indent=2))
    return 0


def _cmd_codec(args) -> int:
    params = subset_codec.codec_params(args.n, args.l)
    two = (1 << params.m_bits) - params.total
    one = params.total - two
    print(f"m_bits={params.m_bits}")
    print(f"total={params.total}")
    print(json.dumps({"preimage_histogram": {"1": one, "2": two}}, sort_keys=True))
    return 0


def _cmd_ih_demo(args) -> int:
    seed = int(os.environ.get("OTCAP_SEED", "0"))
    rng = np.random.Generator(np.random.PCG64(seed))
    w = rng.integers(0, 2, size=args.m, dtype=np.uint8)
    transcript, outcome = ih_run(args.m, w, rng)
    print(f"input_w={''.join(map(str, w))}")
    for i, (q, b) in enumerate(zip(transcript.queries, transcript.responses)):
        print(f"query[{i}]={q:0{args.m}b} response={b}")
    print(f"w0={''.join(map(str, outcome.w0))}")
    print(f"w1={''.join(map(str, outcome.w1))}")
    print(f"d={outcome.d}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gecot", description="erasure-channel OT bench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity of a channel spec")
    p.add_argument("channel")
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("run", help="run a campaign from a config file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("attack", help="run a named attack campaign")
    p.add_argument("name")
    p.add_argument("config")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("codec", help="subset-encoding parameters for (N, L)")
    p.add_argument("n", type=int)
    p.add_argument("l", type=int)
    p.set_defaults(func=_cmd_codec)

    p = sub.add_parser("ih-demo", help="one interactive hashing session")
    p.add_argument("m", type=int)
    p.set_defaults(func=_cmd_ih_demo)
    return parser


def cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (
        ConfigError,
        FileNotFoundError,
        MalformedChannel,
        json.JSONDecodeError,
        subset_codec.InvalidSubset,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to a distinct exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
