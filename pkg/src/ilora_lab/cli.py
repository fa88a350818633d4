"""Config-driven command line: run experiments, interpolation sweeps, and
diagnostics; persist checkpoints, result matrices, and curves.

Exit codes: 0 success, 2 config error, 3 missing artifact, 4 numeric failure.

File formats
------------
results_matrix.csv   header ``after_task,eval_task,accuracy``; one row per
                     defined result-matrix entry; numbers use 17 significant
                     digits so reloads are bit-faithful.
sweep_t{t}.csv       header ``lambda,Ap,An,Aall``.
metrics.json         keys ``acc`` (per t), ``bwt`` (from t=2),
                     ``general_retention``.
Checkpoints          binary, little-endian: magic ``ILORA1``, u32 format
                     version, u64 parameter count, u32 task index, u64 seed,
                     u8 role (0 working, 1 longterm, 2 backbone), then the
                     payload as float64 in flat parameter order.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from pathlib import Path

import numpy as np

from .bench import ArchConfig, TaskSpec, make_stream, pretrain_backbone
from .connectivity import (default_lambda_grid, landscape_grid, linear_cka,
                           sweep_lambda, weight_distance)
from .metrics import acc_t, bwt_t, general_retention
from .model import backbone_vector, forward
from .numerics import RngState
from .strategies import StrategyConfig, run_sequence

CHECKPOINT_MAGIC = b"ILORA1"
CHECKPOINT_VERSION = 1
ROLE_CODES = {"working": 0, "longterm": 1, "backbone": 2}
ROLE_NAMES = {v: k for k, v in ROLE_CODES.items()}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    pass


# --- checkpoint binary format ----------------------------------------------

_HEADER = struct.Struct("<6sIQIQB")


def save_checkpoint(path, params: np.ndarray, task_index: int, seed: int,
                    role: str) -> None:
    params = np.ascontiguousarray(params, dtype="<f8")
    header = _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, params.size,
                          task_index, seed, ROLE_CODES[role])
    Path(path).write_bytes(header + params.tobytes())


def load_checkpoint(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"truncated checkpoint: {path}")
    magic, version, count, task_index, seed, role = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"bad checkpoint magic in {path}")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if payload.size != count:
        raise ValueError(f"checkpoint payload size mismatch in {path}")
    meta = {"task_index": task_index, "seed": seed, "role": ROLE_NAMES[role]}
    return payload.astype(np.float64), meta


# --- config schema ----------------------------------------------------------

_STREAM_DEFAULTS = {"tasks": 5, "input_dim": 16, "classes": 4,
                    "rotation_deg": 25.0, "cluster_std": 0.5,
                    "mean_shift": 0.5, "class_separation": 2.0,
                    "n_train": 512, "n_eval": 256}
_ARCH_DEFAULTS = {"hidden": 32, "embed": 16, "rank": 8, "alpha": 16.0,
                  "pretrain_epochs": 30, "pretrain_lr": 1e-2,
                  "pretrain_batch": 16}
_STRATEGY_DEFAULTS = {"kind": "SEQ", "gamma": 1.0, "lambda_ema": 0.95,
                      "update_frequency": 1, "lambda_ewc": 100.0, "rho": 0.1,
                      "deploy_slow": True, "stratified_replay": False}
_TRAINING_DEFAULTS = {"epochs": 3, "batch_size": 16, "optimizer": "adam",
                      "base_lr": 1e-2, "warmup_ratio": 0.2}


def _merge_block(name: str, block: dict, defaults: dict) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"config block {name!r} must be an object")
    unknown = set(block) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(block)
    return merged


def validate_config(raw: dict) -> dict:
    """Strict-schema validation; returns the fully materialized config."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    known_top = {"seed", "stream", "arch", "strategy", "training", "out_dir"}
    unknown = set(raw) - known_top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    cfg = {
        "seed": int(raw.get("seed", 0)),
        "stream": _merge_block("stream", raw.get("stream", {}), _STREAM_DEFAULTS),
        "arch": _merge_block("arch", raw.get("arch", {}), _ARCH_DEFAULTS),
        "strategy": _merge_block("strategy", raw.get("strategy", {}),
                                 _STRATEGY_DEFAULTS),
        "training": _merge_block("training", raw.get("training", {}),
                                 _TRAINING_DEFAULTS),
        "out_dir": raw.get("out_dir"),
    }
    if cfg["strategy"]["kind"] not in ("SEQ", "ER", "EWC", "AGEM", "MTL", "ILORA"):
        raise ConfigError(f"unknown strategy kind {cfg['strategy']['kind']!r}")
    return cfg


def _strategy_config(cfg: dict) -> StrategyConfig:
    s, tr = cfg["strategy"], cfg["training"]
    try:
        return StrategyConfig(kind=s["kind"], epochs=tr["epochs"],
                              batch_size=tr["batch_size"], gamma=s["gamma"],
                              lambda_ema=s["lambda_ema"],
                              update_frequency=s["update_frequency"],
                              lambda_ewc=s["lambda_ewc"], rho=s["rho"],
                              optimizer=tr["optimizer"],
                              base_lr=tr["base_lr"],
                              warmup_ratio=tr["warmup_ratio"],
                              deploy_slow=s["deploy_slow"],
                              stratified_replay=s["stratified_replay"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _task_spec(cfg: dict) -> TaskSpec:
    st = cfg["stream"]
    return TaskSpec(n_train=st["n_train"], n_eval=st["n_eval"],
                    classes=st["classes"], input_dim=st["input_dim"],
                    cluster_std=st["cluster_std"],
                    rotation_deg=st["rotation_deg"],
                    mean_shift=st["mean_shift"],
                    class_separation=st["class_separation"])


def _arch_config(cfg: dict) -> ArchConfig:
    a = cfg["arch"]
    return ArchConfig(hidden=a["hidden"], embed=a["embed"], rank=a["rank"],
                      alpha=a["alpha"], pretrain_epochs=a["pretrain_epochs"],
                      pretrain_lr=a["pretrain_lr"],
                      pretrain_batch=a["pretrain_batch"])


def rebuild_environment(cfg: dict):
    """Deterministically regenerate (stream, backbone network) from a config."""
    seed = cfg["seed"]
    stream = make_stream(seed, cfg["stream"]["tasks"], _task_spec(cfg))
    net = pretrain_backbone(stream.anchor[0], _arch_config(cfg), seed,
                            classes=cfg["stream"]["classes"])
    return stream, net


# --- output writers ---------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_results_matrix(path, R) -> None:
    lines = ["after_task,eval_task,accuracy"]
    for t, j, v in R.defined_entries():
        lines.append(f"{t},{j},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_metrics(path, R, gen_retention: float) -> None:
    payload = {
        "acc": [acc_t(R, t) for t in range(1, R.T + 1)],
        "bwt": [bwt_t(R, t) for t in range(2, R.T + 1)],
        "general_retention": gen_retention,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


# --- commands ---------------------------------------------------------------

def cmd_run(config_path: str, seed_override: int | None = None,
            out_override: str | None = None) -> int:
    try:
        raw = json.loads(Path(config_path).read_text())
    except FileNotFoundError:
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return EXIT_MISSING
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = validate_config(raw)
        if seed_override is not None:
            cfg["seed"] = seed_override
        if out_override is not None:
            cfg["out_dir"] = out_override
        if not cfg["out_dir"]:
            raise ConfigError("out_dir is required (config key or --out)")
        strategy = _strategy_config(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_echo.json").write_text(json.dumps(cfg, indent=2) + "\n")

    try:
        stream, net = rebuild_environment(cfg)
        seed = cfg["seed"]
        record = run_sequence(strategy, stream.pairs, net, RngState(seed),
                              seed=seed)
        R = record.result_matrix
        write_results_matrix(out / "results_matrix.csv", R)
        save_checkpoint(out / "backbone.bin", backbone_vector(net), 0, seed,
                        "backbone")
        for t, theta in enumerate(record.checkpoints, start=1):
            save_checkpoint(out / f"task{t}_working.bin", theta, t, seed,
                            "working")
        if record.slow_checkpoints is not None:
            for t, theta in enumerate(record.slow_checkpoints, start=1):
                save_checkpoint(out / f"task{t}_longterm.bin", theta, t, seed,
                                "longterm")
        final = (record.slow_checkpoints[-1]
                 if record.slow_checkpoints is not None and strategy.deploy_slow
                 else record.checkpoints[-1])
        gen = general_retention(net, record.initial_theta, final,
                                stream.anchor[1])
        write_metrics(out / "metrics.json", R, gen)
    except ArithmeticError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _load_run_dir(run_dir: str):
    out = Path(run_dir)
    echo = out / "config_echo.json"
    if not echo.exists():
        raise FileNotFoundError(f"missing artifact: {echo}")
    cfg = validate_config(json.loads(echo.read_text()))
    return out, cfg


def _load_params(out: Path, t: int, role: str) -> np.ndarray:
    path = out / f"task{t}_{role}.bin"
    if not path.exists():
        raise FileNotFoundError(f"missing artifact: {path}")
    params, _ = load_checkpoint(path)
    return params


def cmd_sweep_lambda(run_dir: str, transition: int, points: int = 21,
                     role: str = "working") -> int:
    try:
        out, cfg = _load_run_dir(run_dir)
        theta_a = _load_params(out, transition, role)
        theta_b = _load_params(out, transition + 1, role)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stream, net = rebuild_environment(cfg)
    evals = [ev for _, ev in stream.pairs]
    if transition + 1 > len(evals):
        print(f"error: transition {transition} exceeds task count",
              file=sys.stderr)
        return EXIT_CONFIG
    sweep = sweep_lambda(theta_a, theta_b, net, evals[:transition],
                         evals[transition], default_lambda_grid(points),
                         transition=transition)
    lines = ["lambda,Ap,An,Aall"]
    for lam, ap, an, aall in zip(sweep.lambda_grid, sweep.Ap, sweep.An,
                                 sweep.Aall):
        lines.append(f"{_fmt(lam)},{_fmt(ap)},{_fmt(an)},{_fmt(aall)}")
    (out / f"sweep_t{transition}.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_probe(run_dir: str, kind: str, transition: int = 1,
              grid_extent: float = 1.5, grid_points: int = 11) -> int:
    try:
        out, cfg = _load_run_dir(run_dir)
        stream, net = rebuild_environment(cfg)
        T = len(stream)
        has_slow = (out / "task1_longterm.bin").exists()

        if kind == "wd":
            lines = ["transition,WD_w,WD_l"]
            for t in range(1, T):
                ww = weight_distance(_load_params(out, t, "working"),
                                     _load_params(out, t + 1, "working"))
                if has_slow:
                    wl = weight_distance(_load_params(out, t, "longterm"),
                                         _load_params(out, t + 1, "longterm"))
                else:
                    wl = ww  # single-memory run: deployed == working
                lines.append(f"{t},{_fmt(ww)},{_fmt(wl)}")
            (out / "wd.csv").write_text("\n".join(lines) + "\n")
        elif kind == "cka":
            probe = stream.anchor[1]
            lines = ["transition,cka"]
            for t in range(1, T):
                _, za = forward(net, _load_params(out, t, "working"), probe.X)
                _, zb = forward(net, _load_params(out, t + 1, "working"),
                                probe.X)
                lines.append(f"{t},{_fmt(linear_cka(za, zb))}")
            (out / "cka.csv").write_text("\n".join(lines) + "\n")
        elif kind == "landscape":
            t = transition
            if t < 1 or t + 1 > T:
                raise ConfigError(f"landscape transition {t} out of range")
            theta0 = _load_params(out, t, "working")
            d1 = _load_params(out, t + 1, "working") - theta0
            if has_slow:
                d2 = _load_params(out, t + 1, "longterm") - theta0
            else:
                raise FileNotFoundError(
                    "missing artifact: longterm checkpoints "
                    "(landscape probe needs a dual-memory run)")
            coords = np.linspace(-grid_extent, grid_extent, grid_points)
            grid = landscape_grid(theta0, d1, d2, coords, coords, net,
                                  stream.anchor[1])
            lines = ["a,b,value"]
            for i, a in enumerate(grid.a_grid):
                for j, b in enumerate(grid.b_grid):
                    lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(grid.values[i, j])}")
            (out / "landscape.csv").write_text("\n".join(lines) + "\n")
        else:
            raise ConfigError(f"unknown probe kind {kind!r}")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ilora-lab",
        description="continual-learning experiments on synthetic task streams")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full continual experiment")
    p_run.add_argument("config", help="JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep-lambda",
                             help="interpolation sweep between two checkpoints")
    p_sweep.add_argument("run_dir")
    p_sweep.add_argument("--transition", type=int, required=True)
    p_sweep.add_argument("--points", type=int, default=21)
    p_sweep.add_argument("--role", choices=["working", "longterm"],
                         default="working")

    p_probe = sub.add_parser("probe", help="diagnostics over a finished run")
    p_probe.add_argument("run_dir")
    p_probe.add_argument("kind", choices=["wd", "cka", "landscape"])
    p_probe.add_argument("--transition", type=int, default=1)
    p_probe.add_argument("--grid-extent", type=float, default=1.5)
    p_probe.add_argument("--grid-points", type=int, default=11)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.seed, args.out)
    if args.command == "sweep-lambda":
        return cmd_sweep_lambda(args.run_dir, args.transition, args.points,
                                args.role)
    return cmd_probe(args.run_dir, args.kind, args.transition,
                     args.grid_extent, args.grid_points)


if __name__ == "__main__":
    sys.exit(main())
