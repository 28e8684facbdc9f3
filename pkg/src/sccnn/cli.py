"""Command-line entry point.

    sccnn train     --train T --dev D --embeddings E --checkpoint C [--scale 3]
    sccnn evaluate  --test T --checkpoint C
    sccnn predict   --test T --checkpoint C [--out FILE]
    sccnn quantify  --test T --topic --checkpoint C [--out FILE]
    sccnn gradcheck [--ordinal] [--seed N]

Settings may also come from a ``key = value`` file given with ``--config``;
flags win over the file. Exit codes: 0 success, 1 usage, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import DataError, Scale, read_dataset
from .embed import read_embeddings
from .gradcheck import run_gradcheck
from .metrics import format_metrics, render_table, score_report
from .model import load_checkpoint, save_checkpoint
from .quant import (classify_and_count, evaluate_quant, gold_distribution, topic_groups,
                    write_distributions, format_distributions)
from .text_prep import preprocess
from .train import NumericError, TrainConfig, fit

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("train", "evaluate", "predict", "quantify", "gradcheck")
SELECT_CHOICES = ("f1pn", "acc", "avgrec", "mae")

log = logging.getLogger("sccnn")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    train: Path | None = None
    dev: Path | None = None
    test: Path | None = None
    embeddings: Path | None = None
    checkpoint: Path | None = None
    out: Path | None = None
    scale: Scale | None = None
    topic: bool = False
    ordinal: bool = False
    seed: int = 42
    training: TrainConfig = field(default_factory=TrainConfig)

    def validate(self):
        required = {
            "train": ("train", "dev", "embeddings", "checkpoint"),
            "evaluate": ("test", "checkpoint"),
            "predict": ("test", "checkpoint"),
            "quantify": ("test", "checkpoint"),
            "gradcheck": (),
        }[self.command]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ConfigError(f"{self.command} needs --{' --'.join(missing)}")
        if self.command == "quantify" and not self.topic:
            raise ConfigError("quantify needs topic-bearing data (--topic)")


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _windows(v: str) -> tuple[int, ...]:
    hs = tuple(int(x) for x in v.split(",") if x.strip())
    if not hs or min(hs) < 1:
        raise ValueError(f"bad window list {v!r}")
    return hs


def _select(v: str) -> str:
    if v not in SELECT_CHOICES:
        raise ValueError(f"must be one of {', '.join(SELECT_CHOICES)}")
    return v


def _prob(v: str) -> float:
    x = float(v)
    if not 0.0 <= x < 1.0:
        raise ValueError("must lie in [0, 1)")
    return x


def _positive(v: str) -> int:
    x = int(v)
    if x < 1:
        raise ValueError("must be a positive integer")
    return x


# key -> (parser, where it lives: run config attribute or TrainConfig attribute)
KEYS = {
    "train": (Path, "run"), "dev": (Path, "run"), "test": (Path, "run"),
    "embeddings": (Path, "run"), "checkpoint": (Path, "run"), "out": (Path, "run"),
    "scale": (Scale.from_points, "run"), "topic": (_bool, "run"), "ordinal": (_bool, "run"),
    "seed": (int, "run"),
    "epochs": (_positive, "max_epochs"), "batch_size": (_positive, "batch_size"),
    "dropout": (_prob, "dropout"), "l2": (float, "l2"), "filters": (_windows, "window_sizes"),
    "maps": (_positive, "maps_per_window"), "max_len": (_positive, "n"), "dim": (_positive, "k"),
    "select": (_select, "selection_metric"), "patience": (int, "patience"),
    "freeze_embeddings": (_bool, "freeze_embeddings"),
}


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key = key.strip().replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def load_config(command: str, config_text: str = "", overrides: dict[str, str] | None = None) -> RunConfig:
    """Resolve file values and flag overrides (flags win) into a RunConfig."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values = parse_config_text(config_text)
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = value
    cfg = RunConfig(command)
    for key, raw in values.items():
        parser, target = KEYS[key]
        try:
            value = parser(raw) if isinstance(raw, str) else raw
        except (ValueError, DataError) as e:
            raise ConfigError(f"{key}: {e}") from None
        if target == "run":
            setattr(cfg, key, value)
        else:
            setattr(cfg.training, target, value)
    cfg.training.seed = cfg.seed
    cfg.training.ordinal = cfg.ordinal
    return cfg


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _scale_for(cfg: RunConfig, model) -> Scale:
    if cfg.scale is not None and cfg.scale is not model.scale:
        raise DataError(f"checkpoint predicts a {model.scale.value}-point scale, "
                        f"--scale is {cfg.scale.value}")
    return model.scale


def cmd_train(cfg: RunConfig) -> int:
    scale = cfg.scale or Scale.THREE
    train = read_dataset(cfg.train, scale, cfg.topic)
    dev = read_dataset(cfg.dev, scale, cfg.topic)
    vocab = {tok for t in (*train.tweets, *dev.tweets) for tok in preprocess(t.text)}
    table = read_embeddings(cfg.embeddings, cfg.training.k, keep=vocab)
    lines = []

    def on_epoch(line):
        lines.append(line)
        print(line, flush=True)

    result = fit(cfg.training, train, dev, table, on_epoch)
    save_checkpoint(result.best_model, cfg.checkpoint)
    if cfg.out is not None:
        cfg.out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    print(f"best_epoch={result.best_epoch} dev_{result.metric}={result.best_score:.6f}"
          f"{' stopped_early=true' if result.stopped_early else ''}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    model = load_checkpoint(cfg.checkpoint)
    scale = _scale_for(cfg, model)
    test = read_dataset(cfg.test, scale, cfg.topic)
    scores = score_report(model.predict(test.tweets), test.labels, scale)
    sys.stderr.write(render_table(scores))
    _emit(format_metrics(scores), cfg.out)
    return EXIT_OK


def cmd_predict(cfg: RunConfig) -> int:
    model = load_checkpoint(cfg.checkpoint)
    scale = _scale_for(cfg, model)
    test = read_dataset(cfg.test, scale, cfg.topic)
    preds = model.predict(test.tweets)
    _emit("".join(f"{t.id}\t{scale.label_name(p)}\n" for t, p in zip(test.tweets, preds)), cfg.out)
    return EXIT_OK


def cmd_quantify(cfg: RunConfig) -> int:
    model = load_checkpoint(cfg.checkpoint)
    scale = _scale_for(cfg, model)
    test = read_dataset(cfg.test, scale, has_topic=True)
    groups = topic_groups(test)
    pred = classify_and_count(groups, model, scale)
    gold = {g.topic: gold_distribution(g, scale) for g in groups}
    sizes = {g.topic: len(g.tweets) for g in groups}
    if cfg.out is None:
        sys.stdout.write(format_distributions(pred))
    else:
        write_distributions(pred, cfg.out)
    scores = {m: evaluate_quant(gold, pred, m, sizes) for m in ("KLD", "AE", "RAE", "EMD")}
    sys.stdout.write(format_metrics(scores))
    return EXIT_OK


def cmd_gradcheck(cfg: RunConfig) -> int:
    head = "ordinal" if cfg.ordinal else "softmax"
    reports = run_gradcheck(range(cfg.seed, cfg.seed + 10), head=head, l2=cfg.training.l2)
    worst = 0.0
    for seed, r in zip(range(cfg.seed, cfg.seed + 10), reports):
        print(f"seed={seed} max_rel_error={r.max_rel_error:.3e}")
        worst = max(worst, r.max_rel_error)
    print(f"max_rel_error={worst:.3e} {'ok' if worst < 1e-4 else 'FAILED'}")
    return EXIT_OK if worst < 1e-4 else EXIT_NUMERIC


HANDLERS = {"train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict,
            "quantify": cmd_quantify, "gradcheck": cmd_gradcheck}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sccnn", description="Convolutional tweet sentiment classifier and quantifier.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path)
    for flag in ("train", "dev", "test", "embeddings", "checkpoint", "out"):
        p.add_argument(f"--{flag}", metavar="PATH")
    p.add_argument("--scale", choices=("2", "3", "5"))
    p.add_argument("--topic", action="store_const", const="true")
    p.add_argument("--ordinal", action="store_const", const="true")
    p.add_argument("--freeze-embeddings", action="store_const", const="true")
    p.add_argument("--seed")
    p.add_argument("--epochs")
    p.add_argument("--batch-size")
    p.add_argument("--dropout")
    p.add_argument("--l2")
    p.add_argument("--filters", metavar="H1,H2,...")
    p.add_argument("--maps")
    p.add_argument("--max-len")
    p.add_argument("--dim", help="embedding dimension k (default 200)")
    p.add_argument("--patience")
    p.add_argument("--select", choices=SELECT_CHOICES)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items()
                 if k in KEYS and v is not None}
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = load_config(args.command, text, overrides)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
