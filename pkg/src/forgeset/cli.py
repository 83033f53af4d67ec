"""Config-driven experiment harness.

Verbs: gen, train, select, unlearn-eval, oracle, transfer, coreset,
mixture, report. Each reads one JSON config (--config), works inside an
output directory (--out or config.out), and re-running with the same
config reproduces identical report bytes; wall-clock timings live only
in run_record.json. FORGESET_THREADS caps how many independent
(mask, method, seed) cells run in parallel; results are aggregated in a
fixed order so the report does not depend on scheduling.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 guard
violation.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import config as cfgmod
from .blo import BLOConfig, Direction, Granularity, LowerInit, select
from .data import (
    Dataset,
    ForgetMask,
    GroupLabels,
    Split,
    gen_biased,
    gen_blobs,
    load_csv,
    save_csv,
)
from .errors import (
    BadSpec,
    BudgetError,
    ConfigError,
    DivergenceError,
    EmptyBatch,
    EmptyFile,
    EmptyRetainSet,
    FileError,
    ForgesetError,
    NoConvergence,
    ParseError,
    ShapeError,
    TooLarge,
)
from .metrics import EvalReport, accuracy, avg_gap, evaluate
from .models import Activation, ModelParams, Scope, load_checkpoint, save_checkpoint
from .numcore import RngStream
from .oracle import enumerate_worst, save_ranking_csv
from .unlearn import Method, UnlearnConfig, apply_method, retrain, train

REPORT_SCHEMA = "forgeset.report.v1"
PER_SEED_SCHEMA = "forgeset.per-seed.v1"
THREADS_ENV = "FORGESET_THREADS"

# Stream ids carving independent RNG arms out of the experiment seed.
_S_TRAIN_DATA = 1
_S_TEST_DATA = 2
_S_PRETRAIN = 3
_S_SELECT = 4
_S_RANDOM_MASK = 100  # + eval seed
_S_MIXTURE = 300  # + eval seed mixed with grid point
_S_CORESET_MASK = 400
_S_TRANSFER_MASK = 450
_S_TRANSFER_MODEL = 500  # + model index
_S_EVAL = 5000  # + eval seed


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    """Run fn over items, possibly in parallel; results in input order."""
    workers = _threads()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _root_rng(cfg) -> RngStream:
    return RngStream(cfg["seed"])


def _out_dir(cfg, out_override) -> Path:
    out = Path(out_override) if out_override else Path(cfg["out"])
    if not out.parent.exists():
        raise FileError(f"output location {out.parent} does not exist")
    out.mkdir(exist_ok=True)
    return out


def _model_spec(model_cfg) -> tuple[list[int], Activation]:
    return list(model_cfg["sizes"]), Activation(model_cfg["activation"])


def _make_datasets(cfg) -> tuple[Dataset, Dataset, GroupLabels | None]:
    ds = cfg["dataset"]
    root = _root_rng(cfg)
    if ds["kind"] == "blobs":
        train_ds = gen_blobs(
            ds["n_per_class"], ds["classes"], ds["dim"], ds["spread"], root.derive(_S_TRAIN_DATA)
        )
        test_ds = gen_blobs(
            ds["test_n_per_class"],
            ds["classes"],
            ds["dim"],
            ds["spread"],
            root.derive(_S_TEST_DATA),
            Split.TEST,
        )
        return train_ds, test_ds, None
    if ds["kind"] == "biased":
        train_ds, groups = gen_biased(ds["n"], ds["correlation"], root.derive(_S_TRAIN_DATA))
        test_ds, _ = gen_biased(
            ds["test_n"], ds["correlation"], root.derive(_S_TEST_DATA), Split.TEST
        )
        return train_ds, test_ds, groups
    train_ds = load_csv(ds["train_path"])
    test_ds = load_csv(ds["test_path"], Split.TEST)
    return train_ds, test_ds, None


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise FileError(f"{path} not found; run `forgeset {hint}` first")
    return path


def _read_train_test(out: Path) -> tuple[Dataset, Dataset]:
    train_ds = load_csv(_require(out / "train.csv", "gen"))
    test_ds = load_csv(_require(out / "test.csv", "gen"), Split.TEST)
    return train_ds, test_ds


def _pretrain(cfg, train_ds: Dataset) -> ModelParams:
    sizes, activation = _model_spec(cfg["model"])
    return train(
        train_ds,
        sizes,
        cfg["pretrain"]["epochs"],
        cfg["pretrain"]["lr"],
        _root_rng(cfg).derive(_S_PRETRAIN),
        activation,
    )


def _ensure_model(cfg, out: Path, train_ds: Dataset) -> ModelParams:
    path = out / "model.npz"
    if path.exists():
        return load_checkpoint(path)
    theta = _pretrain(cfg, train_ds)
    save_checkpoint(theta, path)
    return theta


def _unlearn_config(method_cfg, rng: RngStream) -> UnlearnConfig:
    return UnlearnConfig(
        method=Method(method_cfg["method"]),
        lambda_reg=method_cfg["lambda_reg"],
        lr=method_cfg["lr"],
        epochs=method_cfg["epochs"],
        l1_coef=method_cfg["l1_coef"],
        scope=Scope(method_cfg["scope"]),
        rng=rng,
    )


def _retrain_method_cfg(cfg) -> dict:
    for mth in cfg["unlearn"]:
        if mth["method"] == "retrain":
            return mth
    raise ConfigError("config.unlearn must include a retrain entry (the gap reference)")


def _write_resolved(cfg, out: Path) -> None:
    (out / "resolved_config.json").write_text(cfgmod.resolved_json(cfg))


def _digest_files(paths) -> str:
    h = hashlib.sha256()
    for p in sorted(Path(p) for p in paths):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# command bodies


def _cmd_gen(cfg, out: Path) -> None:
    train_ds, test_ds, groups = _make_datasets(cfg)
    save_csv(train_ds, out / "train.csv", groups)
    save_csv(test_ds, out / "test.csv")
    _write_resolved(cfg, out)
    click.echo(f"wrote {out / 'train.csv'} ({train_ds.n} rows) and {out / 'test.csv'} ({test_ds.n} rows)")


def _cmd_train(cfg, out: Path) -> None:
    train_ds, test_ds = _read_train_test(out)
    theta = _pretrain(cfg, train_ds)
    save_checkpoint(theta, out / "model.npz")
    _write_resolved(cfg, out)
    click.echo(
        f"trained {cfg['model']['sizes']}: train acc "
        f"{accuracy(theta, train_ds.X, train_ds.y):.2f}, test acc "
        f"{accuracy(theta, test_ds.X, test_ds.y):.2f}"
    )


def _selection_config(cfg, direction: str) -> BLOConfig:
    sel = cfg["selection"]
    return BLOConfig(
        gamma=sel["gamma"],
        alpha=sel["alpha"],
        beta=sel["beta"],
        inner_epochs=sel["inner_epochs"],
        outer_iters=sel["outer_iters"],
        granularity=Granularity(sel["granularity"]),
        direction=Direction(direction),
        lower_init=LowerInit(sel["lower_init"]),
        init_random_binary=sel["init_random_binary"],
        rng=_root_rng(cfg).derive(_S_SELECT),
    )


def _selection_budget(cfg, train_ds: Dataset) -> int:
    """Budget in score coordinates: samples, or classes under class granularity."""
    if cfg["selection"]["granularity"] == "class":
        explicit = cfg["forget"]["m"]
        if explicit is not None:
            return explicit
        return max(1, round(cfg["forget"]["ratio"] * train_ds.classes))
    return cfgmod.forget_size(cfg, train_ds.n)


def _cmd_select(cfg, out: Path) -> None:
    train_ds, _ = _read_train_test(out)
    theta_o = _ensure_model(cfg, out, train_ds)
    class_level = cfg["selection"]["granularity"] == "class"
    m = _selection_budget(cfg, train_ds)
    sample_mask_size = None
    for direction in cfg["selection"]["directions"]:
        result = select(train_ds, m, theta_o, _selection_config(cfg, direction))
        if class_level:
            # mask files always hold sample indices: forget every sample
            # of the selected classes
            sample_mask = ForgetMask(np.nonzero(np.isin(train_ds.y, result.mask.indices))[0])
        else:
            sample_mask = result.mask
        sample_mask.save(out / f"mask_{direction}.txt")
        sample_mask_size = sample_mask.m
        payload = {
            "direction": direction,
            "granularity": cfg["selection"]["granularity"],
            "m": m,
            "weights": [float(v) for v in result.weights.w],
            "mask": [int(i) for i in result.mask.indices],
            "sample_mask": [int(i) for i in sample_mask.indices],
            "trajectory": [float(v) for v in result.trajectory],
            "config": cfg["selection"],
        }
        (out / f"selection_{direction}.json").write_text(json.dumps(payload, indent=2) + "\n")
        click.echo(f"{direction}: objective {result.trajectory[0]:.4f} -> {result.trajectory[-1]:.4f}")
    root = _root_rng(cfg)
    random_size = sample_mask_size if sample_mask_size is not None else cfgmod.forget_size(cfg, train_ds.n)
    for seed in cfg["eval_seeds"]:
        gen = root.derive(_S_RANDOM_MASK + seed).generator()
        mask = ForgetMask(np.sort(gen.permutation(train_ds.n)[:random_size]))
        mask.save(out / f"mask_random_{seed:03d}.txt")
    _write_resolved(cfg, out)
    click.echo(f"wrote masks of {random_size} samples for {len(cfg['eval_seeds'])} seeds")


def _eval_cell(cfg, train_ds, test_ds, theta_o, sizes, activation, mask, method_cfg, seed):
    rng = _root_rng(cfg).derive(_S_EVAL + seed)
    ucfg = _unlearn_config(method_cfg, rng)
    theta_u = apply_method(theta_o, train_ds, mask, sizes, ucfg, activation)
    return evaluate(theta_u, train_ds, test_ds, mask.indices, mask.complement(train_ds.n))


def _mask_kinds(cfg, out: Path, n: int) -> dict[str, dict[int, ForgetMask]]:
    """Mask per (set kind, eval seed); worst/easiest reuse one mask across seeds."""
    kinds: dict[str, dict[int, ForgetMask]] = {}
    for direction in cfg["selection"]["directions"]:
        path = _require(out / f"mask_{direction}.txt", "select")
        mask = ForgetMask.load(path)
        kinds[direction] = {seed: mask for seed in cfg["eval_seeds"]}
    randoms = {}
    for seed in cfg["eval_seeds"]:
        path = _require(out / f"mask_random_{seed:03d}.txt", "select")
        randoms[seed] = ForgetMask.load(path)
    kinds["random"] = randoms
    return kinds


def _aggregate(values: list[EvalReport]) -> tuple[EvalReport, EvalReport]:
    arr = np.array([r.as_tuple() for r in values])
    mean = EvalReport(*[float(v) for v in arr.mean(axis=0)])
    std = EvalReport(*[float(v) for v in arr.std(axis=0)])  # population std: one seed -> 0.00
    return mean, std


def _cmd_unlearn_eval(cfg, out: Path) -> None:
    t0 = time.perf_counter()
    train_ds, test_ds = _read_train_test(out)
    theta_o = load_checkpoint(_require(out / "model.npz", "train"))
    sizes, activation = _model_spec(cfg["model"])
    _retrain_method_cfg(cfg)  # validated up front: gaps need the reference row
    kinds = _mask_kinds(cfg, out, train_ds.n)
    methods = {m["method"]: m for m in cfg["unlearn"]}

    cells = [
        (kind, name, seed)
        for kind in kinds
        for name in methods
        for seed in cfg["eval_seeds"]
    ]

    def run_cell(cell):
        kind, name, seed = cell
        try:
            report = _eval_cell(
                cfg, train_ds, test_ds, theta_o, sizes, activation, kinds[kind][seed], methods[name], seed
            )
            return cell, report, None
        except ForgesetError as exc:
            return cell, None, f"{type(exc).__name__}: {exc}"

    results = _parallel_map(run_cell, cells)
    failures = [(cell, err) for cell, _, err in results if err is not None]
    by_cell = {cell: report for cell, report, _ in results}

    per_seed_lines = [f"# schema: {PER_SEED_SCHEMA}", "seed,method,set_kind,ua,mia,ra,ta"]
    for kind, name, seed in cells:
        report = by_cell[(kind, name, seed)]
        if report is None:
            per_seed_lines.append(f"{seed},{name},{kind},FAILED,FAILED,FAILED,FAILED")
        else:
            per_seed_lines.append(
                f"{seed},{name},{kind},{report.ua!r},{report.mia!r},{report.ra!r},{report.ta!r}"
            )
    (out / "per_seed.csv").write_text("\n".join(per_seed_lines) + "\n")

    stats = _emit_reports(cfg, out, by_cell, list(kinds))
    _write_resolved(cfg, out)

    record = {
        "config_hash": cfgmod.config_hash(cfg),
        "input_digest": _digest_files(
            [out / "train.csv", out / "test.csv", out / "model.npz"]
            + sorted(out.glob("mask_*.txt"))
        ),
        "reports": stats,
        "failures": [f"{kind}/{name}/seed{seed}: {err}" for (kind, name, seed), err in failures],
        "timings": {"unlearn_eval_s": time.perf_counter() - t0},
    }
    (out / "run_record.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")

    if failures:
        for (kind, name, seed), err in failures:
            click.echo(f"FAILED {kind}/{name}/seed{seed}: {err}", err=True)
        raise DivergenceError(f"{len(failures)} evaluation cells failed")
    click.echo(f"wrote {out / 'report.csv'}, {out / 'report.md'}, {out / 'per_seed.csv'}")


def _emit_reports(cfg, out: Path, by_cell, kinds: list[str]) -> dict:
    methods = [m["method"] for m in cfg["unlearn"]]
    stats: dict[tuple[str, str], tuple[EvalReport, EvalReport] | None] = {}
    for kind in kinds:
        for name in methods:
            reports = [
                by_cell[(kind, name, seed)]
                for seed in cfg["eval_seeds"]
                if by_cell[(kind, name, seed)] is not None
            ]
            stats[(kind, name)] = _aggregate(reports) if reports else None

    csv_lines = [f"# schema: {REPORT_SCHEMA}", "method,set_kind,ua,mia,ra,ta,avg_gap"]
    md_lines = ["# Unlearning evaluation", ""]
    summary: dict[str, dict] = {}
    for kind in kinds:
        reference = stats.get((kind, "retrain"))
        md_lines += [f"## {kind} forget set", "", "| Method | UA | MIA | RA | TA | Avg. Gap |", "|---|---|---|---|---|---|"]
        for name in methods:
            entry = stats[(kind, name)]
            if entry is None:
                csv_lines.append(f"{name},{kind},FAILED,FAILED,FAILED,FAILED,")
                md_lines.append(f"| {name} | FAILED | FAILED | FAILED | FAILED | |")
                summary[f"{kind}/{name}"] = None
                continue
            mean, std = entry
            gap = avg_gap(mean, reference[0]) if reference is not None else None
            cells_ms = [f"{m:.2f}±{s:.2f}" for m, s in zip(mean.as_tuple(), std.as_tuple())]
            gap_cell = f"{gap.avg_gap:.2f}" if gap is not None else ""
            csv_lines.append(f"{name},{kind}," + ",".join(cells_ms) + f",{gap_cell}")
            if gap is not None and name != "retrain":
                md_cells = [
                    f"{c} ({g:.2f})"
                    for c, g in zip(cells_ms, (gap.ua, gap.mia, gap.ra, gap.ta))
                ]
            else:
                md_cells = cells_ms
            md_lines.append(f"| {name} | " + " | ".join(md_cells) + f" | {gap_cell} |")
            summary[f"{kind}/{name}"] = {
                "mean": dict(zip(("ua", "mia", "ra", "ta"), mean.as_tuple())),
                "std": dict(zip(("ua", "mia", "ra", "ta"), std.as_tuple())),
                "avg_gap": gap.avg_gap if gap is not None else None,
            }
        md_lines.append("")
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    (out / "report.md").write_text("\n".join(md_lines) + "\n")
    return summary


def _cmd_report(cfg, out: Path) -> None:
    """Rebuild report.csv/report.md from the raw per-seed CSV."""
    path = _require(out / "per_seed.csv", "unlearn-eval")
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    rows = [ln.split(",") for ln in lines[1:]]
    by_cell: dict[tuple, EvalReport | None] = {}
    kinds_seen: list[str] = []
    for seed_s, name, kind, ua, mia, ra, ta in rows:
        value = None if ua == "FAILED" else EvalReport(float(ua), float(mia), float(ra), float(ta))
        by_cell[(kind, name, int(seed_s))] = value
        if kind not in kinds_seen:
            kinds_seen.append(kind)
    cells = [
        (kind, mth["method"], seed)
        for kind in kinds_seen
        for mth in cfg["unlearn"]
        for seed in cfg["eval_seeds"]
    ]
    missing = [c for c in cells if c not in by_cell]
    if missing:
        raise ConfigError(f"per_seed.csv is missing {len(missing)} cells for this config")
    _emit_reports(cfg, out, by_cell, kinds_seen)
    click.echo(f"rebuilt {out / 'report.csv'} and {out / 'report.md'}")


def _cmd_oracle(cfg, out: Path, force: bool) -> None:
    train_ds, _ = _read_train_test(out)
    m = cfgmod.forget_size(cfg, train_ds.n)
    ocfg = cfg["oracle"]
    rng = _root_rng(cfg).derive(_S_EVAL + cfg["eval_seeds"][0])
    ucfg = UnlearnConfig(method=Method.RETRAIN, epochs=ocfg["epochs"], lr=ocfg["lr"], rng=rng)
    sizes, _ = _model_spec(cfg["model"])
    scores = enumerate_worst(train_ds, m, sizes, ucfg, force=force)
    save_ranking_csv(scores, out / "oracle_ranking.csv")
    summary = {"subsets": len(scores), "best_ua": scores[0].ua, "worst_ua": scores[-1].ua}
    mask_path = out / "mask_worst.txt"
    if mask_path.exists():
        mask = ForgetMask.load(mask_path)
        theta_u = retrain(train_ds, mask, sizes, ucfg)
        ua = 100.0 - accuracy(theta_u, train_ds.X[mask.indices], train_ds.y[mask.indices])
        uas = np.array([s.ua for s in scores])
        summary["selected_ua"] = ua
        summary["selected_percentile"] = float(np.mean(uas < ua))
    (out / "oracle_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    click.echo(f"ranked {len(scores)} subsets; UA range [{scores[0].ua:.2f}, {scores[-1].ua:.2f}]")


def _cmd_transfer(cfg, out: Path) -> None:
    models = cfg["transfer"]["models"]
    if len(models) < 2:
        raise ConfigError("transfer needs at least two model specs in config.transfer.models")
    train_ds, test_ds = _read_train_test(out)
    m = cfgmod.forget_size(cfg, train_ds.n)
    root = _root_rng(cfg)
    retrain_cfg = _retrain_method_cfg(cfg)
    seed = cfg["eval_seeds"][0]

    masks = {}
    for i, model_cfg in enumerate(models):
        resolved = cfgmod._merge(cfgmod.DEFAULTS["model"], model_cfg, f"transfer.models[{i}]")
        sizes, activation = _model_spec(resolved)
        theta = train(
            train_ds, sizes, cfg["pretrain"]["epochs"], cfg["pretrain"]["lr"],
            root.derive(_S_TRANSFER_MODEL + i), activation,
        )
        result = select(train_ds, m, theta, _selection_config(cfg, "worst"))
        masks[i] = result.mask
    gen = root.derive(_S_TRANSFER_MASK).generator()
    random_mask = ForgetMask(np.sort(gen.permutation(train_ds.n)[:m]))

    def retrain_ua(mask: ForgetMask, model_cfg, j: int) -> float:
        resolved = cfgmod._merge(cfgmod.DEFAULTS["model"], model_cfg, f"transfer.models[{j}]")
        sizes, activation = _model_spec(resolved)
        ucfg = _unlearn_config(retrain_cfg, root.derive(_S_EVAL + seed))
        theta_u = apply_method(None, train_ds, mask, sizes, ucfg, activation)
        return 100.0 - accuracy(theta_u, train_ds.X[mask.indices], train_ds.y[mask.indices])

    lines = ["# schema: forgeset.transfer.v1", "selector,evaluator,mask_kind,ua"]
    header = "| selector \\ evaluator | " + " | ".join(f"model{j}" for j in range(len(models))) + " |"
    md = ["# Worst-case mask transfer (retrain UA)", "", header, "|---|" + "---|" * len(models)]
    for i in range(len(models)):
        row = [f"model{i} (worst)"]
        for j, model_cfg in enumerate(models):
            ua = retrain_ua(masks[i], model_cfg, j)
            lines.append(f"model{i},model{j},worst,{ua!r}")
            row.append(f"{ua:.2f}")
        md.append("| " + " | ".join(row) + " |")
    rand_row = ["random"]
    for j, model_cfg in enumerate(models):
        ua = retrain_ua(random_mask, model_cfg, j)
        lines.append(f"random,model{j},random,{ua!r}")
        rand_row.append(f"{ua:.2f}")
    md.append("| " + " | ".join(rand_row) + " |")
    (out / "transfer.csv").write_text("\n".join(lines) + "\n")
    (out / "transfer.md").write_text("\n".join(md) + "\n")
    click.echo(f"wrote {out / 'transfer.csv'}")


def _cmd_coreset(cfg, out: Path) -> None:
    train_ds, test_ds = _read_train_test(out)
    mask = ForgetMask.load(_require(out / "mask_worst.txt", "select"))
    m = mask.m
    sizes, activation = _model_spec(cfg["model"])
    root = _root_rng(cfg)
    rng = root.derive(_S_PRETRAIN)
    epochs, lr = cfg["pretrain"]["epochs"], cfg["pretrain"]["lr"]

    def ta_of(indices) -> float:
        sub = Dataset(train_ds.X[indices], train_ds.y[indices], train_ds.split, train_ds.classes)
        theta = train(sub, sizes, epochs, lr, rng, activation)
        return accuracy(theta, test_ds.X, test_ds.y)

    gen = root.derive(_S_CORESET_MASK).generator()
    random_mask = ForgetMask(np.sort(gen.permutation(train_ds.n)[:m]))
    rows = [
        ("full", ta_of(np.arange(train_ds.n))),
        ("worst_complement", ta_of(mask.complement(train_ds.n))),
        ("random_complement", ta_of(random_mask.complement(train_ds.n))),
    ]
    lines = ["# schema: forgeset.coreset.v1", "training_set,ta"] + [f"{k},{v!r}" for k, v in rows]
    (out / "coreset.csv").write_text("\n".join(lines) + "\n")
    md = ["# Coreset check: test accuracy by training set", "", "| training set | TA |", "|---|---|"]
    md += [f"| {k} | {v:.2f} |" for k, v in rows]
    (out / "coreset.md").write_text("\n".join(md) + "\n")
    click.echo("; ".join(f"{k}: {v:.2f}" for k, v in rows))


def _cmd_mixture(cfg, out: Path) -> None:
    train_ds, _ = _read_train_test(out)
    mask = ForgetMask.load(_require(out / "mask_worst.txt", "select"))
    m = mask.m
    sel_path = out / "selection_worst.json"
    order = mask.indices
    if sel_path.exists():
        weights = np.asarray(json.loads(sel_path.read_text())["weights"])
        if weights.size == train_ds.n:  # sample-level scores order the mask
            order = mask.indices[np.argsort(-weights[mask.indices], kind="stable")]
    sizes, _ = _model_spec(cfg["model"])
    retrain_cfg = _retrain_method_cfg(cfg)
    root = _root_rng(cfg)

    # Paired design: the random picks come from outside the worst-case set,
    # and each eval seed reuses one permutation across the whole grid, so
    # moving along p swaps random points for worst-case ones and nothing else.
    pool = np.setdiff1d(np.arange(train_ds.n), mask.indices)
    pool_perms = {
        seed: root.derive(_S_MIXTURE + seed).generator().permutation(pool)
        for seed in cfg["eval_seeds"]
    }
    lines = ["# schema: forgeset.mixture.v1", "p,ua_mean,ua_std"]
    md = ["# Retrain UA vs worst-case fraction", "", "| p | UA |", "|---|---|"]
    for p in cfg["mixture"]["grid"]:
        k = round(p * m)
        uas = []
        for seed in cfg["eval_seeds"]:
            mixed = ForgetMask(np.sort(np.concatenate((order[:k], pool_perms[seed][: m - k]))))
            ucfg = _unlearn_config(retrain_cfg, root.derive(_S_EVAL + seed))
            theta_u = apply_method(None, train_ds, mixed, sizes, ucfg)
            uas.append(100.0 - accuracy(theta_u, train_ds.X[mixed.indices], train_ds.y[mixed.indices]))
        lines.append(f"{float(p)!r},{float(np.mean(uas))!r},{float(np.std(uas))!r}")
        md.append(f"| {p:.2f} | {np.mean(uas):.2f}±{np.std(uas):.2f} |")
    (out / "mixture.csv").write_text("\n".join(lines) + "\n")
    (out / "mixture.md").write_text("\n".join(md) + "\n")
    click.echo(f"wrote {out / 'mixture.csv'}")


# ---------------------------------------------------------------------------
# click wiring

_EXIT_CODES: list[tuple[type, int]] = [
    (TooLarge, 4),
    (DivergenceError, 3),
    (NoConvergence, 3),
    (ConfigError, 2),
    (FileError, 2),
    (ParseError, 2),
    (EmptyFile, 2),
    (BadSpec, 2),
    (BudgetError, 2),
    (ShapeError, 3),
    (EmptyBatch, 3),
    (EmptyRetainSet, 2),
    (ForgesetError, 3),
]


def _common(fn):
    @click.option("--config", "config_path", required=True, type=click.Path(), help="JSON experiment config")
    @click.option("--out", "out_override", default=None, type=click.Path(), help="Output directory (overrides config.out)")
    @click.option("--seed", default=None, type=int, help="Override config.seed")
    @functools.wraps(fn)
    def wrapper(config_path, out_override, seed, **kwargs):
        try:
            cfg = cfgmod.load_config(config_path)
            if seed is not None:
                cfg["seed"] = seed
            out = _out_dir(cfg, out_override)
            fn(cfg, out, **kwargs)
        except ForgesetError as exc:
            for etype, code in _EXIT_CODES:
                if isinstance(exc, etype):
                    click.echo(f"error: {exc}", err=True)
                    sys.exit(code)
            raise

    return wrapper


@click.group()
def main():
    """Forget-set selection, unlearning, and evaluation harness."""


@main.command("gen")
@_common
def gen_cmd(cfg, out):
    """Generate train/test CSVs from the dataset spec."""
    _cmd_gen(cfg, out)


@main.command("train")
@_common
def train_cmd(cfg, out):
    """Pretrain the model on train.csv and write model.npz."""
    _cmd_train(cfg, out)


@main.command("select")
@_common
def select_cmd(cfg, out):
    """Run forget-set selection; write masks and selection details."""
    _cmd_select(cfg, out)


@main.command("unlearn-eval")
@_common
def unlearn_eval_cmd(cfg, out):
    """Run every (mask, method, seed) cell and write the evaluation reports."""
    _cmd_unlearn_eval(cfg, out)


@main.command("report")
@_common
def report_cmd(cfg, out):
    """Rebuild aggregate reports from per_seed.csv."""
    _cmd_report(cfg, out)


@main.command("oracle")
@click.option("--force-guard", is_flag=True, help="Override the enumeration size guard")
@_common
def oracle_cmd(cfg, out, force_guard):
    """Exhaustively rank all size-m subsets by retrain UA."""
    _cmd_oracle(cfg, out, force_guard)


@main.command("transfer")
@_common
def transfer_cmd(cfg, out):
    """Cross-model mask transfer matrix."""
    _cmd_transfer(cfg, out)


@main.command("coreset")
@_common
def coreset_cmd(cfg, out):
    """Compare test accuracy when training on mask complements."""
    _cmd_coreset(cfg, out)


@main.command("mixture")
@_common
def mixture_cmd(cfg, out):
    """Retrain UA on worst/random mixed masks over a fraction grid."""
    _cmd_mixture(cfg, out)


if __name__ == "__main__":
    main()
