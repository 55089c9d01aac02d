"""Command-line front end.

Subcommands:

* ``kernel``     closed-form connection kernel for one pair of points;
* ``verify``     equivalence report (closed form vs exact recursion vs
                 enumerations vs Monte Carlo) written as CSV;
* ``experiment`` the M-sweep error benchmark with CSV and plot-data output;
* ``enumerate``  exact rational connection counts for both flavors.

``experiment`` also accepts ``--config PATH`` pointing at a key=value
file; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .equivalence import (
    CapacityError,
    enumerate_centered,
    enumerate_directional,
    equivalence_report,
    write_equivalence_csv,
)
from .experiment import (
    ExperimentConfig,
    emit_outputs,
    make_target,
    run_sweep,
    summarize,
    TARGET_KINDS,
)
from .forests import dump_partitions, sample_partitions
from .kerf import KernelSpec, centered_kernel
from .streams import DOMAIN_PAIRS, substream

_EXPERIMENT_DEFAULTS = {
    "target": "all",
    "n": 1500,
    "d": 2,
    "k": 11,
    "m_values": "1,50,100,200,300,400,500",
    "reps": 30,
    "test_fraction": 0.2,
    "seed": 42,
    "out": "experiment_out",
    "jobs": 1,
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip() != "")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip() != "")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", help="closed-form kernel value for one pair")
    p_kernel.add_argument("--d", type=int, required=True)
    p_kernel.add_argument("--k", type=int, required=True)
    p_kernel.add_argument("--x", type=str, required=True, help="comma-separated coordinates")
    p_kernel.add_argument("--z", type=str, required=True, help="comma-separated coordinates")

    p_verify = sub.add_parser("verify", help="equivalence report over random pairs")
    p_verify.add_argument("--pairs", type=int, default=20)
    p_verify.add_argument("--k-max", type=int, default=5)
    p_verify.add_argument("--d-max", type=int, default=3)
    p_verify.add_argument("--mc-samples", type=int, default=20_000)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--out", type=str, required=True, help="output directory")

    p_exp = sub.add_parser("experiment", help="M-sweep error benchmark")
    p_exp.add_argument("--target", choices=TARGET_KINDS + ("all",))
    p_exp.add_argument("--n", type=int)
    p_exp.add_argument("--d", type=int)
    p_exp.add_argument("--k", type=int)
    p_exp.add_argument("--m-values", type=str, help="comma-separated tree counts")
    p_exp.add_argument("--reps", type=int)
    p_exp.add_argument("--test-fraction", type=float)
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--out", type=str)
    p_exp.add_argument("--config", type=str, help="key=value file; flags override it")
    p_exp.add_argument("--jobs", type=int, help="parallel sweep workers (default 1)")
    p_exp.add_argument("--dump-trees", action="store_true", default=None,
                       help="also write every cell's partitions in plain text")
    p_exp.add_argument("--plots", action="store_true", default=None,
                       help="render error/std line charts as PNG")

    p_enum = sub.add_parser("enumerate", help="exact rational connection counts")
    p_enum.add_argument("--k", type=int, required=True)
    p_enum.add_argument("--d", type=int, required=True)
    p_enum.add_argument("--x", type=str, required=True)
    p_enum.add_argument("--z", type=str, required=True)

    return parser


def _cmd_kernel(args) -> int:
    x = _floats(args.x)
    z = _floats(args.z)
    value = centered_kernel(KernelSpec(depth=args.k, dimension=args.d), x, z)
    print(repr(value))
    return 0


def _cmd_verify(args) -> int:
    rng = substream(args.seed, DOMAIN_PAIRS)
    pairs = [
        (rng.uniform(size=args.d_max), rng.uniform(size=args.d_max))
        for _ in range(args.pairs)
    ]
    rows = equivalence_report(
        pairs,
        k_values=range(args.k_max + 1),
        d_values=range(1, args.d_max + 1),
        mc_samples=args.mc_samples,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "equivalence.csv"
    write_equivalence_csv(rows, path)
    failures = sum(not r.passed for r in rows)
    print(f"wrote {path} ({len(rows)} rows, {failures} failures)")
    return 0 if failures == 0 else 1


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line (expected key=value): {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _exp_setting(args, file_values: dict, key: str, convert):
    flag = getattr(args, key)
    if flag is not None:
        return flag
    if key in file_values:
        return convert(file_values[key])
    return _EXPERIMENT_DEFAULTS.get(key)


def _cmd_experiment(args) -> int:
    file_values = _load_config_file(args.config) if args.config else {}
    target = _exp_setting(args, file_values, "target", str)
    n = _exp_setting(args, file_values, "n", int)
    d = _exp_setting(args, file_values, "d", int)
    k = _exp_setting(args, file_values, "k", int)
    m_values = _exp_setting(args, file_values, "m_values", str)
    reps = _exp_setting(args, file_values, "reps", int)
    test_fraction = _exp_setting(args, file_values, "test_fraction", float)
    seed = _exp_setting(args, file_values, "seed", int)
    out = _exp_setting(args, file_values, "out", str)
    jobs = _exp_setting(args, file_values, "jobs", int)
    dump_trees = args.dump_trees if args.dump_trees is not None else (
        file_values.get("dump_trees", "").lower() in ("1", "true", "yes")
    )
    plots = args.plots if args.plots is not None else (
        file_values.get("plots", "").lower() in ("1", "true", "yes")
    )

    kinds = TARGET_KINDS if target == "all" else (target,)
    records = []
    configs = []
    for kind in kinds:
        config = ExperimentConfig(
            target=make_target(kind),
            n=n,
            d=d,
            k=k,
            m_values=_ints(m_values) if isinstance(m_values, str) else tuple(m_values),
            reps=reps,
            test_fraction=test_fraction,
            master_seed=seed,
        )
        configs.append(config)
        records.extend(run_sweep(config, jobs=jobs))
    summaries = summarize(records)
    written = emit_outputs(records, summaries, out, render_plots=plots)
    if dump_trees:
        written.extend(_dump_trees(configs, Path(out) / "trees"))
    for path in written:
        print(f"wrote {path}")
    return 0


def _dump_trees(configs, tree_dir: Path) -> list[Path]:
    from .experiment import cell_seed

    tree_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for config in configs:
        for rep in range(config.reps):
            for mi, M in enumerate(config.m_values):
                for ai, algorithm in enumerate(config.algorithms):
                    seed = cell_seed(config, rep, mi, ai)
                    partitions = sample_partitions(algorithm, M, config.k, config.d, seed)
                    path = tree_dir / (
                        f"{config.target.kind}_rep{rep:03d}_M{M}_{algorithm}.txt"
                    )
                    dump_partitions(partitions, path)
                    written.append(path)
    return written


def _cmd_enumerate(args) -> int:
    x = _floats(args.x)
    z = _floats(args.z)
    if len(x) != args.d or len(z) != args.d:
        raise SystemExit(f"--x and --z must carry exactly {args.d} coordinates")
    for flavor, run in (
        ("centered", lambda: enumerate_centered(args.k, x, z)),
        ("directional", lambda: enumerate_directional(args.k, args.d, x, z)),
    ):
        try:
            count = run()
            print(f"{flavor}: connected={count.connected} total={count.total} (= {count.fraction})")
        except CapacityError as err:
            print(f"{flavor}: skipped ({err})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "kernel": _cmd_kernel,
        "verify": _cmd_verify,
        "experiment": _cmd_experiment,
        "enumerate": _cmd_enumerate,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
