"""Command line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from eonsurv import harness, topology as topo, workload

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    if args.output_dir:
        cfg = harness.replace(cfg, output_dir=args.output_dir)
    result = harness.run_experiment(cfg, dump_grid=args.dump_grid)
    written = harness.emit(result, cfg.output_dir)
    for scheme, text in result.grid_dumps.items():
        print(f"# grid {scheme} seed={cfg.seeds[0]} requests={result.sweep[-1]}")
        print(text, end="")
    print(f"{'scheme':<6} {'BBP':>8} {'RT(us)':>10} {'BPR':>8}")
    for scheme, row in result.summary.items():
        rt = "-" if row["rt_us"] is None else f"{row['rt_us']:.1f}"
        bpr = "-" if row["bpr"] is None else f"{row['bpr']:.4f}"
        print(f"{scheme:<6} {row['bbp']:>8.4f} {rt:>10} {bpr:>8}")
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    return EXIT_OK


def _cmd_topologies(args) -> int:
    for name in topo.builtin_names():
        t = topo.load_builtin(name)
        print(f"{name}\tnodes={t.n_nodes}\tlinks={t.n_links}\tF={t.slot_capacity}")
    return EXIT_OK


def _cmd_workload(args) -> int:
    t = topo.load_builtin(args.topology) if args.topology.upper() in topo.BUILTIN else topo.load_file(args.topology)
    spec = workload.WorkloadSpec(args.count, args.fr_min, args.fr_max, args.seed)
    requests = workload.generate(t, spec)
    if args.out == "-":
        sys.stdout.write(workload.to_csv(requests))
    else:
        workload.write_csv(args.out, requests)
    return EXIT_OK


def _cmd_show(args) -> int:
    t = topo.load_builtin(args.topology) if args.topology.upper() in topo.BUILTIN else topo.load_file(args.topology)
    sys.stdout.write(t.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eonsurv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--output-dir", help="override output_dir from the config")
    run.add_argument("--dump-grid", action="store_true",
                     help="print the final spectrum grid of the first seed per scheme")
    run.set_defaults(func=_cmd_run)

    tops = sub.add_parser("topologies", help="list builtin topologies")
    tops.set_defaults(func=_cmd_topologies)

    show = sub.add_parser("show-topology", help="print a topology in the text format")
    show.add_argument("topology")
    show.set_defaults(func=_cmd_show)

    wl = sub.add_parser("workload", help="export a seeded workload as CSV")
    wl.add_argument("--topology", required=True)
    wl.add_argument("--count", type=int, required=True)
    wl.add_argument("--seed", type=int, default=0)
    wl.add_argument("--fr-min", type=int, default=workload.DEFAULT_FR_MIN)
    wl.add_argument("--fr-max", type=int, default=workload.DEFAULT_FR_MAX)
    wl.add_argument("--out", default="-")
    wl.set_defaults(func=_cmd_workload)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
