"""Command-line front end.

Exit codes: 0 on success, 2 for validation problems (bad flags, malformed
files, impossible parameters), 3 for runtime failures (budget blowups,
failed verification checks, unexpected errors).

A flat key=value config file can seed any subcommand's flags; explicit
command-line flags override the file.
"""

from __future__ import annotations

import argparse
import sys

from . import automaton1d as a1d
from . import harness as hn
from . import robinson as rb
from .noise import marginal_rate, parse_model, sample_mask


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _box(text: str) -> tuple[int, ...]:
    sides = tuple(int(tok) for tok in text.lower().split("x"))
    if not sides or any(s < 1 for s in sides):
        raise argparse.ArgumentTypeError(f"bad box {text!r}")
    return sides


def _apply_config(argv: list[str]) -> list[str]:
    """Pull --config out of argv and splice the file's pairs in as flags
    right after the subcommand, so later (explicit) flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    cfg = hn.read_config(argv[i + 1])
    rest = argv[:i] + argv[i + 2:]
    flags: list[str] = []
    for key, val in cfg.items():
        name = "--" + key.strip().replace("_", "-")
        if val.lower() == "true":
            flags.append(name)
        elif val.lower() == "false":
            continue
        else:
            flags.extend([name, val])
    # insert after the subcommand tokens (everything before the first flag)
    head = 0
    while head < len(rest) and not rest[head].startswith("-"):
        head += 1
    return rest[:head] + flags + rest[head:]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--plot", default=None, help="write a log-log SVG here")

    top = argparse.ArgumentParser(
        prog="noisysft",
        description="noisy subshift simulation: classification, repair, "
                    "percolation, instability certificates")
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="classify a 1D SFT and report repair constants")
    p.add_argument("--sft", required=True, help="registered name or file")
    p.add_argument("--refined", action="store_true",
                   help="use the refined peel constant")

    p = sub.add_parser("sample", parents=[common],
                       help="sample a noise mask, optionally over a clean word")
    p.add_argument("--model", required=True, help="e.g. bernoulli:0.01")
    p.add_argument("--box", type=_box, required=True)
    p.add_argument("--sft", default=None,
                   help="1D target; adds a corrupted admissible word")

    p = sub.add_parser("perc", parents=[common],
                       help="origin exclusion probability vs the union bound")
    p.add_argument("--epsilons", type=_floats, required=True)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--box", type=_box, default=(1024,))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--proxy", choices=("largest", "sides"), default="largest")

    p = sub.add_parser("repair1d", parents=[common],
                       help="changed-fraction sweep for 1D repair")
    p.add_argument("--sft", default="golden-mean")
    p.add_argument("--epsilons", type=_floats, required=True)
    p.add_argument("--box", type=_box, default=(100_000,))
    p.add_argument("--trials", type=int, default=50)

    p = sub.add_parser("repair2d", parents=[common],
                       help="changed-fraction sweep for 2D periodic repair")
    p.add_argument("--periodic", required=True,
                   help="registered name (checkerboard, stripes) or file")
    p.add_argument("--epsilons", type=_floats, required=True)
    p.add_argument("--box", type=_box, default=(512, 512))
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--c", type=int, default=None)

    p = sub.add_parser("robinson", help="hierarchical tiling tools")
    rsub = p.add_subparsers(dest="rcmd", required=True)

    g = rsub.add_parser("gen", help="write a macro-tile window")
    g.add_argument("--scale", type=int, required=True)
    g.add_argument("--orient", choices=("se", "ne", "nw", "sw"), default="se")
    g.add_argument("--out", choices=("txt", "svg"), default="txt",
                   help="output format")
    g.add_argument("--path", default=None, help="output file (default stdout)")

    g = rsub.add_parser("verify", help="structural self-checks")
    g.add_argument("--check", default="tileset,edges,align,peel",
                   help="comma list from tileset,edges,align,peel")
    g.add_argument("--sampled", action="store_true",
                   help="re-derive the peel witness instead of the frozen one")

    g = rsub.add_parser("repair", help="scale-N repair sweep")
    g.add_argument("--epsilon", type=_floats, required=True)
    g.add_argument("--scale", type=_ints, default=(2,))
    g.add_argument("--box", type=_box, default=(1024, 1024))
    g.add_argument("--trials", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out", choices=("csv",), default="csv",
                   help="output format")
    g.add_argument("--path", default=None, help="output file (default stdout)")
    g.add_argument("--plot", default=None)

    p = sub.add_parser("instability", help="adversarial lower-bound constructions")
    isub = p.add_subparsers(dest="icmd", required=True)

    g = isub.add_parser("phase1d", parents=[common],
                        help="periodic mask over the alternating system")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--box", type=_box, default=(100_000,))
    g.add_argument("--trials", type=int, default=50)

    g = isub.add_parser("bern1d", parents=[common],
                        help="Bernoulli noise over an irreducible periodic target")
    g.add_argument("--sft", default="alternating")
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--box", type=_box, default=(100_000,))
    g.add_argument("--trials", type=int, default=50)

    g = isub.add_parser("grid2d", parents=[common],
                        help="grid noise over a periodic orbit")
    g.add_argument("--periodic", default="checkerboard")
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--box", type=_box, default=(256, 256))
    g.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("sweep", parents=[common],
                       help="cross-product sweep to CSV")
    p.add_argument("--kind", required=True,
                   choices=sorted(hn._SWEEP_DRIVERS))
    p.add_argument("--sft", default="golden-mean")
    p.add_argument("--epsilons", type=_floats, required=True)
    p.add_argument("--box", type=_box, default=(100_000,))
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--scales", type=_ints, default=(2,))
    p.add_argument("--proxy", choices=("largest", "sides"), default="largest")
    return top


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows, args) -> None:
    text = hn.format_csv(rows)
    _emit(text, getattr(args, "out", None))
    if getattr(args, "plot", None):
        hn.write_plot(args.plot, rows)


def _cmd_analyze(args) -> int:
    name, sft = hn.resolve_sft_1d(args.sft)
    auto = a1d.build_automaton(sft)
    cls = a1d.classify(auto)
    lines = [f"sft: {name}",
             f"alphabet: {' '.join(sft.alphabet)}",
             f"word_len: {auto.word_len}",
             f"states: {len(auto.states)}",
             f"classification: {cls.kind}"]
    if cls.kind == "irreducible_periodic":
        lines.append(f"period: {cls.period}")
    if cls.kind == "reducible":
        lines.append(f"classes: {cls.class_count}")
    if cls.kind == "irreducible_aperiodic":
        consts = a1d.repair_constants(auto, refined=args.refined)
        lines += [f"n0: {consts.n0}", f"C: {consts.C}", f"D: {consts.D}",
                  f"E: {consts.E}",
                  f"envelope: changed_fraction <= {3 * (2 * consts.E + 1)}*eps"]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_sample(args) -> int:
    model = parse_model(args.model)
    mask = sample_mask(model, args.box, args.seed)
    lines = [f"# model {args.model} marginal "
             f"{marginal_rate(model, len(args.box)):.6g}"]
    if args.sft is not None:
        name, sft = hn.resolve_sft_1d(args.sft)
        if len(args.box) != 1:
            raise ValueError("--sft sampling is 1D; give a 1D box")
        auto = hn._auto_cached(sft)
        word = hn.sample_admissible_word(auto, args.box[0], args.seed)
        noisy = hn.corrupt(word, mask.data.astype(bool), len(sft.alphabet),
                           args.seed + 1)
        lines.append("".join(sft.alphabet[v] for v in noisy))
        lines.append("".join("1" if m else "0" for m in mask.data))
    else:
        arr = mask.data if mask.data.ndim > 1 else mask.data[None, :]
        lines += ["".join("1" if m else "0" for m in row) for row in arr]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_robinson(args) -> int:
    if args.rcmd == "gen":
        grid = rb.build_macro(args.scale, args.orient.upper())
        if args.out == "svg":
            text = rb.render_svg(grid)
        else:
            text = rb.write_text(grid)
        _emit(text, args.path)
        return 0
    if args.rcmd == "verify":
        groups = tuple(tok.strip() for tok in args.check.split(",") if tok.strip())
        mode = "sampled" if args.sampled else "exhaustive"
        results = rb.verify_suite(groups=groups, peel_mode=mode)
        for name, ok, detail in results:
            print(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
        failed = sum(1 for _, ok, _ in results if not ok)
        if failed:
            print(f"{failed} check(s) failed", file=sys.stderr)
            return 3
        return 0
    if args.rcmd == "repair":
        spec = hn.ExperimentSpec(kind="robinson_repair", epsilons=args.epsilon,
                                 box=args.box, trials=args.trials,
                                 seed=args.seed, scales=args.scale,
                                 threads=args.threads)
        rows = hn.run_robinson_repair(spec)
        _emit(hn.format_csv(rows), args.path)
        if args.plot:
            hn.write_plot(args.plot, rows)
        return 0
    raise ValueError(f"unknown robinson command {args.rcmd!r}")


def _cmd_instability(args) -> int:
    if args.icmd == "phase1d":
        rep = hn.run_instability_phase1d(args.p, args.box[0], args.trials,
                                         args.seed)
    elif args.icmd == "bern1d":
        rep = hn.run_instability_bern1d(args.sft, args.epsilon, args.box[0],
                                        args.trials, args.seed)
    else:
        _, p = hn.resolve_periodic(args.periodic)
        rep = hn.run_instability_grid2d(p, args.k, args.n, args.box[0],
                                        args.trials, args.seed)
    print(f"estimate: {rep.estimate.value:.6f} +- {rep.estimate.ci95:.6f}")
    print(f"certificate: {rep.certificate:.6f}")
    print(f"obscured_rate: {rep.obscured_rate:.6f}")
    print(f"slack: {rep.slack:.6f}")
    if rep.flagged:
        print(f"finite-size gap: {rep.finite_size_gap:.6f} "
              f"(estimate under certificate; grow the box or trials)")
    if args.out:
        hn.write_csv(args.out, rep.rows())
    return 0


def _dispatch(args) -> int:
    if args.cmd == "analyze":
        return _cmd_analyze(args)
    if args.cmd == "sample":
        return _cmd_sample(args)
    if args.cmd == "perc":
        spec = hn.ExperimentSpec(kind="perc", epsilons=args.epsilons,
                                 box=args.box, trials=args.trials,
                                 seed=args.seed, c=args.c, proxy=args.proxy,
                                 threads=args.threads)
        _emit_rows(hn.run_perc_sweep(spec), args)
        return 0
    if args.cmd == "repair1d":
        spec = hn.ExperimentSpec(kind="repair1d", sft=args.sft,
                                 epsilons=args.epsilons, box=args.box,
                                 trials=args.trials, seed=args.seed,
                                 threads=args.threads)
        _emit_rows(hn.run_repair1d_sweep(spec), args)
        return 0
    if args.cmd == "repair2d":
        spec = hn.ExperimentSpec(kind="repair2d", sft=args.periodic,
                                 epsilons=args.epsilons, box=args.box,
                                 trials=args.trials, seed=args.seed,
                                 c=args.c, threads=args.threads)
        _emit_rows(hn.run_repair2d_sweep(spec), args)
        return 0
    if args.cmd == "robinson":
        return _cmd_robinson(args)
    if args.cmd == "instability":
        return _cmd_instability(args)
    if args.cmd == "sweep":
        spec = hn.ExperimentSpec(kind=args.kind, sft=args.sft,
                                 epsilons=args.epsilons, box=args.box,
                                 trials=args.trials, seed=args.seed,
                                 c=args.c, scales=args.scales,
                                 proxy=args.proxy, threads=args.threads,
                                 out=args.out, plot=args.plot)
        rows = hn.run_sweep(spec)
        if not args.out:
            sys.stdout.write(hn.format_csv(rows))
        return 0
    raise ValueError(f"unknown command {args.cmd!r}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else 2
            return 0 if code == 0 else 2
        return _dispatch(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
