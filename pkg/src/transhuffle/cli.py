"""Command-line interface.

Exit codes: 0 success (or affirmative verdict), 1 negative verdict from
``verify``, 2 usage or parse error, 3 construction failure, 4 resource guard.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import constructions as C
from . import search as S
from . import words as W
from .core import ResourceGuardError, Shuffle, sample_many
from .diagram import render_ascii, render_svg
from .document import DocumentError, ShuffleDocument, emit, load
from .verify import verify_shuffle

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_CONSTRUCTION, EXIT_GUARD = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_partition(text: str, reps: str | None) -> C.Partition:
    """``"1,2/3/4"`` with representatives ``"2,3,4"`` (default: largest of each block)."""
    blocks = [tuple(_int_list(b)) for b in text.split("/") if b]
    representatives = _int_list(reps) if reps else [max(b) for b in blocks]
    return C.Partition(tuple(blocks), tuple(representatives))


def _sweep_provider(family: str, partition: C.Partition | None, n: int):
    def provider(order: int) -> C.Sweep:
        if family == "partition":
            if order == n:
                return C.partition_sweep(n, partition, [C.simple_sweep(len(b)) for b in partition.blocks])
            return C.simple_sweep(order)
        return C.FAMILIES[family](order)
    return provider


def _sub_provider(method: str):
    if method == "divide":
        return None
    if method == "word":
        return lambda order: C.simple_shuffle_from_word(W.bubble_sort_word(order))
    if method == "sweep":
        return lambda order: C.sweep_shuffle(order, "star")
    raise UsageError(f"unknown sub-shuffle method {method!r}")


def cmd_construct(args) -> int:
    n = args.n
    if n is None or n < 1:
        raise UsageError("--n must be a positive integer")
    provenance: dict = {"method": args.method}
    if args.method == "word":
        if args.word is None:
            word = W.bubble_sort_word(n)
        else:
            letters = _int_list(args.word)
            try:
                word = W.ReducedWord(n, tuple(letters))
            except W.InvalidWordError as exc:
                raise UsageError(str(exc)) from exc
        shuffle = C.simple_shuffle_from_word(word)
        provenance["word"] = list(word.letters)
    elif args.method == "sweep":
        partition = None
        if args.family == "partition":
            if not args.partition:
                raise UsageError("--family partition needs --partition")
            try:
                partition = _parse_partition(args.partition, args.reps)
                partition.check_covers(n)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            provenance["partition"] = {"blocks": [list(b) for b in partition.blocks],
                                       "representatives": list(partition.representatives)}
        provenance["family"] = args.family
        shuffle = C.shuffle_from_sweeps(_sweep_provider(args.family, partition, n), n)
    else:
        if n < 2:
            raise UsageError("divide needs n >= 2")
        provenance["sub"] = args.sub
        shuffle = C.divide_and_conquer_shuffle(n, _sub_provider(args.sub))
    _write(emit(ShuffleDocument(shuffle, provenance)), args.out)
    return EXIT_OK


def _load(path: str) -> ShuffleDocument:
    try:
        return load(path)
    except OSError as exc:
        raise DocumentError(str(exc)) from exc


def cmd_verify(args) -> int:
    doc = _load(args.path)
    report = verify_shuffle(doc.shuffle, args.tol)
    if args.format in ("text", "both"):
        print(report.to_text())
    if args.format in ("json", "both"):
        print(json.dumps(report.to_json()))
    return EXIT_OK if report.uniform else EXIT_NEGATIVE


def cmd_words(args) -> int:
    if args.words_cmd == "count":
        print(W.stanley_count(args.n))
    elif args.words_cmd == "enumerate":
        for word in W.iter_reduced_words(args.n) if args.n <= args.max_order else ():
            print(word)
        if args.n > args.max_order:
            raise ResourceGuardError(f"order {args.n} exceeds enumeration limit {args.max_order}")
    elif args.words_cmd == "random":
        print(W.random_reduced_word(args.n, args.seed))
    elif args.words_cmd == "moves":
        letters = _int_list(args.word)
        try:
            word = W.as_word(letters, args.n)
            if args.braid_at is not None:
                word = W.apply_braid_move(word, args.braid_at)
            elif args.commute_at is not None:
                word = W.apply_commuting_move(word, args.commute_at)
            else:
                raise UsageError("give --braid-at or --commute-at")
        except (W.InvalidWordError, W.MoveError) as exc:
            raise UsageError(str(exc)) from exc
        print(word)
    return EXIT_OK


def cmd_search(args) -> int:
    if args.lmin < 0 or args.lmax < args.lmin or args.restarts < 1 or args.budget < 1:
        raise UsageError("need 0 <= lmin <= lmax, restarts >= 1, budget >= 1")
    survey = S.minimum_length_survey(
        args.n, args.lmin, args.lmax, restarts=args.restarts, tol=args.tol, budget=args.budget,
        sample=args.sample, seed=args.seed, threads=args.threads, checkpoint=args.resume,
        stop_on_feasible=args.stop_on_feasible)
    _write(json.dumps(survey.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_diagram(args) -> int:
    shuffle = _load(args.path).shuffle
    text = render_svg(shuffle) if args.format == "svg" else render_ascii(shuffle)
    _write(text, args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    shuffle: Shuffle = _load(args.path).shuffle
    if args.count < 0:
        raise UsageError("--count must be nonnegative")
    lines = [" ".join(map(str, perm.image)) for perm in sample_many(shuffle, args.count, args.seed)]
    _write("".join(line + "\n" for line in lines), args.out)
    return EXIT_OK


def _default_threads() -> int:
    try:
        return int(os.environ.get("TRANSHUFFLE_THREADS", "1"))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transhuffle", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker processes for search (default: $TRANSHUFFLE_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a shuffle document")
    p.add_argument("--method", choices=("word", "sweep", "divide"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--word", help="comma-separated reduced word (default: bubble sort word)")
    p.add_argument("--family", choices=("simple", "star", "partition"), default="simple")
    p.add_argument("--partition", help='blocks of 1..n-1 for the top sweep, e.g. "1,2/3/4"')
    p.add_argument("--reps", help="block representatives, comma-separated")
    p.add_argument("--sub", choices=("divide", "word", "sweep"), default="divide",
                   help="sub-shuffle method for divide")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="compute the exact law and report")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=None, help="real-mode tolerance (default 1e-10)")
    p.add_argument("--format", choices=("text", "json", "both"), default="both")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("words", help="reduced words")
    wsub = p.add_subparsers(dest="words_cmd", required=True)
    q = wsub.add_parser("count")
    q.add_argument("--n", type=int, required=True)
    q = wsub.add_parser("enumerate")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--max-order", type=int, default=W.MAX_ENUMERATION_ORDER)
    q = wsub.add_parser("random")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q = wsub.add_parser("moves")
    q.add_argument("--word", required=True)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--braid-at", type=int)
    q.add_argument("--commute-at", type=int)
    p.set_defaults(func=cmd_words)

    p = sub.add_parser("search", help="survey minimum shuffle lengths")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lmin", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--restarts", type=int, default=S.DEFAULT_RESTARTS)
    p.add_argument("--tol", type=float, default=S.DEFAULT_TOL)
    p.add_argument("--budget", type=int, default=S.DEFAULT_BUDGET,
                   help="maximum raw sequence count for exhaustive enumeration")
    p.add_argument("--sample", type=int, default=None,
                   help="candidates to sample when the budget is exceeded")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", metavar="CHECKPOINT", help="append-only checkpoint file")
    p.add_argument("--stop-on-feasible", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("diagram", help="draw a ladder diagram")
    p.add_argument("path")
    p.add_argument("--format", choices=("svg", "ascii"), default="svg")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("sample", help="draw permutations from a shuffle")
    p.add_argument("path")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except S.BudgetExceeded as exc:
        print(f"error: {exc} (pass --sample or raise --budget)", file=sys.stderr)
        return EXIT_USAGE
    except (C.ConstructionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
