"""Batch command line front end.

Every command that writes files also writes a run manifest next to them
(``<output>.manifest.json``, or ``manifest.json`` inside a sweep directory).
``lshdedup replay MANIFEST --out-dir DIR`` reruns a recorded command with its
outputs redirected into ``DIR``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import ingest, input_digest, read_labeled, write_labeled
from .evaluation import SCORE_MODES, SweepGrid, duplication_percentage, evaluate, summary_table, sweep
from .lsh import DEFAULT_BUCKET_CAP, DEFAULT_SEED, VERIFY_MODES, LshParams, build_index, dedup_scan
from .manifest import RunManifest, manifest_path_for
from .storage import load_index, save_index
from .synth import SynthConfig, synthesize

logger = logging.getLogger("lshdedup")

# flags whose values are output locations, used by replay to redirect them
OUTPUT_FLAGS = {
    "synth": ("--out",),
    "index": ("--out",),
    "dedup": ("--pairs-out", "--clusters-out"),
    "eval": ("--report-out", "--roc-out"),
    "sweep": ("--out-dir",),
    "report": ("--out",),
}


class CommandError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CommandError(f"usage: {message}")


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip()]


def _float_list(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def _add_lsh_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--perms", type=int, default=128, help="number of hash functions (k)")
    p.add_argument("--ngram", type=int, default=12, help="character n-gram size")
    p.add_argument("--threshold", type=float, default=0.65, help="Jaccard threshold")
    p.add_argument("--bands", type=int, help="override the band count chosen for the threshold")
    p.add_argument("--rows", type=int, help="override the rows per band")
    p.add_argument("--verify", choices=VERIFY_MODES, default="exact")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="hash family seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lshdedup", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="build a labeled near-duplicate benchmark")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dup-fraction", type=float, default=0.25)
    p.add_argument("--res-low", type=float, default=0.87)
    p.add_argument("--res-high", type=float, default=0.94)
    p.add_argument("--donor-pool", type=int, default=2000)
    p.add_argument("--donor-articles", type=int, default=300)
    p.add_argument("--donor-len-min", type=int, default=8)
    p.add_argument("--donor-len-max", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("index", help="build and save an LSH index")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_lsh_flags(p)

    p = sub.add_parser("dedup", help="find duplicate pairs and clusters")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--index")
    src.add_argument("--in", dest="input")
    p.add_argument("--pairs-out", required=True)
    p.add_argument("--clusters-out", required=True)
    p.add_argument("--bucket-cap", type=int, default=DEFAULT_BUCKET_CAP)
    _add_lsh_flags(p)

    p = sub.add_parser("eval", help="ROC/AUC and timing on a labeled corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--report-out", required=True)
    p.add_argument("--roc-out", required=True)
    p.add_argument("--score-mode", choices=SCORE_MODES, default="removable")
    _add_lsh_flags(p)

    p = sub.add_parser("sweep", help="evaluate a (perms x ngram x threshold) grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--perms-list", type=_int_list, default=[64, 128])
    p.add_argument("--ngram-list", type=_int_list, default=[12, 16])
    p.add_argument("--threshold-list", type=_float_list, default=[0.65, 0.75, 0.8])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--verify", choices=VERIFY_MODES, default="exact")
    p.add_argument("--score-mode", choices=SCORE_MODES, default="removable")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("report", help="share of documents a dedup pass would remove")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    _add_lsh_flags(p)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    return parser


def _params(args: argparse.Namespace) -> LshParams:
    if (args.bands is None) != (args.rows is None):
        raise CommandError("--bands and --rows must be given together")
    if args.bands is None:
        return LshParams.for_threshold(args.perms, args.ngram, args.threshold, args.verify)
    return LshParams(args.perms, args.ngram, args.threshold, args.bands, args.rows, args.verify)


def _manifest(args: argparse.Namespace, argv: Sequence[str], config: dict, seeds: dict, outputs: list[str],
              extra: dict | None = None) -> RunManifest:
    digest = input_digest(args.input) if getattr(args, "input", None) else None
    return RunManifest(args.command, list(argv), config, seeds, digest, outputs, extra or {})


def _write_manifest(manifest: RunManifest, outputs: Sequence[str]) -> None:
    for out in outputs:
        manifest.write(manifest_path_for(out))


def cmd_synth(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    cfg = SynthConfig(
        duplicate_fraction=args.dup_fraction,
        resemblance_low=args.res_low,
        resemblance_high=args.res_high,
        donor_pool_size=args.donor_pool,
        donor_article_count=args.donor_articles,
        donor_len_min=args.donor_len_min,
        donor_len_max=args.donor_len_max,
        rng_seed=args.seed,
    )
    labeled = synthesize(ingest(args.input), cfg, workers=args.workers)
    write_labeled(labeled, args.out)
    extra = {"donor_ids": labeled.donor_ids, "skipped_sources": labeled.skipped_sources}
    _write_manifest(_manifest(args, argv, cfg.to_dict(), {"rng_seed": cfg.rng_seed}, [args.out], extra), [args.out])
    return {"documents": len(labeled.documents), "duplicates": len(labeled.provenance)}


def cmd_index(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    params = _params(args)
    index = build_index(ingest(args.input), params, seed=args.seed, workers=args.workers)
    save_index(index, args.out)
    _write_manifest(_manifest(args, argv, params.to_dict(), {"family_seed": index.family_seed}, [args.out]), [args.out])
    return {"documents": len(index), "bands": params.bands, "rows": params.rows}


def cmd_dedup(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    if args.index:
        index = load_index(args.index)
        digest = input_digest(args.index)
    else:
        index = build_index(ingest(args.input), _params(args), seed=args.seed, workers=args.workers)
        digest = input_digest(args.input)
    result = dedup_scan(index, bucket_cap=args.bucket_cap)
    with open(args.pairs_out, "w", encoding="utf-8", newline="\n") as out:
        out.write("id_a\tid_b\tsimilarity\n")
        for pair in result.pairs:
            out.write(f"{pair.id_a}\t{pair.id_b}\t{pair.similarity!r}\n")
    clusters = [
        {"representative": c.representative, "removable": c.removable, "size": c.size} for c in result.clusters
    ]
    Path(args.clusters_out).write_text(json.dumps(clusters, indent=2) + "\n", encoding="utf-8")
    outputs = [args.pairs_out, args.clusters_out]
    manifest = RunManifest(
        args.command, list(argv), index.params.to_dict(), {"family_seed": index.family_seed}, digest, outputs
    )
    _write_manifest(manifest, outputs)
    return {"pairs": len(result.pairs), "clusters": len(result.clusters)}


def cmd_eval(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    params = _params(args)
    report = evaluate(read_labeled(args.input), params, seed=args.seed, workers=args.workers,
                      score_mode=args.score_mode)
    Path(args.report_out).write_text(report.to_json() + "\n", encoding="utf-8")
    Path(args.roc_out).write_text(report.roc_csv(), encoding="utf-8")
    outputs = [args.report_out, args.roc_out]
    config = {**params.to_dict(), "score_mode": args.score_mode}
    _write_manifest(_manifest(args, argv, config, {"family_seed": report.seed}, outputs), outputs)
    return {"auc": report.auc}


def cmd_sweep(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    grid = SweepGrid(tuple(args.perms_list), tuple(args.ngram_list), tuple(args.threshold_list))
    cells = sweep(read_labeled(args.input), grid, seed=args.seed, verify_mode=args.verify,
                  workers=args.workers, score_mode=args.score_mode)
    out_dir = Path(args.out_dir)
    (out_dir / "cells").mkdir(parents=True, exist_ok=True)
    outputs = []
    for cell in cells:
        path = out_dir / "cells" / f"k{cell.k}-n{cell.n}-t{cell.threshold}.json"
        path.write_text(json.dumps(cell.to_dict(), indent=2) + "\n", encoding="utf-8")
        outputs.append(str(path))
    (out_dir / "summary.tsv").write_text(summary_table(cells), encoding="utf-8")
    (out_dir / "summary.json").write_text(
        json.dumps([c.to_dict() for c in cells], indent=2) + "\n", encoding="utf-8"
    )
    outputs += [str(out_dir / "summary.tsv"), str(out_dir / "summary.json")]
    config = {**grid.to_dict(), "verify_mode": args.verify, "score_mode": args.score_mode}
    _manifest(args, argv, config, {"family_seed": args.seed}, outputs).write(out_dir / "manifest.json")
    best = cells[0]
    return {"cells": len(cells), "best": {"k": best.k, "n": best.n, "threshold": best.threshold, "auc": best.auc}}


def cmd_report(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    params = _params(args)
    docs = ingest(args.input)
    fraction = duplication_percentage(docs, params, seed=args.seed, workers=args.workers)
    result = {
        "corpus": Path(args.input).name,
        "documents": len(docs),
        "duplicated_fraction": fraction,
        "duplicated_percent": round(100 * fraction, 2),
        "params": params.to_dict(),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
        _write_manifest(_manifest(args, argv, params.to_dict(), {"family_seed": args.seed}, [args.out]), [args.out])
    return result


def redirect_outputs(argv: Sequence[str], command: str, out_dir: Path) -> list[str]:
    """Rewrite the output-path flags of a recorded argv to point into ``out_dir``."""
    flags = OUTPUT_FLAGS[command]
    out = list(argv)
    for i, token in enumerate(out):
        name, eq, value = token.partition("=")
        if name not in flags:
            continue
        if eq:
            out[i] = f"{name}={out_dir / Path(value).name}"
        elif i + 1 < len(out):
            out[i + 1] = str(out_dir / Path(out[i + 1]).name)
    return out


def cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> dict:
    manifest = RunManifest.read(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    new_argv = redirect_outputs(manifest.argv, manifest.command, out_dir)
    status = main(new_argv)
    if status != 0:
        raise CommandError(f"replayed command exited with status {status}")
    return {"replayed": manifest.command, "argv": new_argv}


COMMANDS = {
    "synth": cmd_synth,
    "index": cmd_index,
    "dedup": cmd_dedup,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "replay": cmd_replay,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        # the recorded argv leaves out global flags that never change outputs
        command_argv = argv[argv.index(args.command):]
        result = COMMANDS[args.command](args, command_argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - reported as one parseable line
        kind = "UsageError" if isinstance(exc, CommandError) else type(exc).__name__
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 2 if isinstance(exc, CommandError) else 1
    print(json.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
