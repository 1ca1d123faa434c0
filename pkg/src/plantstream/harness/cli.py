"""Command-line entry point: ``plantstream {gen,detect,trials,divergence,bound,report}``."""

import argparse
import csv
import json
import os
import sys

from ..distributions import Arm, make_stream
from ..distributions.io import ArraySource, read_sidecar, read_stream, write_stream
from ..divergence import bound_prediction, kl_binomial_gaussian_scan, trunc_tail_prob
from ..divergence.ratios import biclique_ratio_max
from ..divergence.report import SCAN_COLUMNS, scan_records, to_csv, to_json
from ..errors import InvalidParams, PlantStreamError, TrialFailure
from .config import _value, load_config, parse_config
from .runner import build_detector, multi_pass_run, run_trials

EXIT_OK, EXIT_INVALID, EXIT_TRIAL = 0, 2, 3

TRIALS_COLUMNS = ("kind", "detector", "trials", "passes", "seed", "acc_null", "acc_planted",
                  "advantage", "ci_lo", "ci_hi", "max_state_bits")
RATIO_COLUMNS = ("family", "max_ratio", "argmax", "t", "k", "q", "interpretation")
TAIL_COLUMNS = ("kind", "estimate", "ci_lo", "ci_hi", "trials", "exact")
BOUND_COLUMNS = ("formula", "value_bits", "inputs")


def _pairs(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InvalidParams("--set", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _value(v.strip())
    return out


def _config(args):
    over = _pairs(getattr(args, "set", None))
    for key in ("seed", "trials", "passes", "workers", "out", "reveal"):
        val = getattr(args, key, None)
        if val is not None and val is not False:
            over[key] = val
    if args.config:
        return load_config(args.config, over)
    return parse_config("", over)


def _emit(records, columns, fmt, out):
    text = to_csv(records, columns) if fmt == "csv" else to_json(records)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_gen(args):
    cfg = _config(args)
    if not args.out:
        raise InvalidParams("--out", "gen needs an output path")
    src, inst = make_stream(cfg.problem, Arm[args.arm], cfg.seed)
    header = write_stream(args.out, src, arm=inst.arm, reveal=args.reveal)
    print(json.dumps({"path": args.out, "rows": header["rows"], "width": header["width"],
                      "arm": header.get("arm"), "reveal": bool(args.reveal)}))


def cmd_detect(args):
    header, spec, data = read_stream(args.stream)
    sidecar = args.stream + ".reveal.json"
    inst = read_sidecar(sidecar) if os.path.exists(sidecar) else None
    src = ArraySource(spec, data, header["seed"], inst)
    det = build_detector(args.detector, spec, _pairs(args.param), inst)
    verdict, mem = multi_pass_run(det, src, args.passes or 1)
    rec = verdict.to_dict()
    rec.update(detector=args.detector, passes=args.passes or 1, max_state_bits=mem.max_state_bits)
    print(json.dumps(rec, sort_keys=True))


def cmd_trials(args):
    cfg = _config(args)
    adv, mem = run_trials(cfg)
    rec = {"kind": cfg.problem.kind.name, "detector": cfg.detector, "trials": adv.trials,
           "passes": cfg.passes, "seed": cfg.seed, "acc_null": adv.acc_null,
           "acc_planted": adv.acc_planted, "advantage": adv.advantage,
           "ci_lo": adv.wilson_ci_99[0], "ci_hi": adv.wilson_ci_99[1],
           "max_state_bits": mem.max_state_bits}
    _emit([rec], TRIALS_COLUMNS, args.format, cfg.out)


def cmd_divergence(args):
    params = _pairs(args.set)
    if args.tool == "kl-scan":
        ns = [int(n) for n in (args.n or [256, 1024, 4096, 16384, 65536])]
        _emit(scan_records(kl_binomial_gaussian_scan(ns)), SCAN_COLUMNS, args.format, args.out)
    elif args.tool == "ratio-max":
        interp = params.pop("interpretation", "conditional")
        need = [k for k in ("t", "k", "q") if k not in params]
        if need:
            raise InvalidParams(need[0], "ratio-max needs t, k and q")
        rep = biclique_ratio_max(interpretation=interp, **params)
        rec = {"family": rep.family, "max_ratio": rep.max_ratio, "argmax": rep.argmax,
               "t": params["t"], "k": params["k"], "q": params["q"], "interpretation": interp}
        _emit([rec], RATIO_COLUMNS, args.format, args.out)
    else:
        kind = params.pop("kind", "TypicalWeight")
        est = trunc_tail_prob(kind, params, args.trials or 10000, args.seed or 0)
        rec = {"kind": kind, "estimate": est.estimate, "ci_lo": est.ci[0], "ci_hi": est.ci[1],
               "trials": est.trials, "exact": est.exact}
        _emit([rec], TAIL_COLUMNS, args.format, args.out)


def cmd_bound(args):
    pred = bound_prediction(args.formula, **_pairs(args.set))
    rec = pred.to_dict()
    if args.format == "csv":
        rec["inputs"] = json.dumps(rec["inputs"], sort_keys=True)
    _emit([rec], BOUND_COLUMNS, args.format, args.out)


def cmd_report(args):
    header, rows = None, []
    for path in args.inputs:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if header is None:
                header = reader.fieldnames
            elif reader.fieldnames != header:
                raise InvalidParams("inputs", f"{path} has different columns")
            rows.extend(reader)
    if header is None:
        raise InvalidParams("inputs", "nothing to merge")
    _emit(rows, header, args.format, args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="plantstream", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="flat key = value experiment file")
            sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                            help="override or supply a config key")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"), default="json")

    g = sub.add_parser("gen", help="write a stream file (and the hidden sidecar with --reveal)")
    common(g)
    g.add_argument("--arm", choices=[a.name for a in Arm], default="Planted")
    g.add_argument("--reveal", action="store_true")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("detect", help="run one detector on a stream file")
    d.add_argument("stream")
    d.add_argument("--detector", required=True)
    d.add_argument("--param", action="append", metavar="KEY=VALUE")
    d.add_argument("--passes", type=int)
    d.set_defaults(func=cmd_detect)

    t = sub.add_parser("trials", help="run a full seeded experiment")
    common(t)
    t.add_argument("--trials", type=int)
    t.add_argument("--passes", type=int)
    t.add_argument("--workers", type=int)
    t.set_defaults(func=cmd_trials)

    v = sub.add_parser("divergence", help="KL scan, likelihood-ratio max or tail mass")
    v.add_argument("tool", choices=("kl-scan", "ratio-max", "tail-prob"))
    v.add_argument("--n", nargs="*", type=int)
    v.add_argument("--set", action="append", metavar="KEY=VALUE")
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    v.add_argument("--format", choices=("csv", "json"), default="json")
    v.set_defaults(func=cmd_divergence)

    b = sub.add_parser("bound", help="evaluate a memory lower-bound expression")
    b.add_argument("--formula", required=True)
    b.add_argument("--set", action="append", metavar="KEY=VALUE")
    b.add_argument("--out")
    b.add_argument("--format", choices=("csv", "json"), default="json")
    b.set_defaults(func=cmd_bound)

    r = sub.add_parser("report", help="merge CSV reports with identical columns")
    r.add_argument("inputs", nargs="+")
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except TrialFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TRIAL
    except (PlantStreamError, ValueError, KeyError, TypeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
