"""Command-line interface.

Every subcommand reads JSON (a tensor, or a decomposition that is
assembled when a tensor is needed) and writes JSON, except ``slice-scan``
which writes CSV.  ``-`` stands for stdin or stdout.  Exit codes: 0 on
success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import decomp as dc
from . import dimvar, graphs, latin, svt, w222
from .tensor_core import (
    TensorError,
    assemble,
    decomposition_from_json,
    decomposition_to_json,
    tensor_from_json,
    tensor_to_json,
    validate_shape,
)

SEED_ENV = "TWO_ORTHO_SEED"
SLICE_COLUMNS = ["t000", "t001", "t111", "f", "det", "q23a", "q23b", "q13a", "q13b", "q12a", "q12b", "stratum"]
SLICE_DEFAULT_RANGE = (-3.0, 3.0, 50)


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    input: str | None
    out: str
    rng_seed: int
    num_starts: int | None


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    return "%.17g" % x


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_shape(text: str) -> tuple[int, ...]:
    try:
        return validate_shape(int(p) for p in text.lower().split("x"))
    except (ValueError, TensorError) as exc:
        raise UsageError(f"bad shape {text!r}: {exc}") from None


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def read_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno}") from None


def read_decomposition(path: str):
    obj = read_json(path)
    if not isinstance(obj, dict) or "terms" not in obj:
        raise UsageError(f"{path} does not hold a decomposition")
    return decomposition_from_json(obj)


def read_tensor(path: str) -> np.ndarray:
    """A tensor file, or a decomposition file which is assembled."""
    obj = read_json(path)
    if isinstance(obj, dict) and "terms" in obj:
        return assemble(decomposition_from_json(obj))
    if not isinstance(obj, dict):
        raise UsageError(f"{path} does not hold a tensor")
    return tensor_from_json(obj)


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _svt_config(cfg: CliConfig) -> svt.SvtConfig:
    kw = {"rng_seed": cfg.rng_seed}
    if cfg.num_starts is not None:
        kw["num_starts"] = cfg.num_starts
    return svt.SvtConfig(**kw)


# Subcommands

def cmd_svt(cfg: CliConfig, args) -> dict:
    t = read_tensor(cfg.input)
    scfg = _svt_config(cfg)
    if args.best:
        return {"best": svt.best_rank_one(t, scfg).to_json()}
    return {"records": [r.to_json() for r in svt.enumerate_svts(t, scfg)]}


def cmd_deflate(cfg: CliConfig, args) -> dict:
    scfg = _svt_config(cfg)
    order = None
    if args.strategy == "given-order":
        order = read_decomposition(cfg.input)
        t = assemble(order)
    else:
        t = read_tensor(cfg.input)
    try:
        res = dc.deflate(t, args.strategy, max_terms=args.max_terms, tol=args.tol, cfg=scfg,
                         targets=args.targets, order=order)
    except dc.DeflationError as exc:
        raise VerificationFailure(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {"decomposition": decomposition_to_json(res.decomposition),
            "residual_norms": list(res.residual_norms), "exact": res.exact}


def cmd_verify(cfg: CliConfig, args) -> dict:
    d = read_decomposition(cfg.input)
    report = dc.verification_report(d, args.tol, _svt_config(cfg))
    if not report["two_orthogonal"]:
        raise VerificationFailure("; ".join(report["failures"]), report)
    return report


def cmd_classify222(cfg: CliConfig, args) -> dict:
    t = read_tensor(cfg.input)
    if t.shape != (2, 2, 2):
        raise UsageError(f"classify222 needs shape (2, 2, 2), got {t.shape}")
    return w222.classify_222(t, args.tol).to_json()


def cmd_gen_latin(cfg: CliConfig, args) -> dict:
    if not args.shape:
        raise UsageError("gen-latin needs --shape")
    shape = parse_shape(args.shape)
    return decomposition_to_json(latin.maximal_two_orthogonal_decomposition(shape, rng_seed=cfg.rng_seed))


def cmd_graphs(cfg: CliConfig, args) -> dict:
    if args.scan is not None:
        scan = graphs.conjecture_scan(args.scan, args.max_r)
        return {"d": scan.d, "bound": scan.bound,
                "counts": {str(k): v for k, v in scan.counts.items()},
                "max_dimension": {str(k): v for k, v in scan.max_dimension.items()},
                "witnesses": {str(k): g.to_json() for k, g in scan.witnesses.items()},
                "violations": scan.violations()}
    if cfg.input is None:
        raise UsageError("graphs needs an input decomposition or --scan D")
    obj = read_json(cfg.input)
    if isinstance(obj, dict) and "terms" in obj:
        d = decomposition_from_json(obj)
        gt, shape = graphs.graphical_description(d), d.shape
    else:
        if not args.shape:
            raise UsageError("a graph tuple input needs --shape")
        gt, shape = graphs.GraphTuple.from_json(obj), parse_shape(args.shape)
    verdict = graphs.is_valid_graphical_description(gt, shape)
    out = {"graphs": gt.to_json(), "status": verdict.status, "reason": verdict.reason}
    if all(n == 2 for n in shape) and verdict.status == "valid":
        out["expected_dimension"] = graphs.expected_dimension_binary(gt)
    if verdict.status == "invalid":
        raise VerificationFailure(verdict.reason, out)
    return out


def cmd_dim_bound(cfg: CliConfig, args) -> dict:
    rng = np.random.default_rng(cfg.rng_seed)
    if args.preset:
        if args.preset != "444":
            raise UsageError(f"unknown preset {args.preset!r}")
        x = dimvar.random_preset_444_params(cfg.rng_seed)
        f, expected = dimvar.preset_444_map, dimvar.PRESET_444_PARAMS
    else:
        if not args.shape:
            raise UsageError("dim-bound needs --shape nxd or --preset 444")
        parts = parse_shape(args.shape)
        if len(parts) != 2:
            raise UsageError("dim-bound --shape takes n x d, e.g. 2x3")
        p = dimvar.PhiParametrization(*parts)
        m = parts[0] ** (parts[1] - 1)
        x = p.point(rng.uniform(0.5, 2.0, m) * rng.choice([-1.0, 1.0], m))
        f, expected = p, p.expected_dimension
    s = dimvar.jacobian_singular_values(f, x)
    rank = int(np.sum(s > dimvar.RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    return {"rank": rank, "expected": expected, "singular_values": s.tolist()}


def cmd_nearest222(cfg: CliConfig, args) -> dict:
    t = read_tensor(cfg.input)
    if t.shape != (2, 2, 2):
        raise UsageError(f"nearest222 needs shape (2, 2, 2), got {t.shape}")
    res = w222.nearest_two_orthogonal_222(t, cfg.num_starts or 500, cfg.rng_seed)
    return {
        "nearest": tensor_to_json(res.nearest),
        "component": res.component,
        "distance": res.distance,
        "stratum": w222.classify_222(res.nearest).stratum,
        "census": {comp: [{"point": tensor_to_json(p.tensor), "distance": p.distance,
                           "kkt_residual": p.kkt_residual} for p in pts]
                   for comp, pts in res.census.items()},
    }


def _parse_range(text: str | None) -> tuple[float, float, int]:
    if text is None:
        return SLICE_DEFAULT_RANGE
    try:
        lo, hi, steps = text.split(",")
        out = (float(lo), float(hi), int(steps))
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected min,max,steps") from None
    if not (math.isfinite(out[0]) and math.isfinite(out[1])) or out[2] < 1:
        raise UsageError(f"bad range {text!r}; need finite bounds and at least one step")
    return out


def slice_tensors(t000, t001, t111) -> np.ndarray:
    """Tensors on the plotted affine slice ``t010 = 1, t100 = 2 t000, t110 = 1, t101 = 2, t011 = 3``."""
    t000, t001, t111 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t000, t001, t111)))
    b = np.zeros(t000.shape + (2, 2, 2))
    b[..., 0, 0, 0], b[..., 0, 0, 1], b[..., 1, 1, 1] = t000, t001, t111
    b[..., 0, 1, 0], b[..., 1, 0, 0], b[..., 1, 1, 0] = 1.0, 2 * t000, 1.0
    b[..., 1, 0, 1], b[..., 0, 1, 1] = 2.0, 3.0
    return b


def slice_rows(grid: Sequence[tuple[float, float, int]]):
    """Rows of the slice scan in grid order (t000 slowest, t111 fastest)."""
    axes = [np.linspace(lo, hi, n) for lo, hi, n in grid]
    if any(a.size == 0 for a in axes):
        raise UsageError("empty grid")
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    b = slice_tensors(pts[:, 0], pts[:, 1], pts[:, 2])
    cert = w222.certificates(b)
    q = w222.eval_w2_quadrics(b)
    cols = [pts[:, 0], pts[:, 1], pts[:, 2], w222.eval_f(b), w222.eval_det(b),
            q["23"][0], q["23"][1], q["13"][0], q["13"][1], q["12"][0], q["12"][1]]
    for i in range(len(pts)):
        yield [c[i] for c in cols] + [cert["stratum"][i]]


def slice_scan(grid: Sequence[tuple[float, float, int]], out: str) -> int:
    """Write the slice CSV to ``out``; returns the number of data rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SLICE_COLUMNS)
    n = 0
    for row in slice_rows(grid):
        writer.writerow([format_float(float(v)) for v in row[:-1]] + [row[-1]])
        n += 1
    write_text(out, buf.getvalue())
    return n


def cmd_slice_scan(cfg: CliConfig, args) -> None:
    grid = [_parse_range(args.t000), _parse_range(args.t001), _parse_range(args.t111)]
    slice_scan(grid, cfg.out)


# Argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twoortho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, input_=True, optional_input=False):
        p = sub.add_parser(name, help=help_)
        if input_:
            p.add_argument("input", nargs="?" if optional_input else None, help="JSON file or - for stdin")
        p.add_argument("--out", default="-", help="output path, - for stdout")
        p.add_argument("--seed", type=int, default=0, help=f"RNG seed (overridden by ${SEED_ENV})")
        p.add_argument("--starts", type=int, default=None, help="number of random starts")
        return p

    p = add("svt", "enumerate singular vector tuples")
    p.add_argument("--best", action="store_true", help="only the best rank-one approximation")
    p = add("deflate", "successive critical rank-one deflation")
    p.add_argument("--strategy", choices=["greedy", "by-weight", "given-order"], default="greedy")
    p.add_argument("--max-terms", type=int, default=100)
    p.add_argument("--tol", type=float, default=dc.EXACT_RTOL)
    p.add_argument("--targets", type=lambda s: [float(v) for v in s.split(",")], default=None,
                   help="comma-separated target weights for by-weight")
    p = add("verify", "verify a decomposition")
    p.add_argument("--tol", type=float, default=dc.ORTHO_TOL)
    p = add("classify222", "stratum certificate of a 2x2x2 tensor")
    p.add_argument("--tol", type=float, default=w222.CLASSIFY_TOL)
    p = add("gen-latin", "maximal basis-aligned two-orthogonal decomposition", input_=False)
    p.add_argument("--shape", help="n1xn2x...xnd")
    p = add("graphs", "graphical description of a decomposition, or the binary scan", optional_input=True)
    p.add_argument("--shape", help="shape for a graph tuple input")
    p.add_argument("--scan", type=int, default=None, help="enumerate binary descriptions for d factors")
    p.add_argument("--max-r", type=int, default=None)
    p = add("dim-bound", "Jacobian rank of the alternating family", input_=False)
    p.add_argument("--shape", help="n x d, e.g. 2x3")
    p.add_argument("--preset", default=None, help="444 for the non-basis-aligned family")
    add("nearest222", "nearest two-orthogonal 2x2x2 tensor")
    p = add("slice-scan", "CSV of the certificates on an affine slice", input_=False)
    for axis in ("t000", "t001", "t111"):
        p.add_argument(f"--{axis}", default=None, help="min,max,steps (default -3,3,50)")
    return parser


COMMANDS = {
    "svt": cmd_svt, "deflate": cmd_deflate, "verify": cmd_verify, "classify222": cmd_classify222,
    "gen-latin": cmd_gen_latin, "graphs": cmd_graphs, "dim-bound": cmd_dim_bound,
    "nearest222": cmd_nearest222, "slice-scan": cmd_slice_scan,
}


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = args.seed
        if os.environ.get(SEED_ENV):
            try:
                seed = int(os.environ[SEED_ENV])
            except ValueError:
                raise UsageError(f"{SEED_ENV} must be an integer") from None
        cfg = CliConfig(args.command, getattr(args, "input", None), args.out, seed, args.starts)
        try:
            result = COMMANDS[args.command](cfg, args)
        except VerificationFailure as exc:
            if len(exc.args) > 1:
                write_text(cfg.out, dumps(exc.args[1]) + "\n")
            print(f"twoortho {args.command}: {exc.args[0]}", file=sys.stderr)
            return 1
        except (TensorError, KeyError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        if result is not None:
            write_text(cfg.out, dumps(result) + "\n")
        return 0
    except UsageError as exc:
        print(f"twoortho: {exc}", file=sys.stderr)
        return 2
    except (svt.SvtError, w222.RecoveryError, RuntimeError, ValueError) as exc:
        print(f"twoortho: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
