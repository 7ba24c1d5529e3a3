"""Command-line front end.

Subcommands: norm, seqreg {doubling|urp|lrp|dual|ei}, convexity
{constants|modulus|qlaw|split|sumbound|remark}, greedy
{coeffs|tga|qg|phiu|phil|km|lm|bidem}, squeeze, catalog list.

Output is JSON on stdout unless --out is given; tables go out as CSV whose
first line records the config hash, seed and budget.  A fixed seed pins
every sampled value, so identical invocations produce identical bytes.

Exit codes: 0 success, 2 invalid input, 3 budget or horizon exhausted,
4 invariant violation detected during the run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import convexity, embeddings, greedy, lorentz, seqreg
from .errors import BudgetExceededError, HorizonExhaustedError, InvariantViolationError

DEFAULT_BUDGET = int(os.environ.get("GREEDYSPACES_BUDGET", greedy.DEFAULT_BUDGET))
DEFAULT_HORIZON = 4096


def _config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


class Emitter:
    def __init__(self, args, command: str):
        self.out = args.out
        self.fmt = args.format
        self.precision = args.precision
        self.seed = args.seed
        self.budget = args.budget
        cfg = {k: v for k, v in vars(args).items() if k != "func"}
        cfg["command"] = command
        self.hash = _config_hash(cfg)

    def _float(self, x) -> str:
        if isinstance(x, float):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return f"%.{self.precision}g" % x
        return str(x)

    def _write(self, text: str):
        if self.out:
            with open(self.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    def emit_json(self, payload: dict):
        payload = dict(payload)
        payload["config"] = {
            "hash": self.hash,
            "seed": self.seed,
            "budget": self.budget,
        }
        self._write(json.dumps(payload, sort_keys=True, default=_jsonable) + "\n")

    def emit_table(self, header: list, rows: list):
        lines = [f"# config={self.hash} seed={self.seed} budget={self.budget}"]
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(self._float(x) for x in row))
        self._write("\n".join(lines) + "\n")

    def emit(self, payload: dict, header=None, rows=None):
        if self.fmt == "csv" and rows is not None:
            self.emit_table(header, rows)
        else:
            self.emit_json(payload)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    raise TypeError(f"not JSON serializable: {type(x)}")


def _parse_vector(text: str) -> np.ndarray:
    vec = np.asarray(json.loads(text), dtype=float)
    if vec.ndim != 1:
        raise ValueError("expected a flat JSON array of numbers")
    return vec


def _parse_vectors(text: str) -> list:
    rows = json.loads(text)
    return [np.asarray(r, dtype=float) for r in rows]


def _parse_ambient(text: str, n: int) -> convexity.NormOracle:
    """'l<p>:<dim>', 'linf:<dim>', or a LorentzSpec JSON object."""
    text = text.strip()
    if text.startswith("{"):
        spec = lorentz.spec_from_json(json.loads(text), n)
        return convexity.NormOracle.from_lorentz(spec)
    head, _, dim = text.partition(":")
    dim = int(dim) if dim else n
    if head == "linf":
        return convexity.NormOracle.lp(math.inf, dim)
    if head.startswith("l"):
        return convexity.NormOracle.lp(float(head[1:]), dim)
    raise ValueError(f"cannot parse ambient descriptor {text!r}")


def _parse_basis(args) -> greedy.Basis:
    if getattr(args, "catalog", None):
        name, _, m = args.catalog.partition(":")
        if not m:
            raise ValueError("catalog basis needs a size, e.g. l2:16")
        return greedy.make_catalog_basis(name, int(m))
    if getattr(args, "basis", None):
        obj = json.loads(args.basis)
        vectors = np.asarray(obj["vectors"], dtype=float)
        ambient = _parse_ambient(obj["ambient"], vectors.shape[1]) if isinstance(
            obj["ambient"], str
        ) else convexity.NormOracle.from_lorentz(
            lorentz.spec_from_json(obj["ambient"], vectors.shape[1])
        )
        duals = obj.get("duals", "auto-gram")
        if isinstance(duals, str):
            if duals != "auto-gram":
                raise ValueError("duals must be a matrix or 'auto-gram'")
            if vectors.shape[0] != vectors.shape[1]:
                raise ValueError("auto-gram needs a square vector matrix")
            try:
                duals = np.linalg.inv(vectors).T
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"auto-gram failed: {exc}") from exc
        else:
            duals = np.asarray(duals, dtype=float)
        return greedy.Basis(vectors=vectors, duals=duals, ambient=ambient)
    raise ValueError("provide --catalog NAME:M or --basis JSON")


def _parse_mrange(args, basis_size: int) -> list:
    if getattr(args, "mrange", None):
        lo, _, hi = args.mrange.partition(":")
        return list(range(int(lo), int(hi) + 1))
    if getattr(args, "m", None) is not None:
        return [args.m]
    return sorted({2**j for j in range(int(math.log2(basis_size)) + 1)} | {basis_size})


# ---------------------------------------------------------------------- norm

def _cmd_norm(args, emitter):
    vec = _parse_vector(args.vector)
    n = args.N if args.N else len(vec)
    spec = lorentz.spec_from_json(json.loads(args.spec), max(n, len(vec)))
    value = lorentz.norm(vec, spec)
    sys.stdout.write(emitter._float(value) + "\n")
    return 0


# -------------------------------------------------------------------- seqreg

def _cmd_seqreg(args, emitter):
    n = args.N
    payload = {"scope": "finite-horizon", "N": n, "sequence": args.seq}
    if args.action == "doubling":
        tau = seqreg.parse_positive_sequence(args.seq, n)
        payload["doubling_ratio"] = seqreg.doubling_ratio(tau)
    elif args.action == "urp":
        tau = seqreg.parse_positive_sequence(args.seq, n)
        payload["b"] = seqreg.urp_witness(tau, args.bmax)
        payload["b_max"] = args.bmax
    elif args.action == "lrp":
        tau = seqreg.parse_positive_sequence(args.seq, n)
        payload["b"] = seqreg.lrp_witness(tau, args.bmax)
        payload["b_max"] = args.bmax
    elif args.action == "dual":
        tau = seqreg.parse_positive_sequence(args.seq, n)
        payload["values"] = seqreg.dual_sequence(tau).values.tolist()
    elif args.action == "ei":
        tau = seqreg.parse_positive_sequence(args.seq, n)
        payload["essentially_increasing_ratio"] = seqreg.essentially_increasing_ratio(tau)
    emitter.emit_json(payload)
    return 0


# ----------------------------------------------------------------- convexity

def _constants_payload(c: convexity.ConvexityConstants) -> dict:
    return {
        "eps": c.eps,
        "delta": c.delta,
        "lambda": c.lam,
        "q": c.q,
        "eta": c.eta,
        "K": c.K,
    }


def _cmd_convexity(args, emitter):
    action = args.action or "constants"
    if action == "qlaw":
        c = convexity.qlaw_constants(args.delta, policy=args.policy)
        emitter.emit_json(_constants_payload(c))
        return 0
    if action == "remark":
        value, ratio = convexity.remark_counterexample(args.j, args.m, args.q)
        emitter.emit_json({"norm_value": value, "ratio": ratio, "j": args.j, "m": args.m, "q": args.q})
        return 0

    norm = _parse_ambient(args.ambient, args.N)
    if action == "modulus":
        est = convexity.modulus_estimate(norm, args.eps, budget=args.budget)
        emitter.emit_json({
            "eps": args.eps,
            "estimate": est.value,
            "witness_f": est.witness_f.tolist(),
            "witness_g": est.witness_g.tolist(),
            "evaluations": est.evaluations,
        })
        return 0
    if action == "constants":
        if norm.is_euclidean:
            delta = convexity.hilbert_modulus(args.eps)
            witness = None
        else:
            est = convexity.modulus_estimate(norm, args.eps, budget=args.budget)
            delta = est.value
            witness = {"f": est.witness_f.tolist(), "g": est.witness_g.tolist()}
        if delta <= 0:
            raise InvariantViolationError("no convexity detected at this separation")
        c = convexity.qlaw_constants(min(delta, 1.0), eps=args.eps, policy=args.policy)
        payload = _constants_payload(c)
        if witness:
            payload["witness"] = witness
        emitter.emit_json(payload)
        return 0
    if action == "split":
        fs = _parse_vectors(args.vectors)
        k = convexity.split_point(fs, norm)
        gaps = convexity.balance_gaps(fs, norm)
        emitter.emit_json({
            "k": k,
            "gap_at_k": float(gaps[k]),
            "max_term_norm": float(norm.evaluate_many(np.asarray(fs)).max()),
            "gaps": gaps.tolist(),
        })
        return 0
    if action == "sumbound":
        fs = _parse_vectors(args.vectors)
        if norm.is_euclidean:
            delta = convexity.hilbert_modulus(1.0 / (1.0 + args.C))
        else:
            delta = convexity.modulus_estimate(norm, 1.0 / (1.0 + args.C), budget=args.budget).value
        if delta <= 0:
            raise InvariantViolationError("no convexity detected at this separation")
        c = convexity.qlaw_constants(min(delta, 1.0), eps=1.0 / (1.0 + args.C), policy=args.policy)
        rep = convexity.summation_bound_check(fs, norm, args.C, c, seed=args.seed)
        emitter.emit_json({
            "condition_holds": rep.condition_holds,
            "violation": rep.violation,
            "triples_checked": rep.triples_checked,
            "exhaustive": rep.exhaustive,
            "ratio": rep.ratio,
            "K": rep.K,
            "q": rep.q,
            "C": rep.C,
            "within_bound": rep.within_bound,
        })
        return 0
    raise ValueError(f"unknown convexity action {action!r}")


# -------------------------------------------------------------------- greedy

def _cmd_greedy(args, emitter):
    basis = _parse_basis(args)
    action = args.action
    if action == "coeffs":
        vec = _parse_vector(args.vector)
        emitter.emit_json({"coefficients": greedy.coefficient_transform(vec, basis).coeffs.tolist()})
        return 0
    if action == "tga":
        vec = _parse_vector(args.vector)
        approx = greedy.greedy_step(vec, basis, args.m)
        emitter.emit_json({"m": args.m, "approximation": approx.tolist()})
        return 0
    if action == "qg":
        value = greedy.quasi_greedy_constant(basis, samples=args.samples, seed=args.seed)
        emitter.emit_json({"quasi_greedy_lower_bound": value, "samples": args.samples})
        return 0

    ms = _parse_mrange(args, basis.size)
    rows = []
    mode = args.mode
    for m in ms:
        if action == "phiu":
            v = greedy.super_democracy_upper(basis, m, mode, args.budget, args.samples, args.seed)
            used = mode
        elif action == "phil":
            v = greedy.super_democracy_lower(basis, m, mode, args.budget, args.samples, args.seed)
            used = mode
        elif action == "km":
            v = greedy.conditionality_constant(basis, m, mode, args.budget, seed=args.seed)
            used = mode
        elif action == "lm":
            v = greedy.lebesgue_constant_lower(basis, m, samples=args.samples, seed=args.seed)
            used = "sampled"
        elif action == "bidem":
            v = greedy.bidemocracy_ratio(basis, m, mode, args.budget, args.samples, args.seed)
            used = mode
        else:
            raise ValueError(f"unknown greedy action {action!r}")
        rows.append((m, v, used, args.budget, args.seed))
    emitter.emit(
        {"table": [list(r) for r in rows], "columns": ["m", "value", "mode", "budget", "seed"]},
        header=["m", "value", "mode", "budget", "seed"],
        rows=rows,
    )
    return 0


# ------------------------------------------------------------------- squeeze

def _cmd_squeeze(args, emitter):
    basis = _parse_basis(args)
    report = embeddings.squeeze_report(
        basis,
        args.q,
        math.inf if args.r == "inf" else float(args.r),
        samples=args.samples,
        seed=args.seed,
        lebesgue_samples=args.lebesgue_samples,
    )
    payload = report.to_dict()
    emitter.emit(
        payload,
        header=["m", "lebesgue_lower", "reference"],
        rows=[tuple(row) for row in report.lebesgue_table],
    )
    return 0


# ------------------------------------------------------------------- catalog

def _cmd_catalog(args, emitter):
    if args.action != "list":
        raise ValueError("catalog supports only: list")
    entries = [
        {"name": name, "factory": greedy.CATALOG[name](4).name}
        for name in greedy.catalog_names()
    ]
    emitter.emit_json({"catalog": entries})
    return 0


# ----------------------------------------------------------------- arguments

def _common_options(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--budget", type=int, default=d(DEFAULT_BUDGET))
    parser.add_argument("--out", default=d(None))
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
    parser.add_argument("--precision", type=int, default=d(17))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greedyspaces",
        description="Finite-horizon greedy approximation constants and "
        "weighted sequence-space norms.",
    )
    _common_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        p = sub.add_parser(name, **kw)
        _common_options(p, suppress=True)
        return p

    p_norm = add_parser("norm", help="evaluate a sequence-space norm")
    p_norm.add_argument("--spec", required=True, help="LorentzSpec JSON")
    p_norm.add_argument("--vector", required=True, help="JSON array")
    p_norm.add_argument("--N", type=int, default=0, help="weight horizon")
    p_norm.set_defaults(func=_cmd_norm)

    p_seq = add_parser("seqreg", help="sequence regularity tests")
    p_seq.add_argument("action", choices=("doubling", "urp", "lrp", "dual", "ei"))
    p_seq.add_argument("--seq", required=True, help="sequence generator")
    p_seq.add_argument("--N", type=int, default=DEFAULT_HORIZON)
    p_seq.add_argument("--bmax", type=int, default=64)
    p_seq.set_defaults(func=_cmd_seqreg)

    p_cvx = add_parser("convexity", help="uniform-convexity machinery")
    p_cvx.add_argument(
        "action",
        nargs="?",
        choices=("constants", "modulus", "qlaw", "split", "sumbound", "remark"),
        default="constants",
    )
    p_cvx.add_argument("--ambient", default="l2:16")
    p_cvx.add_argument("--eps", type=float, default=0.5)
    p_cvx.add_argument("--delta", type=float, default=0.1)
    p_cvx.add_argument("--policy", default="midpoint")
    p_cvx.add_argument("--vectors", help="JSON array of vectors")
    p_cvx.add_argument("--C", type=float, default=1.0)
    p_cvx.add_argument("--j", type=int, default=1)
    p_cvx.add_argument("--m", type=int, default=1)
    p_cvx.add_argument("--q", type=float, default=2.0)
    p_cvx.add_argument("--N", type=int, default=16)
    p_cvx.set_defaults(func=_cmd_convexity)

    p_gr = add_parser("greedy", help="basis constants and the greedy algorithm")
    p_gr.add_argument(
        "action",
        choices=("coeffs", "tga", "qg", "phiu", "phil", "km", "lm", "bidem"),
    )
    p_gr.add_argument("--catalog", help="catalog basis NAME:M")
    p_gr.add_argument("--basis", help="basis JSON")
    p_gr.add_argument("--vector", help="JSON array")
    p_gr.add_argument("--m", type=int)
    p_gr.add_argument("--mrange", help="LO:HI inclusive")
    p_gr.add_argument("--mode", default="auto", choices=("auto", "exact", "sampled"))
    p_gr.add_argument("--samples", type=int, default=200)
    p_gr.set_defaults(func=_cmd_greedy)

    p_sq = add_parser("squeeze", help="two-sided embedding report")
    p_sq.add_argument("--catalog", help="catalog basis NAME:M")
    p_sq.add_argument("--basis", help="basis JSON")
    p_sq.add_argument("--q", type=float, required=True)
    p_sq.add_argument("--r", required=True, help="index > q or 'inf'")
    p_sq.add_argument("--samples", type=int, default=100)
    p_sq.add_argument("--lebesgue-samples", dest="lebesgue_samples", type=int, default=16)
    p_sq.set_defaults(func=_cmd_squeeze)

    p_cat = add_parser("catalog", help="shipped bases")
    p_cat.add_argument("action", choices=("list",))
    p_cat.set_defaults(func=_cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    emitter = Emitter(args, args.command)
    try:
        return args.func(args, emitter)
    except (BudgetExceededError, HorizonExhaustedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InvariantViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError, IndexError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
