"""Command-line front end: JSON documents in, JSON documents out.

Usage::

    jmtriple jm-check --input triple.json
    jmtriple approx --verify --restarts 8 < triple.json > result.json

Input documents hold ``m1, m2, m3`` (and ``n1, n2, n3``, ``r`` or ``points``
where a subcommand needs them) plus an optional ``config`` object with
``seed``, ``restarts``, ``max_evals`` and ``tol``. Command-line flags take
precedence over ``config``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analytic import Case, approximate, classify
from .bloch import make_bloch, make_triple, pair_worst_case, stat_distance_sq, total_worst_case
from .compat import JM_TOL, incompatibility_bound, is_jointly_measurable_triple
from .errors import (
    Degenerate,
    IllConditioned,
    NoClosedForm,
    NoConvergence,
    NonFinite,
    NormExceeded,
    NotEnoughIncompatibility,
    OutOfRange,
    PairCompatible,
)
from .fermat import fermat_torricelli, quad_from_triple
from .oracle import OracleConfig, certify, minimize_total_distance

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INVALID_VECTOR = 3
EXIT_NO_CONVERGENCE = 4
EXIT_ILL_CONDITIONED = 5
EXIT_VERIFY_FAILED = 6

_CONFIG_KEYS = {"seed": int, "restarts": int, "max_evals": int, "tol": float}


class SchemaError(ValueError):
    pass


# serialization


def format_float(x):
    """17 significant digits, always readable back as a JSON float."""
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _emit(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, list):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        if not obj:
            return "[]"
        items = ",\n".join(pad + _emit(v, indent, level + 1) for v in obj)
        return "[\n" + items + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            pad + json.dumps(k) + ": " + _emit(v, indent, level + 1) for k, v in obj.items()
        )
        return "{\n" + items + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc, indent=2):
    return _emit(_plain(doc), indent, 0) + "\n"


def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} in input")


def loads(text):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc


def flatten(obj, prefix=""):
    """``(path, value)`` rows of a document, for ``--csv`` output."""
    obj = _plain(obj)
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def dumps_csv(doc):
    lines = ["path,value"]
    for path, value in flatten(doc):
        if isinstance(value, float):
            text = format_float(value)
        elif value is None:
            text = ""
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = str(value)
            if any(c in text for c in ',"\n'):
                text = '"' + text.replace('"', '""') + '"'
        lines.append(f"{path},{text}")
    return "\n".join(lines) + "\n"


# input parsing


def _vector(doc, key):
    v = doc[key]
    if not isinstance(v, list) or len(v) != 3:
        raise SchemaError(f"{key} must be an array of 3 numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise SchemaError(f"{key} must contain only numbers")
    if not all(math.isfinite(float(x)) for x in v):
        raise SchemaError(f"{key} has non-finite entries")
    return [float(x) for x in v]


def _triple(doc, prefix):
    keys = [f"{prefix}{i}" for i in (1, 2, 3)]
    if not all(k in doc for k in keys):
        return None
    return make_triple([_vector(doc, k) for k in keys])


def _require_triple(doc, prefix):
    t = _triple(doc, prefix)
    if t is None:
        raise SchemaError(f"document needs {prefix}1, {prefix}2 and {prefix}3")
    return t


def _config(doc, args):
    cfg = doc.get("config", {})
    if not isinstance(cfg, dict):
        raise SchemaError("config must be an object")
    out = {}
    for key, kind in _CONFIG_KEYS.items():
        if key in cfg:
            val = cfg[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise SchemaError(f"config.{key} must be a number")
            if kind is int and float(val) != int(val):
                raise SchemaError(f"config.{key} must be an integer")
            out[key] = kind(val)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
    return out


def _oracle_config(settings):
    kwargs = {"seed": settings.get("seed", 0)}
    for key in ("restarts", "max_evals"):
        if key in settings:
            kwargs[key] = settings[key]
    try:
        return OracleConfig(**kwargs)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# result fragments


def _ft_doc(ft):
    return {
        "point": ft.point,
        "total_distance": ft.total_distance,
        "residual_norm": ft.residual_norm,
        "at_vertex": ft.at_vertex,
        "iterations": ft.iterations,
        "certified": ft.certified,
    }


def _bound_doc(report):
    return {
        "raw_bound": report.raw_bound,
        "bound": report.bound,
        "quad": report.quad,
        "fermat_torricelli": _ft_doc(report.ft),
    }


def _approx_doc(res):
    return {
        "case": res.case.value,
        "label": res.label,
        "n1": res.n[0],
        "n2": res.n[1],
        "n3": res.n[2],
        "scalars": {k: v for k, v in res.scalars.items()},
        "q_vertices": res.q_vertices,
        "p_fermat": res.p_fermat,
        "achieved": res.achieved,
        "bound": res.bound,
        "optimal_states": list(res.optimal_states),
        "attains_bound": res.attains_bound,
        "jm_margin": res.jm_margin,
        "condition_residuals": list(res.condition_residuals),
    }


def _oracle_doc(result):
    return {
        "best_triple": result.best_triple,
        "best_value": result.best_value,
        "jm_margin": result.jm_margin,
        "evals": result.evals,
        "per_restart_best": list(result.per_restart_best),
        "best_restart": result.best_restart,
    }


def _certificate_doc(cert):
    return {
        "verdict": cert.verdict,
        "rule": cert.rule,
        "achieved_claimed": cert.achieved_claimed,
        "achieved_recomputed": cert.achieved_recomputed,
        "oracle_value": cert.oracle_value,
        "gap": cert.gap,
        "bound": cert.bound,
        "jm_margin": cert.jm_margin,
        "condition_residuals": list(cert.condition_residuals),
        "details": list(cert.details),
        "oracle": _oracle_doc(cert.oracle),
    }


# subcommands; each returns (result fields, exit code, summary)


def cmd_jm_check(doc, settings):
    n = _triple(doc, "n")
    if n is None:
        n = _require_triple(doc, "m")
    tol = settings.get("tol", JM_TOL)
    verdict = is_jointly_measurable_triple(n, tol=tol)
    out = {
        "tol": tol,
        "jointly_measurable": verdict.jointly_measurable,
        "margin": verdict.margin,
        "fermat_torricelli": _ft_doc(verdict.ft),
    }
    word = "jointly measurable" if verdict.jointly_measurable else "not jointly measurable"
    return out, EXIT_OK, (f"{word}, margin {verdict.margin:.6g}", True)


def cmd_bound(doc, settings):
    m = _require_triple(doc, "m")
    report = incompatibility_bound(m)
    return _bound_doc(report), EXIT_OK, (f"bound {report.bound:.10g}", True)


_NUMERIC_ONLY = (NoClosedForm, OutOfRange, Degenerate, PairCompatible, NotEnoughIncompatibility)


def cmd_approx(doc, settings, verify=False):
    m = _require_triple(doc, "m")
    tol = settings.get("tol", JM_TOL)
    cfg = _oracle_config(settings)
    cls = classify(m, jm_tol=tol)
    out = {"case": cls.tag.value, "k": cls.k, "bound": _bound_doc(cls.bound)}
    try:
        res = approximate(m, jm_tol=tol)
    except _NUMERIC_ONLY as exc:
        oracle = minimize_total_distance(m, cfg)
        out["mode"] = "numeric-only"
        out["reason"] = str(exc) if cls.tag is not Case.GENERIC else "no closed form for this case"
        out["oracle"] = _oracle_doc(oracle)
        return out, EXIT_OK, (f"{cls.tag.value}: numeric-only, oracle {oracle.best_value:.10g}", True)

    out["mode"] = "closed-form"
    out["approximation"] = _approx_doc(res)
    summary = f"{res.case.value}: achieved {res.achieved:.10g}, bound {res.bound:.10g}"
    if not verify:
        return out, EXIT_OK, (summary, True)
    cert = certify(m, res, cfg, jm_tol=tol)
    out["certificate"] = _certificate_doc(cert)
    code = EXIT_OK if cert.passed else EXIT_VERIFY_FAILED
    return out, code, (f"{summary}, verify {cert.verdict}", cert.passed)


def cmd_distance(doc, settings):
    m = _require_triple(doc, "m")
    n = _require_triple(doc, "n")
    pairs = []
    for i in range(3):
        value, state = pair_worst_case(m[i], n[i])
        pairs.append({"value": value, "state": state})
    value, state = total_worst_case(m, n)
    out = {"pairs": pairs, "total": {"value": value, "state": state}}
    if "r" in doc:
        r = make_bloch(_vector(doc, "r"))
        per = [stat_distance_sq(r, m[i], n[i]) for i in range(3)]
        out["at_state"] = {"r": r, "values": per, "sum": sum(per)}
    return out, EXIT_OK, (f"total worst case {value:.10g}", True)


def cmd_ft_point(doc, settings):
    if "points" in doc:
        pts = doc["points"]
        if not isinstance(pts, list) or len(pts) != 4:
            raise SchemaError("points must be an array of 4 vectors")
        points = np.array([_vector({"p": p}, "p") for p in pts])
    else:
        t = _triple(doc, "n")
        if t is None:
            t = _require_triple(doc, "m")
        points = quad_from_triple(t)
    ft = fermat_torricelli(points)
    out = {"points": points, "fermat_torricelli": _ft_doc(ft)}
    where = f"vertex {ft.at_vertex}" if ft.at_vertex else "interior"
    return out, EXIT_OK, (f"Fermat-Torricelli point ({where}), total {ft.total_distance:.10g}", True)


COMMANDS = {
    "jm-check": cmd_jm_check,
    "bound": cmd_bound,
    "approx": cmd_approx,
    "distance": cmd_distance,
    "ft-point": cmd_ft_point,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="input JSON document (default stdin)")
    common.add_argument("--output", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--seed", type=int, help="oracle seed (default 0)")
    common.add_argument("--restarts", type=int, help="oracle restarts")
    common.add_argument("--tol", type=float, help="joint measurability tolerance")
    common.add_argument("--csv", action="store_true", help="flatten the result to path,value rows")

    parser = argparse.ArgumentParser(prog="jmtriple", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("jm-check", parents=[common], help="decide joint measurability of a triple")
    sub.add_parser("bound", parents=[common], help="incompatibility lower bound of a target triple")
    approx = sub.add_parser("approx", parents=[common], help="optimal jointly measurable approximation")
    approx.add_argument("--verify", action="store_true", help="certify against the numerical oracle")
    sub.add_parser("distance", parents=[common], help="worst-case distances between two triples")
    sub.add_parser("ft-point", parents=[common], help="Fermat-Torricelli point of four points")
    return parser


def _summarize(command, text, ok):
    tag = "ok" if ok else "error"
    if sys.stderr.isatty() and not os.environ.get("NO_COLOR"):
        tag = ("\033[32m" if ok else "\033[31m") + tag + "\033[0m"
    print(f"jmtriple {command}: {tag}: {text}", file=sys.stderr)


def _error(command, kind, exc):
    _summarize(command, f"{kind}: {exc}", False)
    return None


def execute(args):
    """Run a parsed command line and return ``(exit code, output text)``.

    The text is ``None`` when the command failed before producing a result.
    """
    try:
        if args.input:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = sys.stdin.read()
        doc = loads(text)
        if not isinstance(doc, dict):
            raise SchemaError("input must be a JSON object")
        settings = _config(doc, args)
        handler = COMMANDS[args.command]
        if args.command == "approx":
            result, code, (summary, ok) = handler(doc, settings, verify=args.verify)
        else:
            result, code, (summary, ok) = handler(doc, settings)
    except (SchemaError, NonFinite, OSError) as exc:
        return EXIT_SCHEMA, _error(args.command, "schema", exc)
    except NormExceeded as exc:
        return EXIT_INVALID_VECTOR, _error(args.command, "invalid vector", exc)
    except NoConvergence as exc:
        return EXIT_NO_CONVERGENCE, _error(args.command, "no convergence", exc)
    except IllConditioned as exc:
        return EXIT_ILL_CONDITIONED, _error(args.command, "ill-conditioned", exc)

    out = {
        "schema_version": SCHEMA_VERSION,
        "tool": "jmtriple",
        "version": __version__,
        "command": args.command,
        "seed": settings.get("seed", 0),
        "input": doc,
        "result": result,
    }
    _summarize(args.command, summary, ok)
    return code, dumps_csv(out) if args.csv else dumps(out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    code, text = execute(args)
    if text is not None:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
