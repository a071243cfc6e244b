"""Batch command-line front end.

Every command prints one JSON document with sorted keys: a "result" object
and, where it makes sense, a "certificate" that the library can re-check.
Exit codes: 0 ok, 1 mathematical negative, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import horn as hornmod
from .leafspace import (
    NotTotallyOrdered,
    OrderTree,
    ProductModel,
    TreeAutomorphism,
    TreePoint,
    line_model,
    min_reversals,
    pair_model,
    branch_swap,
    translation,
    transversal_length,
)
from .norm import Infeasible, NormCertificate, NormProblem, solve_norm, thm10_audit, verify_certificate, CertificateError
from .profile import (
    Valuation,
    are_conjugate,
    conjugacy_witness,
    enumerate_classes,
    ordered_set_partitions,
)
from .rational import fmt, q
from .sset import Chain, FlaggedSSet, InvalidComplex, lemma13b_complex, weak_kan_check
from .subdivide import InvalidMarks, MarkedSimplex, audit_count, check_triangulation, peel_triangulate, place_new_vertices

OK, NEGATIVE, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _load(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e


# ---- commands ----

def cmd_validate(args) -> tuple[int, dict]:
    data = _load(args.input)
    if "segments" in data:
        kind, problems = "order_tree", OrderTree.from_dict(data).check()
    elif "simplices" in data:
        kind, problems = "flagged_sset", FlaggedSSet.from_dict(data).validate()
    elif "apex" in data:
        kind = "horn"
        h = hornmod.HornInput.from_dict(data)
        problems = [f"faces {i} and {j} disagree on their shared face" for i, j in hornmod.compatibility_problems(h)]
    elif "tree" in data and "positions" in data:
        kind = "product_model"
        m = ProductModel.from_dict(data)
        problems = m.tree.check()
        if not problems:
            problems = [f"vertex {v}: {p} is not a point of the tree" for v, p in m.positions.items() if not _on_tree(m.tree, p)]
    elif "n" in data and "edges" in data:
        kind, problems = "marked_simplex", []
        MarkedSimplex.from_dict(data)
    else:
        raise InputError("unrecognized model format")
    return (OK if not problems else NEGATIVE), {"result": {"kind": kind, "ok": not problems, "problems": problems}}


def _on_tree(t: OrderTree, p: TreePoint) -> bool:
    try:
        t.piece_of(p)
    except (KeyError, ValueError):
        return False
    return True


def cmd_moduli(args) -> tuple[int, dict]:
    if args.dim is None or args.dim < 0:
        raise InputError("moduli needs --dim N with N >= 0")
    free = enumerate_classes(args.dim, args.nonconstant, "free")
    fixed = enumerate_classes(args.dim, args.nonconstant, "vertex")
    weak_orders = sum(1 for p in ordered_set_partitions(range(args.dim + 1)) if not (args.nonconstant and p.is_constant))
    return OK, {
        "result": {
            "dim": args.dim,
            "nonconstant": args.nonconstant,
            "classes": len(free),
            "block_sizes": [list(c) for c in free],
            "vertex_fixed_classes": len(fixed),
            "vertex_fixed": [c.to_dict()["blocks"] for c in fixed],
            "weak_orders": weak_orders,
        }
    }


def cmd_conjugate(args) -> tuple[int, dict]:
    data = _load(args.input)
    f, g = Valuation.from_dict(data["f"]), Valuation.from_dict(data["g"])
    conj = are_conjugate(f, g)
    out: dict = {"result": {"conjugate": conj}}
    if conj:
        out["certificate"] = conjugacy_witness(f, g).to_dict()
    return (OK if conj else NEGATIVE), out


def cmd_fill_horn(args) -> tuple[int, dict]:
    data = _load(args.input)
    if args.mode:
        data = dict(data, mode=args.mode)
    h = hornmod.HornInput.from_dict(data)
    model = ProductModel.from_dict(data["model"]) if "model" in data else None
    try:
        res = hornmod.fill_horn(h, model)
    except hornmod.ClaimChainFailed as e:
        return NEGATIVE, {"result": {"violation": "ClaimChainFailed", "detail": str(e)}}
    except NotTotallyOrdered as e:
        return NEGATIVE, {"result": {"violation": "NotTotallyOrdered", "detail": str(e)}}
    except hornmod.ModelRequired as e:
        raise InputError(str(e)) from e
    out = {"result": res.to_dict()}
    if res.filled:
        out["certificate"] = {"extension": {str(k): fmt(v) for k, v in res.extension.values}, "case": res.case}
    else:
        out["certificate"] = res.witness.to_dict()
    if args.verify:
        cert = _verify_source(args, out)["certificate"]
        out["verified"] = _verify_horn(h, model, cert, res)
    return (OK if res.filled else NEGATIVE), out


def _verify_horn(h, model, cert: dict, res) -> bool:
    if "kind" in cert:
        return hornmod.replay_violation(h, hornmod.ViolationWitness.from_dict(cert))
    ext = Valuation({int(k): q(v) for k, v in cert["extension"].items()})
    faces = h.faces
    if cert.get("case") == "B":
        faces = hornmod.fill_case_b(h, model)[0].faces
    return all(are_conjugate(ext.restrict(f.values.vertices), f.values) for f in faces)


def cmd_weak_kan(args) -> tuple[int, dict]:
    K = FlaggedSSet.from_dict(_load(args.input))
    if args.degree is None:
        raise InputError("weak-kan needs --degree N")
    res = weak_kan_check(K, args.mode or "strong", args.degree)
    return (OK if res.status == "ok" else NEGATIVE), {"result": res.to_dict()}


def _norm_problem(data: dict, support: str | None, relative: bool) -> NormProblem:
    K = FlaggedSSet.from_dict(data["complex"])
    c = Chain.from_dict(data["class"])
    sub = data.get("subcomplex")
    if relative and sub is None:
        sub = []
    return NormProblem(K, c, support or data.get("support", "all"), None if sub is None else frozenset(sub))


def _run_norm(args, support: str | None, relative: bool) -> tuple[int, dict]:
    data = _load(args.input)
    p = _norm_problem(data, support, relative)
    cert = solve_norm(p)
    value = "infinity" if cert.value is None else fmt(cert.value)
    out = {"result": {"value": value, "support": p.support}, "certificate": cert.to_dict()}
    if args.verify:
        source = _verify_source(args, out)
        given = NormCertificate.from_dict(source["certificate"])
        try:
            verify_certificate(p, given)
            out["verified"] = given.value == cert.value
        except CertificateError as e:
            out["verified"] = False
            out["verify_error"] = str(e)
    return (OK if cert.value is not None else NEGATIVE), out


def _verify_source(args, out: dict) -> dict:
    """A previously emitted document when --verify names one, else the fresh output."""
    if isinstance(args.verify, str):
        return _load(args.verify)
    return json.loads(json.dumps(out))


def cmd_norm(args):
    return _run_norm(args, "all", False)


def cmd_foliated_norm(args):
    return _run_norm(args, args.mode or "strong", False)


def cmd_rel_norm(args):
    return _run_norm(args, None, True)


def cmd_translen(args) -> tuple[int, dict]:
    data = _load(args.input)
    t = OrderTree.from_dict(data)
    if args.base is None:
        raise InputError("translen needs --base seg:x")
    b0 = TreePoint.parse(args.base)
    if args.to is not None:
        count, it = min_reversals(t, b0, TreePoint.parse(args.to))
        return OK, {"result": {"reversals": count}, "certificate": it.to_dict()}
    autos = data.get("automorphisms", {})
    if args.auto is None or args.auto not in autos:
        raise InputError(f"unknown automorphism {args.auto!r}; available: {sorted(autos)}")
    g = TreeAutomorphism.from_dict(autos[args.auto])
    problems = t.check_automorphism(g)
    if problems:
        raise InputError("; ".join(problems))
    length = transversal_length(t, g, b0)
    _, it = min_reversals(t, b0, g(b0))
    return OK, {"result": {"transversal_length": length, "image": str(g(b0))}, "certificate": it.to_dict()}


def cmd_subdivide(args) -> tuple[int, dict]:
    m = MarkedSimplex.from_dict(_load(args.input))
    tri = peel_triangulate(m)
    L = m.L if m.L is not None else max((len(v) for v in m.edges.values()), default=0)
    audit = audit_count(m, tri, L)
    res: dict = {"triangulation": tri.to_dict(), "audit": audit.to_dict(), "problems": check_triangulation(m, tri)}
    if m.leaves is not None:
        val = place_new_vertices(m, tri)
        res["valuation"] = {str(k): fmt(v) for k, v in val.values}
    ok = not res["problems"] and audit.status != "violation"
    return (OK if ok else NEGATIVE), {"result": res}


def cmd_thm10_audit(args) -> tuple[int, dict]:
    data = _load(args.input)
    K = FlaggedSSet.from_dict(data["complex"])
    h = Chain.from_dict(data["class"])
    try:
        rep = thm10_audit(K, h, int(data["L"]))
    except Infeasible as e:
        return NEGATIVE, {"result": {"holds": False, "detail": str(e)}}
    out = {"result": rep.to_dict()}
    if args.verify:
        p = NormProblem(K, h)
        out["verified"] = bool(
            verify_certificate(p, rep.simplicial) and verify_certificate(p.with_support("strong"), rep.foliated)
        )
    return (OK if rep.holds else NEGATIVE), out


def fixtures() -> dict[str, dict]:
    from .models import thm10_model
    import random

    pair = pair_model().to_dict()
    pair["automorphisms"] = {"swap": branch_swap().to_dict(), "identity": TreeAutomorphism.identity().to_dict()}
    line = line_model().to_dict()
    line["automorphisms"] = {"shift": translation(1).to_dict()}
    d2 = {
        "dim": 2,
        "weak_orders": [p.to_dict()["blocks"] for p in ordered_set_partitions(range(3))],
        "vertex_fixed": [c.to_dict()["blocks"] for c in enumerate_classes(2)],
        "block_sizes": [list(c) for c in enumerate_classes(2, equivalence="free")],
    }
    K, h, info = thm10_model(random.Random(0), 1, 1)
    toy = {"complex": K.to_dict(), "class": h.to_dict(), "L": 1, "model": info}
    circle = {
        "complex": {"kmax": 1, "simplices": {"0": ["p"], "1": [{"id": "e", "faces": ["p", "p"], "flags": ["transverse", "strong"]}]}},
        "class": {"dim": 1, "coeffs": {"e": "1/1"}},
    }
    return {
        "lemma13b.json": hornmod.lemma13b_counterexample().to_dict(),
        "lemma13b-complex.json": lemma13b_complex().to_dict(),
        "pair-tree.json": pair,
        "line.json": line,
        "moduli-d2.json": d2,
        "toy.json": toy,
        "circle.json": circle,
        "zero.json": dict(circle, **{"class": {"dim": 1, "coeffs": {}}}),
    }


def cmd_fixtures(args) -> tuple[int, dict]:
    out = Path(args.out or args.input or "fixtures")
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, doc in fixtures().items():
            (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            written.append(name)
    except OSError as e:
        raise InputError(f"cannot write fixtures to {out}: {e.strerror or e}") from e
    return OK, {"result": {"directory": str(out), "written": sorted(written)}}


COMMANDS = {
    "validate": cmd_validate,
    "moduli": cmd_moduli,
    "conjugate": cmd_conjugate,
    "fill-horn": cmd_fill_horn,
    "weak-kan": cmd_weak_kan,
    "norm": cmd_norm,
    "foliated-norm": cmd_foliated_norm,
    "rel-norm": cmd_rel_norm,
    "translen": cmd_translen,
    "subdivide": cmd_subdivide,
    "thm10-audit": cmd_thm10_audit,
    "fixtures": cmd_fixtures,
}

NO_INPUT = {"moduli", "fixtures"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="folnorm", description="Foliated-norm combinatorics toolkit.")
    ap.add_argument("command", choices=sorted(COMMANDS), metavar="command", help=", ".join(sorted(COMMANDS)))
    ap.add_argument("input", nargs="?", help="input JSON file")
    ap.add_argument("--mode", choices=("transverse", "strong"))
    ap.add_argument("--degree", type=int)
    ap.add_argument("--dim", type=int)
    ap.add_argument("--nonconstant", action="store_true", help="moduli: drop the constant foliation")
    ap.add_argument("--verify", nargs="?", const=True, default=False, metavar="CERT",
                    help="re-check the certificate (the fresh one, or one from an earlier output file)")
    ap.add_argument("--out", help="also write the JSON output here (fixtures: target directory)")
    ap.add_argument("--auto", help="translen: automorphism name from the tree file")
    ap.add_argument("--base", help="translen: base point seg:x")
    ap.add_argument("--to", help="translen: second point; report min reversals instead")
    return ap


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return (INPUT_ERROR, {"error": ap.format_usage().strip()}) if e.code else (OK, {})
    try:
        if args.command not in NO_INPUT and not args.input:
            raise InputError(f"{args.command} needs an input file")
        code, doc = COMMANDS[args.command](args)
    except InputError as e:
        return INPUT_ERROR, {"error": str(e)}
    except (KeyError, TypeError, ValueError, InvalidComplex, InvalidMarks, ZeroDivisionError) as e:
        return INPUT_ERROR, {"error": f"{type(e).__name__}: {e}"}
    if args.out and args.command != "fixtures":
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return code, doc


def main(argv: list[str] | None = None) -> int:
    code, doc = run(argv)
    if doc:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
