"""Command-line front end.  Reports are JSON; exit 0 iff every verdict passes,
1 when some verdict fails, 2 on bad input."""

from __future__ import annotations

import argparse
import json
import sys

from . import charstack, cobcat, lagstruct, shiftsym
from .exactalg import is_prime
from .liecore import MatrixGroup, SpecError, load_group_spec, trace_pairing

REPORT_SCHEMA_VERSION = 1
SYMPLECTIC_PRESETS = ("adjoint-sl2", "bg-sl2", "coadjoint-sl2")
GENERATORS = ("cap", "cup", "cyl", "pants", "copants")


class InputError(Exception):
    pass


def _all_pass(obj) -> bool:
    """Every boolean verdict in a report is true (notes and conventions excluded)."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, dict):
        return all(_all_pass(v) for k, v in obj.items()
                   if k not in ("conventions", "point", "expected_failure"))
    if isinstance(obj, list):
        return all(_all_pass(v) for v in obj)
    return True


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _group(args):
    if getattr(args, "spec", None):
        return load_group_spec(args.spec)
    G = MatrixGroup("sl", 2)
    return G, trace_pairing(G)


# ---------------------------------------------------------------------------
# commands


def cmd_check_symplectic(args) -> dict:
    G, P = _group(args)
    kind = args.preset or args.structure
    if kind is None:
        raise InputError("give --preset or --spec with --structure")
    kind = kind.replace("-sl2", "")
    if kind == "bg":
        s = shiftsym.build_bg(P, 2 if args.shift is None else args.shift)
    elif kind == "coadjoint":
        s = shiftsym.build_coadjoint(G.lie)
    elif kind == "adjoint":
        s = shiftsym.build_adjoint_group(G, P)
    else:
        raise InputError("unknown structure %r" % kind)
    report = s.report(args.samples, args.seed)
    if args.shift is not None and args.shift != s.n:
        report["requested_shift"] = args.shift
        report["shift_matches"] = False
    report["pass"] = _all_pass(report)
    return report


def _load_lagrangian_preset(name):
    try:
        return lagstruct.load_preset(name)
    except KeyError as e:
        raise InputError(str(e)) from None


def _verdict(q, args):
    if isinstance(q, lagstruct.HamiltonianSpace):
        return lagstruct.check_hamiltonian(q, count=args.samples, seed=args.seed)
    return lagstruct.check_quasi_hamiltonian(q, count=args.samples, seed=args.seed)


def cmd_check_lagrangian(args) -> dict:
    q = _load_lagrangian_preset(args.preset)
    report = {"schema_version": REPORT_SCHEMA_VERSION, "preset": args.preset,
              "description": lagstruct.PRESETS[args.preset], "seed": args.seed,
              "samples": args.samples}
    if args.perturb:
        if args.perturb not in lagstruct.PERTURBATIONS:
            raise InputError("unknown perturbation %r (known: %s)"
                             % (args.perturb, ", ".join(sorted(lagstruct.PERTURBATIONS))))
        letter, text = lagstruct.PERTURBATIONS[args.perturb]
        try:
            q = lagstruct.perturb(q, args.perturb)
        except ValueError as e:
            raise InputError(str(e)) from None
        v = _verdict(q, args)
        report["perturbation"] = {"kind": args.perturb, "description": text,
                                  "named_identity": letter, "failed": v.failed(),
                                  "named_identity_failed": letter in v.failed()}
    else:
        v = _verdict(q, args)
    report["verdict"] = v.as_dict()
    report["pass"] = v.ok
    return report


def cmd_fuse(args) -> dict:
    a, b = args.inputs
    q1, q2 = _load_lagrangian_preset(a), _load_lagrangian_preset(b)
    if not all(isinstance(q, lagstruct.QuasiHamiltonianSpace) for q in (q1, q2)):
        raise InputError("fusion needs quasi-Hamiltonian presets")
    try:
        q = lagstruct.fuse_pair(q1, q2, samples=args.samples, seed=args.seed)
    except lagstruct.RefusedError as e:
        return {"schema_version": REPORT_SCHEMA_VERSION, "inputs": [a, b], "refused": str(e),
                "pass": False}
    v = lagstruct.check_quasi_hamiltonian(q, count=args.samples, seed=args.seed)
    return {"schema_version": REPORT_SCHEMA_VERSION, "inputs": [a, b], "output": q.name,
            "history": [list(h) for h in q.history], "verdict": v.as_dict(), "pass": v.ok}


def _top_level_splits(text: str) -> list[int]:
    depth, out = 0, []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == ";" and depth == 0:
            out.append(i)
    return out


def _finite_group(args):
    if not is_prime(args.p):
        raise InputError("--p must be prime")
    try:
        return charstack.finite_group(args.group, args.p)
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_tft(args) -> dict:
    group = _finite_group(args)
    report = {"schema_version": REPORT_SCHEMA_VERSION, "group": group.name,
              "conventions": {"presentation": cobcat.PRESENTATION_CONVENTION}}
    if args.certify_generators:
        gens = {name: cobcat.parse(name) for name in GENERATORS}
        report["generators"] = charstack.certificate_report(gens, group, args.budget)
    if args.cob:
        c = cobcat.parse(args.cob)
        val = charstack.tft_evaluate(c, group, args.budget)
        summary = val.as_dict()
        if c.arity == (1, 1):
            summary["diagonal"] = all(k[0] == k[1] for k in val.histogram)
        report["correspondence"] = summary
        if args.verify_gluing:
            certs = []
            for pos in _top_level_splits(args.cob):
                c1, c2 = cobcat.parse(args.cob[:pos]), cobcat.parse(args.cob[pos + 1:])
                certs.append(charstack.gluing_certificate(c1, c2, group, args.budget).as_dict())
            report["certificates"] = certs
    elif not args.certify_generators:
        raise InputError("give --cob or --certify-generators")
    report["pass"] = _all_pass({k: v for k, v in report.items() if k != "correspondence"})
    return report


def cmd_cob_parse(args) -> dict:
    c = cobcat.parse(args.expr)
    return {"schema_version": REPORT_SCHEMA_VERSION, "normal_form": str(c),
            "arity": list(c.arity), "euler": c.euler, "cobordism": cobcat.to_json(c),
            "pass": True}


def cmd_reps_count(args) -> dict:
    group = _finite_group(args)
    c = cobcat.parse(args.cob)
    count = charstack.rep_count(c, group, args.budget)
    report = {"schema_version": REPORT_SCHEMA_VERSION, "group": group.name,
              "cobordism": str(c), "count": count}
    closed = [comp for comp in c.components if not comp.inputs and not comp.outputs]
    if len(c.components) == 1 and closed and closed[0].genus == 1:
        oracle = charstack.count_commuting_pairs(group)
        report["commuting_pairs_oracle"] = oracle
        report["oracle_agrees"] = oracle == count
    report["pass"] = _all_pass(report)
    return report


# ---------------------------------------------------------------------------
# argument parsing


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_positive, default=1)
    common.add_argument("--samples", type=_positive, default=10)
    common.add_argument("--p", type=_positive, default=3, help="finite-field modulus")
    common.add_argument("--budget", type=_positive, default=2_000_000)
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    ap = argparse.ArgumentParser(prog="shiftcartan", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-symplectic", parents=[common])
    s.add_argument("--preset", choices=SYMPLECTIC_PRESETS)
    s.add_argument("--spec", help="group/pairing spec (JSON)")
    s.add_argument("--structure", choices=("bg", "coadjoint", "adjoint"))
    s.add_argument("--shift", type=int)
    s.set_defaults(func=cmd_check_symplectic)

    s = sub.add_parser("check-lagrangian", parents=[common])
    s.add_argument("--preset", required=True)
    s.add_argument("--perturb")
    s.set_defaults(func=cmd_check_lagrangian, samples=6)

    s = sub.add_parser("fuse", parents=[common])
    s.add_argument("--in", dest="inputs", nargs=2, required=True, metavar=("A", "B"))
    s.set_defaults(func=cmd_fuse, samples=3)

    s = sub.add_parser("tft", parents=[common])
    s.add_argument("--cob")
    s.add_argument("--group", default="sl2")
    s.add_argument("--verify-gluing", action="store_true")
    s.add_argument("--certify-generators", action="store_true")
    s.set_defaults(func=cmd_tft)

    s = sub.add_parser("cob", parents=[common])
    cs = s.add_subparsers(dest="cob_command", required=True)
    p = cs.add_parser("parse", parents=[common])
    p.add_argument("expr")
    p.set_defaults(func=cmd_cob_parse)

    s = sub.add_parser("reps", parents=[common])
    rs = s.add_subparsers(dest="reps_command", required=True)
    p = rs.add_parser("count", parents=[common])
    p.add_argument("--cob", required=True)
    p.add_argument("--group", default="sl2")
    p.set_defaults(func=cmd_reps_count)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        report = args.func(args)
    except (InputError, SpecError, cobcat.CobordismError, charstack.BudgetExceeded) as e:
        sys.stderr.write("error: %s\n" % e)
        return 2
    _emit(report, args.out)
    return 0 if report.get("pass") else 1


if __name__ == "__main__":
    sys.exit(main())
