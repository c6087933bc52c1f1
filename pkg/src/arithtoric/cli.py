"""``arithtoric`` command-line interface.

Exit codes: 0 success, 1 verification failed, 2 input or usage error.
Structured output is sorted-key JSON carrying a ``schema`` field.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import bundle
from .arith import BiquadraticField, UnsupportedField, sha_norm_one_biquadratic, sha_of_character_lattice
from .descent import (NotStable, descend_collection, no_point_certificate, rationality_check)
from .divclass import ShellNotVanishing, cohomology, parse_divisor
from .excol import (NotTCI, TCIObject, ext_dims, find_valid_order, numerical_fullness, report_from_table,
                    ext_table)
from .fan import FanError, UnsupportedN, build_an_fan, fan_aut, is_complete, is_smooth
from .gmodule import GLattice, NotASubgroup, augmentation_ideal, klein_four, module_isomorphic

REPORT_SCHEMA = "arithtoric.report/1"

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(args, command: str, body: dict, human: list[str]) -> None:
    if args.format == "structured":
        sys.stdout.write(json.dumps({"schema": REPORT_SCHEMA, "command": command, **body},
                                    sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write("\n".join(human) + "\n")


# -- commands -------------------------------------------------------------

def cmd_build(args) -> int:
    if args.kind != "an":
        raise UsageError(f"unknown fan kind {args.kind!r}")
    if args.n not in (1, 2, 3):
        raise UnsupportedN(f"only n = 1, 2, 3 are supported, got {args.n}")
    f = build_an_fan(args.n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    fan_file = out / f"fan_a{args.n}.json"
    fan_file.write_text(bundle.dumps(bundle.fan_to_dict(f, "an", args.n)))
    written.append(str(fan_file))
    if args.with_collection:
        from .ctbuild import build_collection
        c = build_collection(args.n, jobs=args.jobs)
        col_file = out / f"ct_a{args.n}.json"
        col_file.write_text(bundle.dumps(bundle.collection_to_dict(c)))
        written.append(str(col_file))
    body = {"n": args.n, "rays": f.n_rays, "max_cones": len(f.max_cones), "hash": f.content_hash(),
            "written": [Path(w).name for w in written]}
    _emit(args, "build", body, [f"A_{args.n} fan: {f.n_rays} rays, {len(f.max_cones)} maximal cones",
                                *[f"wrote {w}" for w in written]])
    return EXIT_OK


def _verify_body(c, jobs: int, require_strong: bool, reorder: bool):
    t = ext_table(c, jobs=jobs)
    rep = report_from_table(t)
    full = numerical_fullness(c, table=t)
    ok = rep.passed and full.passed and (rep.strong or not require_strong)
    body = {"passed": ok, "exceptional": rep.to_dict(), "fullness": full.to_dict(), "objects": len(c)}
    human = [f"objects: {len(c)}",
             f"exceptional in given order: {rep.passed}",
             f"numerically full: {full.passed} (size {full.size}, max cones {full.max_cones}, det {full.determinant})",
             f"strong: {rep.strong}"]
    for i, j, d in rep.violations:
        human.append(f"violation: Ext({c.labels[i]}, {c.labels[j]}) = {list(d)} at positions {i} > {j}")
    for lab in body["exceptional"]["non_exceptional"]:
        human.append(f"not exceptional: {lab}")
    if require_strong and not rep.strong:
        human.append("strong required but collection has higher Ext")
    if reorder and not rep.passed:
        order = find_valid_order(t)
        body["reorder"] = None if order is None else [c.labels[i] for i in order]
        human.append("no valid reordering" if order is None else "valid reordering: " + ", ".join(body["reorder"]))
    human.append("PASS" if ok else "FAIL")
    return ok, body, human


def cmd_verify(args) -> int:
    f = bundle.load_fan(args.fan)
    c = bundle.load_collection(args.collection, f)
    ok, body, human = _verify_body(c, args.jobs, args.require_strong, args.reorder)
    _emit(args, "verify", body, human)
    return EXIT_OK if ok else EXIT_FAIL


def _descent_lines(rep) -> list[str]:
    lines = [f"group order {rep.group_order}; orbit sizes {rep.orbit_sizes} (total {sum(rep.orbit_sizes)})"]
    for o in rep.orbits:
        lines.append(f"  orbit {[rep.labels[i] for i in o.members]}: stabilizer order {len(o.stabilizer)}, "
                     f"obstruction {'vanished' if o.obstruction.vanished else 'NONZERO'}")
    return lines


def cmd_descend(args) -> int:
    f = bundle.load_fan(args.fan)
    c = bundle.load_collection(args.collection, f)
    a = bundle.load_action(args.action, f)
    try:
        rep = descend_collection(a, c)
    except NotStable as exc:
        _emit(args, "descend", {"passed": False, "stable": False, "unstable_object": exc.label,
                                "element": exc.element}, [str(exc), "FAIL"])
        return EXIT_FAIL
    ok = rep.all_vanished
    _emit(args, "descend", {"passed": ok, "stable": True, **rep.to_dict()},
          _descent_lines(rep) + ["PASS" if ok else "FAIL"])
    return EXIT_OK if ok else EXIT_FAIL


def _read_doc(path: str) -> dict:
    try:
        return json.loads(bundle.resolve(path).read_text())
    except FileNotFoundError as exc:
        raise bundle.InputError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise bundle.InputError(f"{path} is not valid JSON: {exc}") from exc


def _lattice_from_files(lattice_path: str, group_path: str) -> GLattice:
    from .descent import _named_group
    gdoc = _read_doc(group_path)
    group, names = _named_group(gdoc.get("group", gdoc))
    ldoc = _read_doc(lattice_path)
    gens = ldoc.get("generators")
    if not isinstance(gens, dict) or set(gens) != set(names):
        raise bundle.InputError(f"lattice file must give a matrix for each generator {sorted(names)}")
    l = GLattice.from_generators(group, {names[k]: v for k, v in gens.items()})
    for g in range(group.order):
        for h in range(group.order):
            lhs = l.action[group.mul[g][h]]
            if (lhs != l.action[g].dot(l.action[h])).any():
                raise bundle.InputError("generator matrices do not satisfy the group relations")
    return l


def cmd_sha(args) -> int:
    if args.biquadratic:
        res = sha_norm_one_biquadratic(BiquadraticField(*args.biquadratic))
        human = [f"field Q(sqrt({args.biquadratic[0]}), sqrt({args.biquadratic[1]}))"]
        human += [f"  p = {r.p} divides {r.divides}: Legendre symbol of the other generator {r.other_residue}, "
                  f"decomposition group {'cyclic' if r.cyclic else 'C2xC2'}" for r in res.details]
    elif args.lattice and args.group:
        res = sha_of_character_lattice(_lattice_from_files(args.lattice, args.group))
        human = []
    else:
        raise UsageError("sha needs --biquadratic A B or both --lattice and --group")
    human.append(f"method: {res.method}")
    human.append(f"{res.label} = {res.group}")
    _emit(args, "sha", res.to_dict(), human)
    return EXIT_OK


def cmd_rationality(args) -> int:
    f = bundle.load_fan(args.fan)
    a = bundle.load_action(args.action, f)
    res = rationality_check(f, a)
    human = [f"verdict: {res.verdict}", f"H^1(G, Pic) = {res.h1_pic}",
             f"elements acting nontrivially on Pic: {len(res.pic_matrices)} of {a.group.order}"]
    _emit(args, "rationality", res.to_dict(), human)
    return EXIT_OK


def _torus_gate(a) -> dict:
    """For a Klein action, check that the cocharacter lattice is the augmentation ideal."""
    if a.group.order != 4 or a.is_trivial():
        return {"checked": False}
    try:
        from .gmodule import KLEIN_AUGMENTATION_BASIS
        aug = augmentation_ideal(klein_four(), KLEIN_AUGMENTATION_BASIS)
        n = a.n_lattice()
        if n.group.mul != aug.group.mul:
            return {"checked": False}
        iso = module_isomorphic(aug, n)
    except NotASubgroup:
        return {"checked": False}
    return {"checked": True, "isomorphic_to_augmentation_ideal": iso is not None,
            "intertwiner": None if iso is None else [[int(x) for x in r] for r in iso]}


def cmd_certificate(args) -> int:
    f = bundle.load_fan(args.fan)
    c = bundle.load_collection(args.collection, f)
    a = bundle.load_action(args.action, f)
    pair = args.biquadratic
    if pair is None:
        label = a.field_label or {}
        if a.is_trivial():
            pair = None
        elif "biquadratic" not in label:
            raise bundle.InputError("action carries no biquadratic field_label; pass --biquadratic A B")
        else:
            pair = label["biquadratic"]
    body: dict = {}
    human: list[str] = []
    if pair is not None:
        sha = sha_norm_one_biquadratic(BiquadraticField(*pair))
        body["sha"] = sha.to_dict()
        human.append(f"Zhe of the norm-one torus of Q(sqrt({pair[0]}), sqrt({pair[1]})) = {sha.group}")
        sha_group = sha.group
    else:
        from .zlattice import AbelianGroupInvariants
        sha_group = AbelianGroupInvariants()
    gate = _torus_gate(a)
    body["torus"] = gate
    if gate.get("checked") and not gate["isomorphic_to_augmentation_ideal"]:
        cert_reason = "cocharacter lattice is not the augmentation ideal"
        body.update({"issued": False, "reason": cert_reason})
        _emit(args, "certificate", body, human + [f"no certificate: {cert_reason}"])
        return EXIT_FAIL
    t0 = time.perf_counter()
    ok, vbody, _ = _verify_body(c, args.jobs, False, False)
    body["verify"] = {"passed": ok, "objects": len(c), "blocks": vbody["exceptional"]["blocks"]}
    human.append(f"collection of {len(c)} objects exceptional and numerically full: {ok}")
    if not ok:
        body.update({"issued": False, "reason": "collection is not a full exceptional collection"})
        _emit(args, "certificate", body, human + ["no certificate: collection fails verification"])
        return EXIT_FAIL
    report = None
    if not a.is_trivial():
        try:
            report = descend_collection(a, c)
            body["descent"] = report.to_dict()
            human += _descent_lines(report)
        except NotStable:
            report = None
    cert = no_point_certificate(f, a, c, sha_group, report)
    body.update(cert.to_dict())
    if args.format != "structured":
        human.append(f"elapsed {time.perf_counter() - t0:.1f} s")
    if cert.issued:
        human.append("certificate issued:")
        human += [f"  - {x}" for x in cert.facts]
    else:
        human.append(f"no certificate: {cert.reason}")
    _emit(args, "certificate", body, human)
    return EXIT_OK if cert.issued else EXIT_FAIL


def cmd_coh(args) -> int:
    f = bundle.load_fan(args.fan)
    d = parse_divisor(args.divisor, f)
    dims = cohomology(f, d)
    _emit(args, "coh", {"divisor": list(d), "h": list(dims), "euler": dims.euler},
          [f"h^* = {list(dims)}  (euler characteristic {dims.euler})"])
    return EXIT_OK


def _parse_object(text: str, f) -> TCIObject:
    chi, _, van = text.partition(":")
    coeffs = parse_divisor(chi, f)
    vanishing = [int(x) for x in van.split(",") if x.strip()] if van else []
    return TCIObject(f, coeffs, vanishing)


def cmd_ext(args) -> int:
    f = bundle.load_fan(args.fan)
    if args.collection:
        c = bundle.load_collection(args.collection, f)
        try:
            e, t = (c.objects[c.labels.index(x)] for x in (args.source, args.target))
        except ValueError as exc:
            raise bundle.InputError(f"label not in collection: {exc}") from exc
    else:
        e, t = _parse_object(args.source, f), _parse_object(args.target, f)
    dims = ext_dims(e, t)
    _emit(args, "ext", {"ext": list(dims), "euler": dims.euler},
          [f"Ext^* = {list(dims)}  (euler pairing {dims.euler})"])
    return EXIT_OK


def cmd_aut(args) -> int:
    f = bundle.load_fan(args.fan)
    aut = fan_aut(f)
    census = aut.group.order_census()
    elems = [{"index": k, "matrix": [[int(x) for x in r] for r in m], "ray_permutation": list(p)}
             for k, (m, p) in enumerate(zip(aut.matrices, aut.ray_permutations))]
    body = {"order": len(aut), "center_order": len(aut.group.center()),
            "order_census": {str(k): v for k, v in sorted(census.items())}, "elements": elems,
            "smooth": is_smooth(f), "complete": is_complete(f)}
    human = [f"|Aut| = {len(aut)}, center of order {body['center_order']}",
             "element orders: " + ", ".join(f"{k}:{v}" for k, v in sorted(census.items()))]
    if args.list:
        human += [f"  {e['index']}: {e['matrix']}  rays -> {e['ray_permutation']}" for e in elems]
    _emit(args, "aut", body, human)
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _pair(text: str) -> int:
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["human", "structured"], default="human")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for Ext tables")
    p = _Parser(prog="arithtoric", description="Exceptional collections and descent on A_n toric varieties.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    b = sub.add_parser("build", parents=[common], help="write an A_n fan (and its collection)")
    b.add_argument("kind")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--out", default=".")
    b.add_argument("--with-collection", action="store_true")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", parents=[common], help="verify a full exceptional collection")
    v.add_argument("fan")
    v.add_argument("collection")
    v.add_argument("--require-strong", action="store_true")
    v.add_argument("--reorder", action="store_true", help="search for a valid order if the given one fails")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("descend", parents=[common], help="Galois orbits and lift obstructions")
    d.add_argument("fan")
    d.add_argument("collection")
    d.add_argument("action")
    d.set_defaults(func=cmd_descend)

    s = sub.add_parser("sha", parents=[common], help="Sha of a norm-one torus or a lattice")
    s.add_argument("--biquadratic", nargs=2, type=_pair, metavar=("A", "B"))
    s.add_argument("--lattice")
    s.add_argument("--group")
    s.set_defaults(func=cmd_sha)

    r = sub.add_parser("rationality", parents=[common], help="Pic-triviality rationality check")
    r.add_argument("fan")
    r.add_argument("action")
    r.set_defaults(func=cmd_rationality)

    c = sub.add_parser("certificate", parents=[common], help="no-rational-point certificate")
    c.add_argument("fan")
    c.add_argument("collection")
    c.add_argument("action")
    c.add_argument("--biquadratic", nargs=2, type=_pair, metavar=("A", "B"))
    c.set_defaults(func=cmd_certificate)

    h = sub.add_parser("coh", parents=[common], help="cohomology of a torus-invariant divisor")
    h.add_argument("fan")
    h.add_argument("--divisor", required=True, help="comma-separated ray coefficients")
    h.set_defaults(func=cmd_coh)

    e = sub.add_parser("ext", parents=[common], help="Ext between two objects")
    e.add_argument("fan")
    e.add_argument("source", help="'c0,c1,...[:i,j]' or a label with --collection")
    e.add_argument("target")
    e.add_argument("--collection")
    e.set_defaults(func=cmd_ext)

    a = sub.add_parser("aut", parents=[common], help="fan automorphism group")
    a.add_argument("fan")
    a.add_argument("--list", action="store_true")
    a.set_defaults(func=cmd_aut)
    return p


_INPUT_ERRORS = (UsageError, bundle.InputError, UnsupportedField, UnsupportedN, FanError, NotTCI,
                 ShellNotVanishing, ValueError, KeyError, TypeError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no command given")
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        return args.func(args)
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"arithtoric: error: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # never surface a traceback
        sys.stderr.write(f"arithtoric: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
