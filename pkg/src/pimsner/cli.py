"""The ``pimsner`` command line driver.

Four subcommands: ``kgroups`` runs the quiver K-group pipeline, ``pv`` the
crossed-product instance, ``selfsim`` the self-similar group pipeline, and
``verify`` the exact operator suites (covariant relations, defect support,
homotopy endpoints and pairing preservation) on a quiver or self-similar
group file.  Reports are deterministic JSON (schema 1) for fixed input,
configuration and seed; ``--out text`` renders a short summary instead.

Exit codes: 0 success, 2 parse or semantic error, 3 insufficient depth
(all checks that ran passed but some were skipped for budget), 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import __version__, funcmod, leavitt, selfsim
from .abgroup import IntMatrix
from .fock import (
    DepthError,
    HomotopyModel,
    InvariantViolation,
    TruncatedFock,
    covariant_check,
    homotopy_endpoints_check,
    homotopy_pairing_check,
    quasi_hom_defect,
    rotation_coefficient_identity,
)
from .leavitt import QuiverError
from .ringcore import RingError, coefficient_ring
from .selfsim import SelfSimError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEPTH = 3
EXIT_INVARIANT = 4


def _config_dict(args, fields):
    return {f: getattr(args, f) for f in fields if hasattr(args, f)}


def _emit(report, out_format):
    if out_format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    _emit_text(report)


def _emit_text(report, indent=0):
    pad = "  " * indent
    if isinstance(report, dict):
        for key in sorted(report):
            value = report[key]
            if isinstance(value, (dict, list)):
                print(f"{pad}{key}:")
                _emit_text(value, indent + 1)
            else:
                print(f"{pad}{key}: {value}")
    elif isinstance(report, list):
        for value in report:
            if isinstance(value, (dict, list)):
                _emit_text(value, indent + 1)
            else:
                print(f"{pad}- {value}")
    else:
        print(f"{pad}{report}")


def _read(path):
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _looks_selfsim(text):
    return any(line.split("#", 1)[0].strip().startswith("alphabet:")
               for line in text.splitlines())


# ---------------------------------------------------------------------------
# kgroups
# ---------------------------------------------------------------------------

def cmd_kgroups(args):
    text = _read(args.input)
    quiver = leavitt.parse_quiver(text)
    k = coefficient_ring(args.coeff)
    presets = leavitt.field_presets(k)
    report, _ = leavitt.k_groups(quiver, presets=presets, k=k)
    report["coefficient_ring"] = args.coeff
    report["input"] = args.input
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# pv (crossed products)
# ---------------------------------------------------------------------------

def _parse_matrix(text):
    rows = [row.strip() for row in text.split(";") if row.strip()]
    entries = [[int(x) for x in row.split()] for row in rows]
    if entries and any(len(r) != len(entries) for r in entries):
        raise RingError("automorphism matrix must be square")
    return IntMatrix.from_rows(entries)


def cmd_pv(args):
    alpha = _parse_matrix(args.matrix)
    report, _ = leavitt.crossed_product_k_groups(alpha)
    report["input"] = args.matrix
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# selfsim
# ---------------------------------------------------------------------------

def _selfsim_suites(group, seed, depth):
    rng = random.Random(seed)
    suites = []

    # length-preserving bijectivity, exhaustively while |X|^n stays small
    suite = {"name": "action-bijective", "checked": 0, "failures": 0}
    n = 1
    while n <= depth and len(group.alphabet) ** n <= 10 ** 5:
        from itertools import product
        words = list(product(group.alphabet, repeat=n))
        for gen in group.generators:
            g = group.gen_word(gen)
            images = {group.act(g, w) for w in words}
            suite["checked"] += len(words)
            if len(images) != len(words) or \
                    any(len(w) != n for w in images):
                suite["failures"] += 1
        n += 1
    suites.append(suite)

    # self-similarity: g(xw) = g(x) . g|_x(w)
    suite = {"name": "self-similarity", "checked": 0, "failures": 0}
    for _ in range(200 if group.generators else 0):
        length = rng.randint(1, 4)
        g = ()
        for _i in range(length):
            gen = rng.choice(group.generators)
            g = selfsim.word_mul(g, group.gen_word(gen, rng.choice([1, -1])))
        w = tuple(rng.choice(group.alphabet)
                  for _i in range(rng.randint(0, max(1, depth - 1))))
        for x in group.alphabet:
            lhs = group.act(g, (x,) + w)
            rhs = (group.act(g, (x,))
                   + group.act(group.restriction(g, (x,)), w))
            suite["checked"] += 1
            if lhs != rhs:
                suite["failures"] += 1
    suites.append(suite)

    # cocycle: (gh)|_x = g|_{h(x)} h|_x up to depth-bounded equality
    suite = {"name": "cocycle", "checked": 0, "failures": 0}
    for _ in range(100 if group.generators else 0):
        g = group.gen_word(rng.choice(group.generators), rng.choice([1, -1]))
        h = group.gen_word(rng.choice(group.generators), rng.choice([1, -1]))
        for x in group.alphabet:
            lhs = group.restrict_letter(selfsim.word_mul(g, h), x)
            rhs = selfsim.word_mul(
                group.restrict_letter(g, group.act_letter(h, x)),
                group.restrict_letter(h, x))
            suite["checked"] += 1
            if not group.equal(lhs, rhs, max(1, depth - 1)):
                suite["failures"] += 1
    suites.append(suite)

    return suites


def cmd_selfsim(args):
    text = _read(args.input)
    group = selfsim.parse_selfsim(text)
    if args.depth:
        group.equality_depth = args.depth
    k = coefficient_ring(args.coeff)
    report = {
        "schema": 1,
        "pipeline": "self-similar",
        "input": args.input,
        "seed": args.seed,
        "group": {
            "alphabet": group.alphabet,
            "generators": group.generators,
            "equality_depth": group.equality_depth,
            "equality_note": "equalities certified up to the configured "
                             "depth; inequalities are definitive",
        },
    }
    corr = selfsim.build_nek_correspondence(group, k)
    report["correspondence"] = {
        "verified": ["left-module law", "adjointability",
                     "compact left action", "functional homomorphism"],
        "rank": len(group.alphabet),
        "hom_check": funcmod.check_functional_hom(corr.hom),
    }
    report["suites"] = _selfsim_suites(group, args.seed,
                                       group.equality_depth)

    d = len(group.alphabet)
    if args.matrix:
        action = _parse_matrix(args.matrix)
        seq, _ = leavitt.crossed_product_k_groups(action)
        report["k_groups"] = seq
        report["k_groups"]["note"] = \
            "induced map supplied as a matrix on a finite invariant quotient"
    elif not group.generators:
        mat = IntMatrix.from_rows([[1 - d]])
        presets = leavitt.field_presets(k)
        pipe, _ = leavitt._pipeline_report(mat, presets, [0, 1],
                                           row_labels=["*"], col_labels=["*"])
        report["k_groups"] = {"schema": 1, "pipeline": "self-similar",
                              **pipe}
    else:
        report["k_groups"] = None
        report["k_groups_note"] = (
            "K-groups need the induced matrix on a finite invariant "
            "quotient; pass --matrix")
    failures = sum(s["failures"] for s in report["suites"])
    _emit(report, args.out)
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _quiver_words(quiver, bound):
    """All normal Toeplitz words p q* with 1 <= |p| + |q| <= bound."""
    words = []
    paths_to = {v: [] for v in quiver.vertices}
    for length in range(0, bound + 1):
        for v in quiver.vertices:
            for p in quiver.paths_from(v, length):
                end = quiver.r(p[-1]) if p else v
                paths_to[end].append(p)
    for v in quiver.vertices:
        for p in paths_to[v]:
            for q in paths_to[v]:
                if 1 <= len(p) + len(q) <= bound:
                    words.append((p, q))
    return words


def _verify_quiver(args, quiver):
    k = coefficient_ring(args.coeff)
    corr = leavitt.quiver_correspondence(quiver, k)
    one = k.one
    checks = []
    insufficient = False

    fk = TruncatedFock(corr, args.fock_depth)
    rep = covariant_check(fk)
    checks.append(rep.as_dict())

    defect = {"name": "defect-support", "checked": 0, "skipped": 0,
              "passed": True, "failures": []}
    for p, q in _quiver_words(quiver, args.word_bound):
        tokens = [("x", {e: one}) for e in p] + \
                 [("phi", {(e, "*"): one}) for e in reversed(q)]
        try:
            quasi_hom_defect(fk, tokens)
            defect["checked"] += 1
        except DepthError:
            defect["skipped"] += 1
        except InvariantViolation as exc:
            defect["passed"] = False
            defect["failures"].append(str(exc))
    if defect["skipped"]:
        defect["status"] = "insufficient depth"
        insufficient = True
    checks.append(defect)

    endpoints = {"name": "homotopy-endpoints", "checked": 0, "skipped": 0,
                 "passed": True, "failures": [],
                 "coefficient_identity": rotation_coefficient_identity()}
    pairing = {"name": "pairing-preservation", "checked": 0, "skipped": 0,
               "passed": True, "failures": []}
    if not endpoints["coefficient_identity"]:
        endpoints["passed"] = False
    try:
        model = HomotopyModel(fk, min(args.word_bound, args.fock_depth))
    except DepthError:
        endpoints["status"] = "insufficient depth"
        pairing["status"] = "insufficient depth"
        insufficient = True
        model = None
    if model is not None:
        gen_tokens = [("x", {b: one}) for b in corr.module.x_basis]
        gen_tokens += [("phi", {c: one}) for c in corr.module.xp_basis]
        gen_tokens += [("r", corr.module.ring.monomial(r))
                       for r in corr.module.ring.basis]
        for tok in gen_tokens:
            rep = homotopy_endpoints_check(model, tok)
            endpoints["checked"] += rep.checked
            endpoints["skipped"] += rep.skipped
            if not rep.passed:
                endpoints["passed"] = False
                endpoints["failures"].extend(map(str, rep.failures[:3]))
        for c in corr.module.xp_basis:
            for b in corr.module.x_basis:
                rep = homotopy_pairing_check(model, {b: one}, {c: one})
                pairing["checked"] += rep.checked
                pairing["skipped"] += rep.skipped
                if not rep.passed:
                    pairing["passed"] = False
                    pairing["failures"].extend(map(str, rep.failures[:3]))
    checks.append(endpoints)
    checks.append(pairing)
    return checks, insufficient


def cmd_verify(args):
    text = _read(args.input)
    report = {
        "schema": 1,
        "input": args.input,
        "seed": args.seed,
        "config": _config_dict(
            args, ["fock_depth", "word_bound", "depth", "coeff"]),
    }
    if _looks_selfsim(text):
        group = selfsim.parse_selfsim(text)
        if args.depth:
            group.equality_depth = args.depth
        try:
            selfsim.build_nek_correspondence(group,
                                             coefficient_ring(args.coeff))
            corr_check = {"name": "correspondence", "checked": 1,
                          "failures": 0}
        except SelfSimError as exc:
            corr_check = {"name": "correspondence", "checked": 1,
                          "failures": 1, "detail": str(exc)}
        suites = [corr_check] + _selfsim_suites(group, args.seed,
                                                group.equality_depth)
        report["kind"] = "self-similar"
        report["checks"] = suites
        failed = any(s["failures"] for s in suites)
        insufficient = False
    else:
        quiver = leavitt.parse_quiver(text)
        report["kind"] = "quiver"
        checks, insufficient = _verify_quiver(args, quiver)
        report["checks"] = checks
        failed = any(not c.get("passed", True) for c in checks)
    if failed:
        report["status"] = "failed"
    elif insufficient:
        report["status"] = "insufficient depth"
    else:
        report["status"] = "ok"
    _emit(report, args.out)
    if failed:
        return EXIT_INVARIANT
    if insufficient:
        return EXIT_DEPTH
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="pimsner",
        description="Exact computation with algebraic Toeplitz and "
                    "Cuntz-Pimsner rings")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--coeff", default="z",
                       help="coefficient ring: z, q, zmod:m or fp:p")
        p.add_argument("--out", choices=["json", "text"], default="json")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized property suites")

    p = sub.add_parser("kgroups", help="K-groups of a Leavitt path algebra")
    p.add_argument("input", help="quiver file")
    common(p)
    p.set_defaults(func=cmd_kgroups)

    p = sub.add_parser("verify", help="run the exact operator suites")
    p.add_argument("input", help="quiver or self-similar group file")
    p.add_argument("--fock-depth", dest="fock_depth", type=int, default=6)
    p.add_argument("--word-bound", dest="word_bound", type=int, default=4)
    p.add_argument("--depth", type=int, default=0,
                   help="equality depth for self-similar groups")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pv", help="crossed-product K-group sequence")
    p.add_argument("--matrix", required=True,
                   help="integer matrix, rows separated by ';'")
    common(p)
    p.set_defaults(func=cmd_pv)

    p = sub.add_parser("selfsim", help="self-similar group pipeline")
    p.add_argument("input", help="self-similar group file")
    p.add_argument("--depth", type=int, default=0,
                   help="equality depth override")
    p.add_argument("--matrix", default=None,
                   help="induced K-theory matrix on a finite quotient")
    common(p)
    p.set_defaults(func=cmd_selfsim)
    return parser


def _validate(args):
    if getattr(args, "fock_depth", 1) < 1:
        raise RingError("fock depth must be at least 1")
    if getattr(args, "word_bound", 1) < 1:
        raise RingError("word bound must be at least 1")
    if getattr(args, "depth", 0) < 0:
        raise RingError("equality depth must be at least 1")
    if hasattr(args, "coeff"):
        coefficient_ring(args.coeff)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except (QuiverError, SelfSimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DepthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPTH
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
