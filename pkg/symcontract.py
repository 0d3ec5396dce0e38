#!/usr/bin/env python3
"""
symcontract command line
Subcommands wrap the detectors and constructors; JSON in, JSON out
Exit codes: 0 SYMMETRIC (or success), 1 NOT_SYMMETRIC, 2 INDETERMINATE, 64 input error
"""

import argparse
import logging
import sys

import numpy as np

import corpus
import jsonio
from blaschke import blaschke_from_json, blaschke_to_json, detect_mobius_relation
from charfun import as_contraction, char_eval, classify, default_grid, defect
from conjugation import Verdict
from errors import InvalidInput, SymContractError
from family import (
    FamilyCase,
    build_T,
    classify_family,
    cross_validate,
    point_fixe_bridge,
    spec_from_json,
    spec_to_json,
    theta_product_check,
)
from inner2x2 import (
    pair_from_json,
    pair_to_json,
    symmetrizable_test,
    symmetrizer,
    symmetry_residual,
    verify_inner,
)
from numlin import opnorm, takagi
from run_config import DEFAULT_GRID_SIZE, DEFAULT_TOL, config_from_args, configure_logging

logger = logging.getLogger("symcontract")

EXIT_CODES = {
    Verdict.SYMMETRIC: 0,
    Verdict.NOT_SYMMETRIC: 1,
    Verdict.INDETERMINATE: 2,
}
EXIT_INPUT_ERROR = 64


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; that code means INDETERMINATE here"""

    def error(self, message):
        raise InvalidInput(message)


def _grid(config, n):
    return default_grid(n, size=config.grid_size, seed=config.seed)


def cmd_analyze(args, config):
    T = jsonio.matrix_from_input(jsonio.load(args.file))
    c = as_contraction(T)
    report = classify(c, _grid(config, c.n), config.tol, config.seed)
    payload = {"command": "analyze"}
    payload.update(report.to_dict())
    return payload, EXIT_CODES[report.verdict]


def _parse_points(raw):
    points = []
    for item in raw:
        try:
            points.append(complex(item.replace(" ", "")))
        except ValueError as e:
            raise InvalidInput(f"cannot parse {item!r} as a complex number") from e
    return points


def cmd_charfun(args, config):
    data = jsonio.load(args.file)
    T = jsonio.matrix_from_input(data)
    if args.z:
        points = _parse_points(args.z)
    elif isinstance(data, dict) and "points" in data:
        points = list(jsonio.decode_vector(data["points"]))
    else:
        points = list(_grid(config, T.shape[0]))
    c = as_contraction(T)
    d = defect(c)
    values = [char_eval(c, z, d) for z in points]
    payload = {
        "command": "charfun",
        "dT": d.dT,
        "dTstar": d.dTstar,
        "points": jsonio.encode_vector(points),
        "values": [jsonio.encode_matrix(v) for v in values],
    }
    return payload, 0


def cmd_inner2x2(args, config):
    pair = pair_from_json(jsonio.load(args.file))
    report = verify_inner(pair)
    payload = {
        "command": "inner2x2",
        "inner": {
            "passed": report.passed,
            "membership": report.membership,
            "modulus_error": report.modulus_error,
            "worst_angle": report.worst_angle,
            "unitarity_error": report.unitarity_error,
            "det_error": report.det_error,
            "violations": report.violations,
        },
        "symmetrizable": False,
        "gamma": None,
        "theta": None,
    }
    found = symmetrizable_test(pair, config.tol)
    if found is None:
        payload["verdict"] = Verdict.NOT_SYMMETRIC.value
        return payload, EXIT_CODES[Verdict.NOT_SYMMETRIC]

    sym, evaluate = symmetrizer(pair, *found)
    points = _grid(config, pair.space.dim)
    payload.update({
        "symmetrizable": True,
        "gamma": sym.gamma,
        "theta": sym.theta,
        "U1": sym.U1,
        "U2": sym.U2,
        "fixed_point_residual": sym.residual,
        "symmetry_residual": symmetry_residual(evaluate, points),
        "verdict": Verdict.SYMMETRIC.value,
    })
    return payload, EXIT_CODES[Verdict.SYMMETRIC]


def cmd_family(args, config):
    spec = spec_from_json(jsonio.load(args.file))
    grid = _grid(config, spec.dimension)
    cv = cross_validate(spec, grid, config.tol, config.seed)
    payload = {
        "command": "family",
        "case": cv.symbolic.case.value,
        "symbolic_symmetric": cv.symbolic.symmetric,
        "expected_defects": list(cv.symbolic.expected_defects),
        "mu": cv.symbolic.mu,
        "lambda": cv.symbolic.lam,
        "numeric": cv.numeric.to_dict(),
        "agreement": cv.agreement,
        "certified": cv.certified,
        "matrix": build_T(spec).T,
    }
    if 0 < abs(spec.Y) < 1:
        try:
            tp = theta_product_check(spec, grid, config.seed)
            payload["theta_product"] = {
                "alpha": tp.alpha,
                "beta": tp.beta,
                "orientation": tp.orientation,
                "norm_residual": tp.norm_residual,
                "coincidence_residual": tp.coincidence_residual,
                "factorization_residual": tp.factorization_residual,
            }
        except SymContractError as e:
            payload["theta_product"] = {"error": str(e)}
    if cv.symbolic.case == FamilyCase.MOBIUS:
        try:
            bridge = point_fixe_bridge(spec)
            payload["fixed_point"] = {"s": bridge.s, "t": bridge.t, "residual": bridge.residual}
        except SymContractError as e:
            payload["fixed_point"] = {"error": str(e)}
    return payload, EXIT_CODES[cv.numeric.verdict]


def cmd_relate(args, config):
    u = blaschke_from_json(jsonio.load(args.u_file))
    v = blaschke_from_json(jsonio.load(args.v_file))
    relation = detect_mobius_relation(u, v)
    payload = {"command": "relate", "related": relation is not None,
               "mu": None, "lambda": None, "residual": None}
    if relation is None:
        return payload, 1
    payload.update(mu=relation.mu, residual=relation.residual)
    payload["lambda"] = relation.lam
    return payload, 0


def cmd_gen(args, config):
    rng = corpus.rng_from_seed(config.seed)
    kind = args.kind
    if kind == "contraction":
        body = {"matrix": corpus.random_contraction(rng, args.n)}
    elif kind == "symmetric":
        body = {"matrix": corpus.random_symmetric(rng, args.n)}
    elif kind == "blaschke":
        body = blaschke_to_json(corpus.random_blaschke(rng, args.degree))
    elif kind == "family":
        spec = corpus.random_family_spec(rng, args.family_kind, args.degree)
        body = spec_to_json(spec)
        body["case"] = classify_family(spec).case.value
    elif kind == "pair":
        body = pair_to_json(corpus.random_symmetrizable_pair(rng, args.degree))
    else:
        raise InvalidInput(f"unknown kind {kind!r}")
    payload = {"command": "gen", "kind": kind, "seed": config.seed}
    payload.update(body)
    return payload, 0


def cmd_takagi(args, config):
    A = jsonio.matrix_from_input(jsonio.load(args.file))
    result = takagi(A)
    A = (A + A.T) / 2
    residual = opnorm(A - result.W @ np.diag(result.S) @ result.W.T) / max(1.0, opnorm(A))
    payload = {"command": "takagi", "W": result.W, "S": result.S, "residual": residual}
    return payload, 0


COMMANDS = {
    "analyze": cmd_analyze,
    "charfun": cmd_charfun,
    "inner2x2": cmd_inner2x2,
    "family": cmd_family,
    "relate": cmd_relate,
    "gen": cmd_gen,
    "takagi": cmd_takagi,
}


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="witness tolerance")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE, help="disk grid size")
    common.add_argument("--seed", type=int, default=None,
                        help="seed (falls back to SYMCONTRACT_SEED, then 0)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", default=None, help="output file (default stdout)")
    common.add_argument("--log-level", dest="log_level", default=None)

    parser = _Parser(prog="symcontract",
                     description="Complex symmetric contractions: detectors and constructions")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("analyze", parents=[common], help="classify a contraction matrix")
    p.add_argument("file")

    p = sub.add_parser("charfun", parents=[common], help="sample the characteristic function")
    p.add_argument("file")
    p.add_argument("--z", nargs="+", help="points of the open disk, e.g. 0.5 0.1+0.2j")

    p = sub.add_parser("inner2x2", parents=[common], help="verify and symmetrize a 2x2 inner pair")
    p.add_argument("file")

    p = sub.add_parser("family", parents=[common], help="classify a block family instance")
    p.add_argument("file")

    p = sub.add_parser("relate", parents=[common], help="find v = mu b_lambda(u)")
    p.add_argument("u_file")
    p.add_argument("v_file")

    p = sub.add_parser("gen", parents=[common], help="generate a seeded instance")
    p.add_argument("kind", choices=corpus.GEN_KINDS)
    p.add_argument("--n", type=int, default=3, help="matrix size")
    p.add_argument("--degree", type=int, default=3, help="Blaschke degree bound")
    p.add_argument("--family-kind", dest="family_kind", choices=corpus.FAMILY_KINDS, default=None)

    p = sub.add_parser("takagi", parents=[common], help="Takagi factorization of a symmetric matrix")
    p.add_argument("file")
    return parser


def _render_text(payload):
    lines = [f"{'='*60}", f"SYMCONTRACT {payload.get('command', '').upper()}", f"{'='*60}"]
    for key, value in jsonio.to_jsonable(payload).items():
        if key == "command":
            continue
        if isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"{key:22}: {value}")
    lines.append("=" * 60)
    return "\n".join(lines)


def emit(payload, config):
    if config.format == "json":
        return jsonio.write_report(payload, config.output)
    text = _render_text(payload)
    if config.output is None:
        print(text)
    else:
        with open(config.output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    return text


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        configure_logging(config.log_level)
        if args.command == "gen" and (args.n < 1 or args.degree < 1):
            raise InvalidInput("--n and --degree must be positive")
        logger.debug("running %s with seed %d", args.command, config.seed)
        payload, code = COMMANDS[args.command](args, config)
        emit(payload, config)
        return code
    except SymContractError as e:
        print(f"symcontract: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
