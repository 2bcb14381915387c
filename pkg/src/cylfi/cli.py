"""Command-line front end.

Polynomial grammar (whitespace ignored)::

    poly    := ['+'|'-'] term (('+'|'-') term)*
    term    := factor ('*' factor)*
    factor  := number | '(' number ',' number ')' | 's' INT ['^' INT]

``(a,b)`` is the complex number a+bi and ``sK`` is the K-th coordinate
(1-based), e.g. ``3*s1^2*s2 - (0,1)*s3``.

Exit codes: 0 success, 1 check failure, 2 usage or validation error,
3 numerical or convergence error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .checks import compatibility_suite, functoriality_suite, oracle_suite
from .errors import (
    ConvergenceError,
    CylfiError,
    ExtrapolationError,
    NumericalDegeneracyError,
    ParseError,
    QuadratureError,
    SingularityError,
)
from .gaussian import (
    DEFAULT_SCHEDULE,
    GaussianDistribution,
    ImaginaryGaussianSpec,
    gaussian_closed_form,
    generating_functional,
    green_function,
    imaginary_limit,
)
from .kernels import LatticeSpec, klein_gordon_euclidean, klein_gordon_minkowski
from .model import Projection
from .moments import default_max_degree, evaluate, project
from .oracle import QuadratureConfig, integrate_moment
from .polytensor import Polynomial

NUMERICAL_ERRORS = (
    ConvergenceError,
    NumericalDegeneracyError,
    QuadratureError,
    ExtrapolationError,
    SingularityError,
)

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<op>[-+*^(),])|(?P<var>s))")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.terms = []

    def peek(self):
        return self.toks[self.i]

    def take(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", self.text, tok[2])
        self.i += 1
        return tok

    def number(self):
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.i += 1
            sign = -1
        return sign * float(self.take("num")[1])

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.i += 1
            return float(val), None
        if kind == "op" and val == "(":
            self.i += 1
            re_ = self.number()
            self.take("op", ",")
            im = self.number()
            self.take("op", ")")
            return complex(re_, im), None
        if kind == "var":
            self.i += 1
            idx_tok = self.take("num")
            if not idx_tok[1].isdigit() or int(idx_tok[1]) < 1:
                raise ParseError("variable index must be a positive integer", self.text, idx_tok[2])
            exp = 1
            if self.peek()[:2] == ("op", "^"):
                self.i += 1
                e_tok = self.take("num")
                if not e_tok[1].isdigit():
                    raise ParseError("exponent must be a nonnegative integer", self.text, e_tok[2])
                exp = int(e_tok[1])
            return 1, (int(idx_tok[1]) - 1, exp)
        raise ParseError(f"unexpected {val or 'end of input'!r}", self.text, pos)

    def term(self, sign):
        coef, powers = sign, {}
        while True:
            c, var = self.factor()
            coef = coef * c
            if var:
                powers[var[0]] = powers.get(var[0], 0) + var[1]
            if self.peek()[:2] != ("op", "*"):
                return coef, powers
            self.i += 1

    def parse(self):
        sign = 1
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take("op")[1] == "-" else 1
        self.terms.append(self.term(sign))
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take("op")[1] == "-" else 1
            self.terms.append(self.term(sign))
        self.take("end")
        return self.terms


def parse_polynomial(text, nvars=None):
    """Parse the CLI polynomial grammar; ``nvars`` defaults to the largest index used."""
    terms = _Parser(text).parse()
    used = max((max(p) + 1 for _, p in terms if p), default=1)
    nvars = used if nvars is None else nvars
    if used > nvars:
        raise ParseError(f"variable s{used} used with only {nvars} coordinates", text, 0)
    out = {}
    for coef, powers in terms:
        alpha = tuple(powers.get(j, 0) for j in range(nvars))
        out[alpha] = out.get(alpha, 0) + coef
    return Polynomial(nvars, out)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _emit(payload, out=None):
    text = jsonio.dumps(payload)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _lattice(args):
    return LatticeSpec(args.sites, args.spacing, args.mass)


def _form(args):
    if args.form:
        return jsonio.form_from_json(_read_json(args.form))
    if args.kernel == "kg-euclidean":
        return klein_gordon_euclidean(_lattice(args))
    raise ParseError(f"kernel {args.kernel!r} does not define a complex Gaussian form; use --form")


def _projection(args, space):
    if getattr(args, "proj", None):
        return jsonio.projection_from_json(_read_json(args.proj), space)
    return Projection.identity(space)


def _inputs(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_green(args):
    form = _form(args)
    degree = max(args.order, args.degree if args.degree is not None else args.order)
    dist = GaussianDistribution(form, degree)
    greens = [{"order": k, "tensor": jsonio.tensor_to_json(green_function(dist, k))} for k in range(args.order + 1)]
    _emit({"manifest": jsonio.manifest("green", _inputs(args)), "green": greens}, args.out)
    return 0


def cmd_moment(args):
    form = jsonio.form_from_json(_read_json(args.form))
    proj = _projection(args, form.space)
    poly = parse_polynomial(args.poly, proj.n)
    degree = args.degree if args.degree is not None else default_max_degree()
    mu = project(GaussianDistribution(form, degree), proj)
    print(json.dumps(jsonio.cx(evaluate(mu, poly))))
    return 0


def cmd_check(args):
    rng = np.random.default_rng(args.seed)
    suites = [
        compatibility_suite(args.trials, rng, args.max_dim, args.max_rows, args.max_degree, args.sabotage),
        functoriality_suite(args.trials, rng, args.max_rows, args.max_degree),
    ]
    oracle_trials = min(args.trials, args.oracle_trials)
    suites.append(oracle_suite(oracle_trials, rng, max_degree=min(args.max_degree, 6)))
    report = {
        "manifest": jsonio.manifest("check", _inputs(args), args.seed),
        "suites": [s.to_dict() for s in suites],
        "passed": all(s.passed for s in suites),
    }
    summary = {s.name: {"worst": s.worst, "tol": s.tol, "passed": s.passed} for s in suites}
    if args.out:
        _emit(report, args.out)
    print(jsonio.dumps({"passed": report["passed"], "suites": summary}))
    if not report["passed"]:
        failing = [f for s in suites for f in s.failures[:1]]
        sys.stderr.write(json.dumps({"error": "check failed", "replay": failing}) + "\n")
        return 1
    return 0


def cmd_limit(args):
    if args.form:
        form = jsonio.form_from_json(_read_json(args.form))
        spec = ImaginaryGaussianSpec(form, tuple(args.eps), args.order, max_degree=args.degree)
    elif args.kernel == "kg-minkowski":
        spec = klein_gordon_minkowski(_lattice(args), tuple(args.eps), args.order, args.degree)
    else:
        raise ParseError("limit needs --kernel kg-minkowski or a real --form")
    proj = _projection(args, spec.form.space)
    result = imaginary_limit(spec, proj)
    payload = {
        "manifest": jsonio.manifest("limit", _inputs(args)),
        "per_eps": [{"eps": e, "moments": jsonio.functional_to_json(f)} for e, f in result.per_eps],
        "extrapolated": jsonio.functional_to_json(result.functional),
        "diagnostics": result.diagnostics(),
    }
    _emit(payload, args.out)
    return 0


def cmd_genfun(args):
    form = jsonio.form_from_json(_read_json(args.form))
    phi = np.array([float(x) for x in args.phi.split(",")])
    dist = GaussianDistribution(form, max(args.degree, 0))
    series = generating_functional(dist, phi, args.degree)
    closed = gaussian_closed_form(form, phi)
    payload = {
        "Z": jsonio.cx(series.value),
        "closed_form": jsonio.cx(closed),
        "deviation": abs(series.value - closed),
        "series": series.to_pairs(),
    }
    print(jsonio.dumps(payload))
    return 0


def cmd_oracle(args):
    data = _read_json(args.gram)
    gram = np.array([[jsonio.from_cx(z) for z in row] for row in data["matrix"]], dtype=complex)
    poly = parse_polynomial(args.poly, gram.shape[0])
    cfg = QuadratureConfig(args.points, args.sigmas)
    print(json.dumps(jsonio.cx(integrate_moment(gram, poly, cfg))))
    return 0


def _eps_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="cylfi", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def kernel_flags(p, kernels):
        p.add_argument("--kernel", choices=kernels)
        p.add_argument("--sites", type=int, default=2)
        p.add_argument("--spacing", type=float, default=1.0)
        p.add_argument("--mass", type=float, default=1.0)
        p.add_argument("--form", help="BilinearForm JSON file")

    p = sub.add_parser("green", help="Green functions F_0..F_k")
    kernel_flags(p, ["kg-euclidean"])
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--degree", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("moment", help="evaluate a polynomial against a projected Gaussian")
    p.add_argument("--form", required=True)
    p.add_argument("--proj")
    p.add_argument("--poly", required=True)
    p.add_argument("--degree", type=int)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("check", help="randomized self-check suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-dim", type=int, default=6)
    p.add_argument("--max-rows", type=int, default=4)
    p.add_argument("--max-degree", type=int, default=6)
    p.add_argument("--oracle-trials", type=int, default=20)
    p.add_argument("--sabotage", action="store_true", help="flip a moment sign to self-test the harness")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("limit", help="pure imaginary Gaussian by eps extrapolation")
    kernel_flags(p, ["kg-minkowski"])
    p.add_argument("--eps", type=_eps_list, default=list(DEFAULT_SCHEDULE))
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--proj")
    p.add_argument("--out")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("genfun", help="truncated generating functional")
    p.add_argument("--form", required=True)
    p.add_argument("--phi", required=True, help="comma-separated coefficients")
    p.add_argument("--degree", type=int, default=8)
    p.set_defaults(func=cmd_genfun)

    p = sub.add_parser("oracle", help="quadrature of a normalized complex Gaussian moment")
    p.add_argument("--gram", required=True, help='JSON {"matrix": [[[re, im], ...], ...]}')
    p.add_argument("--poly", required=True)
    p.add_argument("--points", type=int)
    p.add_argument("--sigmas", type=float, default=12.0)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConvergenceError):
            err["diagnostics"] = exc.diagnostics
        sys.stderr.write(json.dumps(err) + "\n")
        return 3
    except CylfiError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ParseError) and exc.text:
            err["position"] = exc.position
            err["caret"] = exc.caret()
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
