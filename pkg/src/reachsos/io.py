"""Problem files, the polynomial expression grammar, and serialized outputs.

Problem files are YAML documents with the fields

    name:       optional identifier
    variables:  ordered list of variable names
    dynamics:   one polynomial expression per variable
    init_set:   {inequalities: [expr, ...], geometry: ...}
    state_set:  {inequalities: [expr, ...], geometry: ...}
    options:    {order, horizon | u_zero, seed, feastol, gaptol, max_iter}
    assume_closure: bool

where every inequality expression means expr >= 0 and a geometry is one of

    {box: {bounds: [[lo, hi], ...]}}
    {ball: {center: [...], radius: r}}
    {ellipsoid: {center: [...], shape: [[...], ...]}}

The expression grammar is

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := number | identifier | '(' expr ')' | ('+'|'-') base

with no implicit multiplication and exponents capped at 64.  Certificates and
reports are JSON; grids are plain delimited text.  All floats serialize with
shortest round-trip decimals, so rewriting a file reproduces it bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .moments import DomainGeometry
from .polynomials import Exponent, Polynomial, total_degree
from .sets import DEFAULT_SEED, DynamicalSystem, ReachProblem, SemialgebraicSet

MAX_EXPONENT = 64

CERTIFICATE_FORMAT = "reachsos-certificate/1"
REPORT_FORMAT = "reachsos-report/1"

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


# -- expression parsing ------------------------------------------------------------


class ParseError(ValueError):
    """Syntax or semantic error in a polynomial expression, with byte offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            bad_at = len(text) - len(rest)
            raise ParseError(f"unexpected character {rest[0]!r}", bad_at)
        if match.lastgroup == "number":
            tokens.append(("number", match.group("number"), match.start("number")))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0
        self.variables = list(variables)
        self.index = {name: i for i, name in enumerate(variables)}
        self.n = len(self.variables)

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                q = self.term()
                p = p + q if value == "+" else p - q
            else:
                return p

    def term(self) -> Polynomial:
        p = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                p = p * self.factor()
            else:
                return p

    def factor(self) -> Polynomial:
        p = self.base()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            kind, value, pos = self.advance()
            if kind != "number" or not value.isdigit():
                raise ParseError("exponent must be an unsigned integer", pos)
            power = int(value)
            if power > MAX_EXPONENT:
                raise ParseError(
                    f"exponent {power} exceeds the limit {MAX_EXPONENT}", pos
                )
            p = p**power
        return p

    def base(self) -> Polynomial:
        kind, value, pos = self.advance()
        if kind == "number":
            return Polynomial.constant(self.n, float(value))
        if kind == "ident":
            i = self.index.get(value)
            if i is None:
                raise ParseError(f"unknown variable {value!r}", pos)
            return Polynomial.variable(self.n, i)
        if kind == "op" and value == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        if kind == "op" and value in "+-":
            p = self.base()
            return p if value == "+" else -p
        raise ParseError(f"expected a number, variable or '('", pos)


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse an expression over the named variables into a Polynomial."""
    if not variables:
        raise ValueError("at least one variable name is required")
    return _Parser(text, variables).parse()


def format_polynomial(p: Polynomial, variables: Optional[Sequence[str]] = None) -> str:
    """Canonical text form: graded-lex ordered terms, shortest-round-trip floats."""
    names = list(variables) if variables else [f"x{i+1}" for i in range(p.n_vars)]
    if len(names) != p.n_vars:
        raise ValueError(f"{len(names)} names for {p.n_vars} variables")
    if not p.terms:
        return "0"
    pieces = []
    for exponent in sorted(p.terms, key=lambda e: (total_degree(e), e)):
        coef = p.terms[exponent]
        factors = []
        for name, e in zip(names, exponent):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mono = "*".join(factors)
        mag = abs(coef)
        if not mono:
            body = repr(mag)
        elif mag == 1.0:
            body = mono
        else:
            body = f"{mag!r}*{mono}"
        sign = "-" if coef < 0 else "+"
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


# -- problem files -------------------------------------------------------------------


class ProblemFileError(ValueError):
    """Schema violations in a problem file; collects every error, not just the first."""

    def __init__(self, errors: List[str]):
        super().__init__("invalid problem file:\n" + "\n".join(f"  - {e}" for e in errors))
        self.errors = errors


@dataclass
class SolverSettings:
    feastol: float = 1e-8
    gaptol: float = 1e-8
    max_iter: int = 200
    backend: str = "interior_point"


@dataclass
class ProblemBundle:
    """A parsed problem plus the run options carried in its file."""

    problem: ReachProblem
    variables: List[str]
    order: int = 6
    seed: int = DEFAULT_SEED
    solver: SolverSettings = field(default_factory=SolverSettings)
    problem_hash: str = ""


def _parse_geometry(node, errors: List[str], where: str, n_vars: int):
    if not isinstance(node, dict) or len(node) != 1:
        errors.append(f"{where}: geometry must be a single-key mapping")
        return None
    kind, body = next(iter(node.items()))
    try:
        if kind == "box":
            bounds = body["bounds"]
            if len(bounds) != n_vars:
                errors.append(f"{where}: box has {len(bounds)} axes, expected {n_vars}")
                return None
            return DomainGeometry.box([(float(a), float(b)) for a, b in bounds])
        if kind == "ball":
            center = [float(v) for v in body["center"]]
            if len(center) != n_vars:
                errors.append(f"{where}: ball center has wrong dimension")
                return None
            return DomainGeometry.ball(center, float(body["radius"]))
        if kind == "ellipsoid":
            center = [float(v) for v in body["center"]]
            shape = np.array(body["shape"], dtype=float)
            if len(center) != n_vars:
                errors.append(f"{where}: ellipsoid center has wrong dimension")
                return None
            return DomainGeometry.ellipsoid(center, shape)
        errors.append(f"{where}: unknown geometry kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
    return None


def _parse_set(node, variables, errors, where: str):
    if not isinstance(node, dict):
        errors.append(f"{where}: must be a mapping with inequalities and geometry")
        return None, None
    ineqs = []
    raw = node.get("inequalities")
    if not isinstance(raw, list) or not raw:
        errors.append(f"{where}: needs a nonempty list of inequality expressions")
    else:
        for k, text in enumerate(raw):
            try:
                ineqs.append(parse_polynomial(str(text), variables))
            except ParseError as exc:
                errors.append(f"{where}: inequality {k}: {exc}")
    geometry = None
    if "geometry" not in node:
        errors.append(f"{where}: missing geometry declaration")
    else:
        geometry = _parse_geometry(node["geometry"], errors, where, len(variables))
    sset = None
    if ineqs and len(ineqs) == len(raw):
        sset = SemialgebraicSet(len(variables), ineqs)
    return sset, geometry


def load_bundle(path: str) -> ProblemBundle:
    """Parse and validate a problem file; raises ProblemFileError with all issues."""
    with open(path) as handle:
        raw_text = handle.read()
    try:
        doc = yaml.safe_load(raw_text)
    except yaml.YAMLError as exc:
        raise ProblemFileError([f"not valid YAML: {exc}"]) from exc
    if not isinstance(doc, dict):
        raise ProblemFileError(["top level must be a mapping"])

    errors: List[str] = []
    variables = doc.get("variables")
    if (
        not isinstance(variables, list)
        or not variables
        or any(not isinstance(v, str) or not _IDENT_RE.fullmatch(v) for v in variables)
    ):
        errors.append(
            "variables: need a nonempty list of identifiers ([A-Za-z][A-Za-z0-9_]*)"
        )
        raise ProblemFileError(errors)
    if len(set(variables)) != len(variables):
        errors.append("variables: names must be unique")
        raise ProblemFileError(errors)

    dynamics_raw = doc.get("dynamics")
    dynamics: List[Polynomial] = []
    if not isinstance(dynamics_raw, list) or len(dynamics_raw) != len(variables):
        errors.append(
            f"dynamics: expected {len(variables)} expressions "
            f"(one per variable), got "
            f"{len(dynamics_raw) if isinstance(dynamics_raw, list) else type(dynamics_raw).__name__}"
        )
    else:
        for k, text in enumerate(dynamics_raw):
            try:
                dynamics.append(parse_polynomial(str(text), variables))
            except ParseError as exc:
                errors.append(f"dynamics[{k}]: {exc}")

    init_set, init_geom = _parse_set(doc.get("init_set"), variables, errors, "init_set")
    state_set, state_geom = _parse_set(
        doc.get("state_set"), variables, errors, "state_set"
    )

    options = doc.get("options") or {}
    if not isinstance(options, dict):
        errors.append("options: must be a mapping")
        options = {}
    horizon = options.get("horizon", 100)
    u_zero = bool(options.get("u_zero", False))
    order = int(options.get("order", 6))
    seed = int(options.get("seed", DEFAULT_SEED))
    if "horizon" in options and u_zero:
        errors.append("options: horizon and u_zero are mutually exclusive")
    if order <= 0 or order % 2:
        errors.append(f"options.order: must be a positive even integer, got {order}")
    solver = SolverSettings(
        feastol=float(options.get("feastol", 1e-8)),
        gaptol=float(options.get("gaptol", 1e-8)),
        max_iter=int(options.get("max_iter", 200)),
        backend=str(options.get("backend", "interior_point")),
    )

    if errors or init_set is None or state_set is None or init_geom is None or state_geom is None:
        if not errors:
            errors.append("incomplete set declarations")
        raise ProblemFileError(errors)

    try:
        problem = ReachProblem(
            init=init_set,
            init_geometry=init_geom,
            state=state_set,
            state_geometry=state_geom,
            system=DynamicalSystem(dynamics),
            horizon=int(horizon),
            u_zero=u_zero,
            name=str(doc.get("name", "problem")),
            assume_closure=bool(doc.get("assume_closure", True)),
        )
    except ValueError as exc:
        raise ProblemFileError([str(exc)]) from exc

    return ProblemBundle(
        problem=problem,
        variables=list(variables),
        order=order,
        seed=seed,
        solver=solver,
        problem_hash=problem_fingerprint(problem, variables),
    )


def load_problem(path: str) -> ReachProblem:
    """Parse a problem file, returning the validated ReachProblem."""
    return load_bundle(path).problem


def problem_fingerprint(problem: ReachProblem, variables: Sequence[str]) -> str:
    """Stable hash of the parsed problem content (not the file bytes)."""
    geo = []
    for g in (problem.init_geometry, problem.state_geometry):
        if g.kind == "box":
            geo.append(["box", [[a, b] for a, b in g.bounds]])
        elif g.kind == "ball":
            geo.append(["ball", list(map(float, g.center)), g.radius])
        else:
            geo.append(
                ["ellipsoid", list(map(float, g.center)), np.asarray(g.shape).tolist()]
            )
    doc = {
        "variables": list(variables),
        "dynamics": [format_polynomial(f, variables) for f in problem.system.components],
        "init": [format_polynomial(g, variables) for g in problem.init.inequalities],
        "state": [format_polynomial(g, variables) for g in problem.state.inequalities],
        "geometry": geo,
        "horizon": None if problem.u_zero else problem.horizon,
        "u_zero": problem.u_zero,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


# -- certificate files ----------------------------------------------------------------


@dataclass
class CertificateFile:
    """The serializable view of a certificate: enough to evaluate its level sets."""

    u: float
    v: Polynomial
    w: Polynomial
    order: int
    horizon: Optional[int]
    u_zero: bool
    variables: List[str]
    problem: str
    problem_hash: str
    axes: List[Tuple[float, float]]  # plotting bounds (state-geometry bounding box)

    def margin(self, points: np.ndarray) -> np.ndarray:
        shift = self.u * self.horizon if self.horizon is not None else 0.0
        return self.v.evaluate_batch(points) + shift


def _poly_to_entries(p: Polynomial) -> List[List]:
    return [
        [list(e), p.terms[e]]
        for e in sorted(p.terms, key=lambda e: (total_degree(e), e))
    ]


def _poly_from_entries(entries, n_vars: int) -> Polynomial:
    return Polynomial(n_vars, {tuple(int(x) for x in e): float(c) for e, c in entries})


def save_certificate(cert: CertificateFile, path: str) -> None:
    doc = {
        "format": CERTIFICATE_FORMAT,
        "problem": cert.problem,
        "problem_hash": cert.problem_hash,
        "variables": cert.variables,
        "order": cert.order,
        "horizon": cert.horizon,
        "u_zero": cert.u_zero,
        "axes": [[a, b] for a, b in cert.axes],
        "u": cert.u,
        "v": _poly_to_entries(cert.v),
        "w": _poly_to_entries(cert.w),
    }
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_certificate(path: str) -> CertificateFile:
    with open(path) as handle:
        doc = json.load(handle)
    if doc.get("format") != CERTIFICATE_FORMAT:
        raise ValueError(f"{path}: not a certificate file (format {doc.get('format')!r})")
    n = len(doc["variables"])
    return CertificateFile(
        u=float(doc["u"]),
        v=_poly_from_entries(doc["v"], n),
        w=_poly_from_entries(doc["w"], n),
        order=int(doc["order"]),
        horizon=None if doc["horizon"] is None else int(doc["horizon"]),
        u_zero=bool(doc["u_zero"]),
        variables=list(doc["variables"]),
        problem=str(doc["problem"]),
        problem_hash=str(doc["problem_hash"]),
        axes=[(float(a), float(b)) for a, b in doc["axes"]],
    )


def certificate_to_file(cert, variables, problem_name, problem_hash, axes) -> CertificateFile:
    """Build the serializable view from an in-memory solve certificate."""
    return CertificateFile(
        u=cert.u,
        v=cert.v,
        w=cert.w,
        order=2 * cert.order,
        horizon=cert.horizon,
        u_zero=cert.u_zero,
        variables=list(variables),
        problem=problem_name,
        problem_hash=problem_hash,
        axes=[(float(a), float(b)) for a, b in axes],
    )


# -- report files ---------------------------------------------------------------------


def save_report(report, path: str) -> None:
    """Serialize a CertReport; wall-clock runtime is deliberately excluded so
    identical runs produce identical bytes."""
    doc = {
        "format": REPORT_FORMAT,
        "problem": report.problem,
        "order": report.order,
        "horizon": report.horizon,
        "u_zero": report.u_zero,
        "u": report.u,
        "objective": report.objective,
        "containment": {
            "samples": report.containment_samples,
            "steps": report.containment_steps,
            "violations": report.violations,
            "worst_margin": report.worst_margin,
            "escaped_state_set": report.escaped_state_set,
        },
        "volume": {
            "estimate": report.volume_estimate,
            "ci95": report.volume_ci,
            "samples": report.volume_samples,
        },
        "solver": {
            "status": report.solver_status,
            "iterations": report.solver_iterations,
            "reconstruction_residual": report.reconstruction_residual,
        },
        "seed": report.seed,
    }
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_report(path: str) -> dict:
    with open(path) as handle:
        doc = json.load(handle)
    if doc.get("format") != REPORT_FORMAT:
        raise ValueError(f"{path}: not a report file")
    return doc


# -- grid files -------------------------------------------------------------------------


def write_grid(cert: CertificateFile, resolution: int, path: str) -> int:
    """Tabulate v, w and the inside flag on a regular grid over the axes.

    Returns the number of data rows (resolution ** n_vars).  The inside flag
    is (v + u*T >= 0), recomputable from the stored columns.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    n = len(cert.variables)
    axes = [np.linspace(a, b, resolution) for a, b in cert.axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    v_vals = cert.v.evaluate_batch(pts)
    w_vals = cert.w.evaluate_batch(pts)
    shift = cert.u * cert.horizon if cert.horizon is not None else 0.0
    inside = (v_vals + shift >= 0.0).astype(int)
    lines = []
    for name, (a, b) in zip(cert.variables, cert.axes):
        lines.append(f"# axis {name} {a!r} {b!r} {resolution}")
    lines.append(f"# u {cert.u!r} horizon {cert.horizon}")
    lines.append("# " + " ".join(cert.variables) + " v w inside")
    for row, vv, wv, flag in zip(pts, v_vals, w_vals, inside):
        coords = " ".join(repr(float(c)) for c in row)
        lines.append(f"{coords} {float(vv)!r} {float(wv)!r} {flag}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    return len(pts)
