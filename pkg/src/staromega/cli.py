"""Command-line interface: parse, transform, build automata, evaluate, check.

Grammar files are plain text: directives first, then one equation per line.

    @semiring tropical
    @alphabet a b c
    @sort x x1
    @sort z z1 z2
    @start z2
    @buchi 1
    x1 = (1) a x1 b | (1) a b
    z1 = c z1
    z2 = x1 z1 | z1

Sorts: y-variables give a quemiring system, x- and z-variables a mixed one;
z-equations must be right-linear (one trailing z-variable per monomial).
Exit codes: 0 ok, 1 semantic failure, 2 usage error, 3 inconclusive search.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import __version__
from .gnf import (
    GnfPipelineReport,
    decompose_canonical,
    normalize_decomposition,
    pipeline_from_decomposition,
)
from .pda import (
    SimpleOmegaPDA,
    behavior_finite,
    behavior_omega_lasso,
    default_pda_caps,
    induced_finite_pda,
    induced_omega_pda,
    pda_from_json,
    pda_to_dot,
    pda_to_json,
    PdaLassoCaps,
)
from .semiring import SemiringError, SemiringInstance, instance_by_name
from .series import (
    LassoWord,
    Polynomial,
    SeriesError,
    format_polynomial,
    parse_polynomial,
)
from .system import (
    AlgebraicSystem,
    CanonicalSelector,
    IllFormedSystem,
    LassoCaps,
    MixedSystem,
    OmegaSystem,
    canonical_omega_lasso,
    default_lasso_caps,
    induce_mixed,
    is_gnf_mixed,
    is_gnf_omega,
    least_solution_finite,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class GrammarError(ValueError):
    def __init__(self, msg: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


@dataclass
class GrammarFile:
    """Parsed grammar file: the system plus selector-ish header data."""

    instance: SemiringInstance
    terminals: tuple[str, ...]
    kind: str  # "omega" or "mixed"
    system: OmegaSystem | MixedSystem
    start: str | None
    buchi: int | None

    def start_index(self) -> int | None:
        if self.start is None:
            return None
        if self.kind == "omega":
            return self.system.variables.index(self.start)
        if self.start in self.system.x_vars:
            return self.system.x_vars.index(self.start)
        return self.system.z_vars.index(self.start)


def parse_grammar(text: str) -> GrammarFile:
    instance = None
    terminals: list[str] = []
    sorts: dict[str, str] = {}
    order: list[str] = []
    start = None
    buchi = None
    equations: list[tuple[str, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            fields = line.split()
            directive = fields[0]
            if directive == "@semiring":
                if len(fields) != 2:
                    raise GrammarError("@semiring takes one name", lineno)
                try:
                    instance = instance_by_name(fields[1])
                except SemiringError as exc:
                    raise GrammarError(str(exc), lineno) from None
            elif directive == "@alphabet":
                terminals.extend(fields[1:])
            elif directive == "@sort":
                if len(fields) < 3 or fields[1] not in ("x", "y", "z"):
                    raise GrammarError("@sort needs x|y|z and variable names", lineno)
                for v in fields[2:]:
                    if v in sorts:
                        raise GrammarError(f"variable {v} declared twice", lineno)
                    sorts[v] = fields[1]
                    order.append(v)
            elif directive == "@start":
                if len(fields) != 2:
                    raise GrammarError("@start takes one variable", lineno)
                start = fields[1]
            elif directive == "@buchi":
                try:
                    buchi = int(fields[1])
                except (IndexError, ValueError):
                    raise GrammarError("@buchi takes an integer", lineno) from None
            else:
                raise GrammarError(f"unknown directive {directive}", lineno)
            continue
        if "=" not in line:
            raise GrammarError("expected an equation or a directive", lineno)
        lhs, rhs = line.split("=", 1)
        equations.append((lhs.strip(), rhs.strip(), lineno))

    if instance is None:
        raise GrammarError("missing @semiring directive", 1)
    if not terminals:
        raise GrammarError("missing @alphabet directive", 1)
    known = set(terminals) | set(sorts)
    rhs_by_var: dict[str, Polynomial] = {}
    for lhs, rhs, lineno in equations:
        if lhs not in sorts:
            raise GrammarError(f"equation for undeclared variable {lhs}", lineno)
        if lhs in rhs_by_var:
            raise GrammarError(f"second equation for {lhs}", lineno)
        try:
            rhs_by_var[lhs] = parse_polynomial(rhs, instance, lambda s: s in known)
        except (SeriesError, SemiringError) as exc:
            raise GrammarError(str(exc), lineno, column=len(lhs) + 4) from None
    for v in sorts:
        rhs_by_var.setdefault(v, Polynomial.zero(instance))

    kinds = set(sorts.values())
    ts = tuple(terminals)
    if kinds <= {"y"}:
        y_vars = tuple(v for v in order)
        sys = OmegaSystem(instance, ts, y_vars, tuple(rhs_by_var[v] for v in y_vars))
        return GrammarFile(instance, ts, "omega", sys, start, buchi)
    if "y" in kinds:
        raise GrammarError("y-variables cannot be mixed with x/z-variables", 1)
    x_vars = tuple(v for v in order if sorts[v] == "x")
    z_vars = tuple(v for v in order if sorts[v] == "z")
    zset = set(z_vars)
    rho_rows = []
    for zi in z_vars:
        row = {z: [] for z in z_vars}
        for mono in rhs_by_var[zi].monomials:
            w = mono.word
            if not w or w[-1] not in zset or any(s in zset for s in w[:-1]):
                raise GrammarError(
                    f"z-equation for {zi} must be right-linear in z-variables", 1
                )
            row[w[-1]].append((mono.coeff, w[:-1]))
        rho_rows.append(
            tuple(Polynomial.build(instance, row[z]) for z in z_vars)
        )
    sys = MixedSystem(
        instance,
        ts,
        x_vars,
        tuple(rhs_by_var[v] for v in x_vars),
        z_vars,
        tuple(rho_rows),
    )
    return GrammarFile(instance, ts, "mixed", sys, start, buchi)


def format_grammar(g: GrammarFile) -> str:
    lines = [f"@semiring {g.instance.name}", "@alphabet " + " ".join(g.terminals)]
    if g.kind == "omega":
        lines.append("@sort y " + " ".join(g.system.variables))
    else:
        if g.system.x_vars:
            lines.append("@sort x " + " ".join(g.system.x_vars))
        if g.system.z_vars:
            lines.append("@sort z " + " ".join(g.system.z_vars))
    if g.start is not None:
        lines.append(f"@start {g.start}")
    if g.buchi is not None:
        lines.append(f"@buchi {g.buchi}")
    if g.kind == "omega":
        for v, p in zip(g.system.variables, g.system.rhs):
            lines.append(f"{v} = {format_polynomial(p)}")
    else:
        for v, p in zip(g.system.x_vars, g.system.x_rhs):
            lines.append(f"{v} = {format_polynomial(p)}")
        for i, zi in enumerate(g.system.z_vars):
            inst = g.instance
            terms = []
            for j, zj in enumerate(g.system.z_vars):
                for mono in g.system.rho[i][j].monomials:
                    terms.append((mono.coeff, mono.word + (zj,)))
            lines.append(f"{zi} = {format_polynomial(Polynomial.build(inst, terms))}")
    return "\n".join(lines) + "\n"


def _load(path: str) -> GrammarFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grammar(fh.read())


def _symbols_of(text: str) -> tuple[str, ...]:
    if " " in text:
        return tuple(text.split())
    return tuple(text)


def _parse_lasso(text: str) -> LassoWord:
    if ":" not in text:
        raise ValueError("lasso words are written prefix:period")
    u, v = text.split(":", 1)
    if not v:
        raise ValueError("lasso period must be nonempty")
    return LassoWord(_symbols_of(u) if u else (), _symbols_of(v))


# -- commands -----------------------------------------------------------------


def cmd_parse(args) -> int:
    g = _load(args.path)
    if g.kind == "omega":
        gnf = is_gnf_omega(g.system)
        summary = {
            "kind": "omega",
            "semiring": g.instance.name,
            "variables": list(g.system.variables),
            "gnf": gnf,
        }
    else:
        summary = {
            "kind": "mixed",
            "semiring": g.instance.name,
            "x_variables": list(g.system.x_vars),
            "z_variables": list(g.system.z_vars),
            "gnf": is_gnf_mixed(g.system),
        }
    summary["start"] = g.start
    summary["buchi"] = g.buchi
    summary["version"] = __version__
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _to_mixed(g: GrammarFile) -> tuple[MixedSystem, int, int]:
    """Mixed system plus (buchi count, omega component index) from a grammar."""
    if g.kind == "omega":
        mixed = induce_mixed(g.system)
        comp = (
            g.system.variables.index(g.start) if g.start is not None else len(mixed.z_vars) - 1
        )
    else:
        mixed = g.system
        comp = (
            g.system.z_vars.index(g.start)
            if g.start is not None and g.start in g.system.z_vars
            else len(mixed.z_vars) - 1
        )
    k = g.buchi if g.buchi is not None else min(1, len(mixed.z_vars))
    return mixed, k, comp


def cmd_gnf(args) -> int:
    g = _load(args.path)
    report = GnfPipelineReport()
    report.add("input", kind=g.kind, version=__version__)
    target = args.target
    if g.kind == "omega" and target == "omega" and is_gnf_omega(g.system):
        report.add("identity", skipped=True)
        out = format_grammar(g)
        _emit(args, out, report)
        return EXIT_OK
    if g.kind == "mixed" and target == "mixed" and is_gnf_mixed(g.system):
        report.add("identity", skipped=True)
        _emit(args, format_grammar(g), report)
        return EXIT_OK
    mixed, k, comp = _to_mixed(g)
    if args.buchi is not None:
        k = args.buchi
    if args.component is not None:
        comp = mixed.z_vars.index(args.component)
    if g.instance.name == "counting" and target == "omega":
        print(
            "warning: omega evaluation is unsupported over the counting semiring",
            file=sys.stderr,
        )
    dec = decompose_canonical(mixed, k, comp)
    report.add("decompose", terms=dec.width, buchi=k, component=mixed.z_vars[comp])
    norm, gnf_mixed, sel, omega_sys, omega_sel, report = pipeline_from_decomposition(
        dec, report=report
    )
    if target == "mixed":
        out_g = GrammarFile(
            g.instance,
            gnf_mixed.terminals,
            "mixed",
            gnf_mixed,
            gnf_mixed.z_vars[sel.component],
            sel.buchi_count,
        )
    else:
        out_g = GrammarFile(
            g.instance,
            omega_sys.terminals,
            "omega",
            omega_sys,
            omega_sys.variables[omega_sel.component],
            omega_sel.buchi_count,
        )
    _emit(args, format_grammar(out_g), report)
    return EXIT_OK


def _emit(args, grammar_text: str, report: GnfPipelineReport) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(grammar_text)
    else:
        sys.stdout.write(grammar_text)
    if getattr(args, "report", None):
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())


def cmd_build_pda(args) -> int:
    g = _load(args.path)
    if g.kind == "omega":
        mixed = induce_mixed(g.system)
    else:
        mixed = g.system
    start_name = args.start if args.start is not None else g.start
    if mixed.z_vars:
        if len(mixed.x_vars) != len(mixed.z_vars):
            raise IllFormedSystem(
                "omega construction needs equally many x- and z-variables; "
                "run the normal form first"
            )
        buchi = args.buchi if args.buchi is not None else (g.buchi or 0)
        if start_name is None:
            start = 0
        elif start_name in mixed.x_vars:
            start = mixed.x_vars.index(start_name)
        else:
            start = mixed.z_vars.index(start_name)
        auto = induced_omega_pda(mixed, start, buchi)
    else:
        start = mixed.x_vars.index(start_name) if start_name else 0
        auto = induced_finite_pda(mixed.x_part, start)
    doc = pda_to_json(auto)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc)
    else:
        print(doc)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(pda_to_dot(auto))
    return EXIT_OK


def _print_value(v) -> None:
    print(SemiringInstance.format_value(v))


def cmd_eval(args) -> int:
    if args.word is None and args.lasso is None:
        print("error: need --word or --lasso", file=sys.stderr)
        return EXIT_USAGE
    if args.path.endswith(".json"):
        with open(args.path, "r", encoding="utf-8") as fh:
            auto = pda_from_json(fh.read())
        if args.word is not None:
            _print_value(behavior_finite(auto, _symbols_of(args.word)))
            return EXIT_OK
        w = _parse_lasso(args.lasso)
        caps = None
        if args.height is not None or args.periods is not None:
            base = default_pda_caps(auto, w)
            caps = PdaLassoCaps(
                args.height if args.height is not None else base.height,
                args.periods if args.periods is not None else base.periods,
            )
        res = behavior_omega_lasso(auto, w, caps)
        if not res.conclusive:
            print("inconclusive")
            return EXIT_INCONCLUSIVE
        _print_value(res.value)
        return EXIT_OK

    g = _load(args.path)
    mixed, k, comp = _to_mixed(g)
    if args.buchi is not None:
        k = args.buchi
    if args.component is not None:
        comp = mixed.z_vars.index(args.component)
    if args.word is not None:
        word = _symbols_of(args.word)
        max_len = args.maxlen if args.maxlen is not None else max(len(word), 1)
        if len(word) > max_len:
            print("error: word longer than --maxlen", file=sys.stderr)
            return EXIT_USAGE
        target = args.component or (g.start if g.start is not None else None)
        x_names = mixed.x_vars
        idx = x_names.index(target) if target in x_names else 0
        sol = least_solution_finite(mixed.x_part, max_len)
        _print_value(sol[idx].coeff(word))
        return EXIT_OK
    w = _parse_lasso(args.lasso)
    caps = None
    if args.factor_len is not None or args.periods is not None:
        base = default_lasso_caps(mixed, w)
        caps = LassoCaps(
            args.factor_len if args.factor_len is not None else base.factor_len,
            args.periods if args.periods is not None else base.periods,
        )
    res = canonical_omega_lasso(mixed, k, comp, w, caps)
    if not res.conclusive:
        print("inconclusive")
        return EXIT_INCONCLUSIVE
    _print_value(res.value)
    return EXIT_OK


def cmd_check(args) -> int:
    from . import checks

    seed = args.seed
    if args.suite == "identities":
        failures = checks.identity_suite(random.Random(seed))
    elif args.suite == "oracle":
        failures = checks.oracle_suite(random.Random(seed))
    else:
        failures = checks.examples_suite(args.golden)
    for name, ok, info in failures.lines:
        print(f"{'PASS' if ok else 'FAIL'} {name}{'' if not info else ' ' + info}")
    print(f"{'PASS' if failures.ok else 'FAIL'} suite={args.suite} seed={seed} version={__version__}")
    return EXIT_OK if failures.ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="staromega",
        description="weighted omega-context-free systems, normal forms and automata",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a grammar file and print a summary")
    p.add_argument("path")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("gnf", help="run the normal form pipeline")
    p.add_argument("path")
    p.add_argument("--target", choices=("mixed", "omega"), default="omega")
    p.add_argument("--buchi", type=int, default=None)
    p.add_argument("--component", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_gnf)

    p = sub.add_parser("build-pda", help="construct the induced pushdown automaton")
    p.add_argument("path")
    p.add_argument("--start", default=None)
    p.add_argument("--buchi", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--dot", default=None)
    p.set_defaults(func=cmd_build_pda)

    p = sub.add_parser("eval", help="evaluate a word or lasso word")
    p.add_argument("path", help="grammar file or automaton .json")
    p.add_argument("--word", default=None)
    p.add_argument("--lasso", default=None)
    p.add_argument("--maxlen", type=int, default=None)
    p.add_argument("--buchi", type=int, default=None)
    p.add_argument("--component", default=None)
    p.add_argument("--factor-len", dest="factor_len", type=int, default=None)
    p.add_argument("--periods", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", choices=("identities", "examples", "oracle"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--golden", default=None)
    p.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GrammarError, SeriesError, SemiringError, IllFormedSystem, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, (GrammarError, ValueError)) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
