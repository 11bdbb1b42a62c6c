"""Estimand expression language and per-estimand assumption assembly.

An estimand is a signed, weighted combination of potential-outcome-mean
terms of five kinds:

- ``Y_A``   E[Y(a)]                     mean under an exposure intervention
- ``Y_AM``  E[Y(a,m)]                   exposure and mediator both set
- ``Y_POL`` E[Y(a,G)], G known          mediator drawn from a known policy
- ``Y_POT`` E[Y(a,G)], G potential      policy built from a potential
                                        mediator distribution
- ``Y_XW``  E[Y(a,M(a'))]               cross-world mediator assignment

Surface syntax::

    TE | CDE(m) | GDE(policy=<file>[,cond=C|CL]) | IDE(a*) | IIE(a)
    NDE0 | NDE1 | NIE0 | NIE1
    EY(a) | EY(a, m=<m>)
    EY(a, pol=known:<file>[, cond=C|CL])
    EY(a, pol=pot:<a*>[, cond=marginal|C|CL])
    XW(a, a')
    <term> - <term> | <term> + <term> | <rational>*<term>

``required_assumptions`` turns an expression into the deduplicated set of
consistency / conditional-independence / positivity entries needed to equate
it with an observed-data functional, with symbolic mediator-value ranges
attached where an assumption quantifies over mediator values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import EstimandSyntaxError, ModelError
from .policy import COND_C, COND_CL, COND_MARGINAL, CONDITIONING_LEVELS

# Term kinds.
Y_A = "Y_A"
Y_AM = "Y_AM"
Y_POL = "Y_POL"
Y_POT = "Y_POT"
Y_XW = "Y_XW"

EXPOSURE_STATES = ("0", "1")


@dataclass(frozen=True)
class PoTerm:
    """One signed, weighted potential-outcome mean."""

    kind: str
    a: str
    sign: int = 1
    weight: Fraction = Fraction(1)
    m: Optional[str] = None  # Y_AM
    policy_path: Optional[str] = None  # Y_POL
    cond: Optional[str] = None  # Y_POL / Y_POT conditioning level
    a_star: Optional[str] = None  # Y_POT
    a_prime: Optional[str] = None  # Y_XW

    def __post_init__(self):
        if self.a not in EXPOSURE_STATES:
            raise EstimandSyntaxError(f"exposure value must be 0 or 1, got {self.a!r}", 0)
        if self.kind == Y_XW:
            if self.a_prime not in EXPOSURE_STATES:
                raise EstimandSyntaxError(f"exposure value must be 0 or 1, got {self.a_prime!r}", 0)
            if self.a == self.a_prime:
                raise EstimandSyntaxError("cross-world term requires a != a'", 0)
        if self.kind == Y_POT and self.a_star not in EXPOSURE_STATES:
            raise EstimandSyntaxError(f"exposure value must be 0 or 1, got {self.a_star!r}", 0)
        if self.cond is not None and self.cond not in CONDITIONING_LEVELS:
            raise EstimandSyntaxError(f"unknown conditioning level {self.cond!r}", 0)

    def describe(self) -> str:
        if self.kind == Y_A:
            core = f"EY({self.a})"
        elif self.kind == Y_AM:
            core = f"EY({self.a},m={self.m})"
        elif self.kind == Y_POL:
            core = f"EY({self.a},pol=known:{self.policy_path},cond={self.cond})"
        elif self.kind == Y_POT:
            core = f"EY({self.a},pol=pot:{self.a_star},cond={self.cond})"
        else:
            core = f"XW({self.a},{self.a_prime})"
        prefix = "-" if self.sign < 0 else "+"
        if self.weight != 1:
            prefix += f"{self.weight}*"
        return prefix + core


@dataclass(frozen=True)
class EstimandExpr:
    terms: tuple[PoTerm, ...]
    name: Optional[str] = None

    def describe(self) -> str:
        return " ".join(t.describe() for t in self.terms)


# ---------------------------------------------------------------------------
# Parser


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*,=])|(?P<arg>[^\s()+\-*,=]+))"
)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None or match.end() == pos:
                raise EstimandSyntaxError(f"unexpected character {text[pos]!r}", pos)
            for group in ("num", "name", "op", "arg"):
                value = match.group(group)
                if value is not None:
                    self.tokens.append((group, value, match.start(group)))
                    break
            pos = match.end()
        self.i = 0

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise EstimandSyntaxError("unexpected end of expression", len(self.text))
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.next()
        if tok[0] != "op" or tok[1] != op:
            raise EstimandSyntaxError(f"expected {op!r}, got {tok[1]!r}", tok[2])


def _parse_args(toks: _Tokens) -> list[tuple[Optional[str], str, int]]:
    """Parse ``( ... )`` into (key-or-None, value, position) triples.

    Values may contain ``:`` (policy specs) and ``/`` (paths); they are
    re-joined from raw tokens until a comma or closing parenthesis."""
    toks.expect_op("(")
    args: list[tuple[Optional[str], str, int]] = []
    while True:
        tok = toks.peek()
        if tok is None:
            raise EstimandSyntaxError("unclosed argument list", len(toks.text))
        if tok[0] == "op" and tok[1] == ")":
            toks.next()
            return args
        key = None
        first = toks.next()
        pos = first[2]
        nxt = toks.peek()
        if first[0] == "name" and nxt is not None and nxt[0] == "op" and nxt[1] == "=":
            key = first[1]
            toks.next()
            first = toks.next()
            pos = first[2]
        pieces = [first[1]]
        while True:
            nxt = toks.peek()
            if nxt is None:
                raise EstimandSyntaxError("unclosed argument list", len(toks.text))
            if nxt[0] == "op" and nxt[1] in (",", ")"):
                break
            pieces.append(toks.next()[1])
        args.append((key, "".join(pieces), pos))
        if toks.peek()[1] == ",":
            toks.next()


def _split_policy(value: str, pos: int) -> tuple[str, str]:
    scheme, sep, rest = value.partition(":")
    if not sep or scheme not in ("known", "pot"):
        raise EstimandSyntaxError(
            f"policy must be 'known:<file>' or 'pot:<a*>', got {value!r}", pos
        )
    return scheme, rest


def _parse_term(toks: _Tokens) -> PoTerm:
    tok = toks.next()
    if tok[0] != "name":
        raise EstimandSyntaxError(f"expected a term name, got {tok[1]!r}", tok[2])
    name, pos = tok[1], tok[2]

    if name == "EY":
        args = _parse_args(toks)
        if not args or args[0][0] is not None:
            raise EstimandSyntaxError("EY requires a positional exposure value", pos)
        a = args[0][1]
        kw = {}
        for key, value, kpos in args[1:]:
            if key is None:
                raise EstimandSyntaxError(f"unexpected positional argument {value!r}", kpos)
            if key in kw:
                raise EstimandSyntaxError(f"duplicate argument {key!r}", kpos)
            kw[key] = (value, kpos)
        unknown = set(kw) - {"m", "pol", "cond"}
        if unknown:
            raise EstimandSyntaxError(f"unknown EY argument {sorted(unknown)[0]!r}", pos)
        if "m" in kw and "pol" in kw:
            raise EstimandSyntaxError("EY takes either m= or pol=, not both", pos)
        if "m" in kw:
            if "cond" in kw:
                raise EstimandSyntaxError("cond= applies only to pol= terms", kw["cond"][1])
            return PoTerm(kind=Y_AM, a=a, m=kw["m"][0])
        if "pol" in kw:
            scheme, rest = _split_policy(*kw["pol"])
            cond = kw["cond"][0] if "cond" in kw else None
            if scheme == "known":
                return PoTerm(kind=Y_POL, a=a, policy_path=rest, cond=cond or COND_MARGINAL)
            return PoTerm(kind=Y_POT, a=a, a_star=rest, cond=cond or COND_MARGINAL)
        if "cond" in kw:
            raise EstimandSyntaxError("cond= applies only to pol= terms", kw["cond"][1])
        return PoTerm(kind=Y_A, a=a)

    if name == "XW":
        args = _parse_args(toks)
        if len(args) != 2 or any(k is not None for k, _, _ in args):
            raise EstimandSyntaxError("XW takes exactly two exposure values", pos)
        return PoTerm(kind=Y_XW, a=args[0][1], a_prime=args[1][1])

    raise EstimandSyntaxError(f"unknown term {name!r}", pos)


def _negated(terms: tuple[PoTerm, ...]) -> tuple[PoTerm, ...]:
    return tuple(
        PoTerm(**{**t.__dict__, "sign": -t.sign}) for t in terms
    )


def _named_expansion(name: str, toks: _Tokens, pos: int) -> Optional[tuple[PoTerm, ...]]:
    if name == "TE":
        return (PoTerm(Y_A, "1"), PoTerm(Y_A, "0", sign=-1))
    if name == "CDE":
        args = _parse_args(toks)
        if len(args) != 1 or args[0][0] is not None:
            raise EstimandSyntaxError("CDE takes exactly one mediator value", pos)
        m = args[0][1]
        return (PoTerm(Y_AM, "1", m=m), PoTerm(Y_AM, "0", sign=-1, m=m))
    if name == "GDE":
        args = _parse_args(toks)
        kw = {k: v for k, v, _ in args if k is not None}
        if set(kw) - {"policy", "cond"} or "policy" not in kw or len(args) != len(kw):
            raise EstimandSyntaxError("GDE requires policy=<file> (and optional cond=)", pos)
        cond = kw.get("cond", COND_MARGINAL)
        return (
            PoTerm(Y_POL, "1", policy_path=kw["policy"], cond=cond),
            PoTerm(Y_POL, "0", sign=-1, policy_path=kw["policy"], cond=cond),
        )
    if name in ("IDE", "IIE"):
        args = _parse_args(toks)
        if len(args) != 1 or args[0][0] is not None:
            raise EstimandSyntaxError(f"{name} takes exactly one exposure value", pos)
        v = args[0][1]
        if name == "IDE":
            # IDE(a*) = EY(1, pot:a*, C) - EY(0, pot:a*, C)
            return (
                PoTerm(Y_POT, "1", a_star=v, cond=COND_C),
                PoTerm(Y_POT, "0", sign=-1, a_star=v, cond=COND_C),
            )
        # IIE(a) = EY(a, pot:1, C) - EY(a, pot:0, C)
        return (
            PoTerm(Y_POT, v, a_star="1", cond=COND_C),
            PoTerm(Y_POT, v, sign=-1, a_star="0", cond=COND_C),
        )
    if name == "NDE0":
        return (PoTerm(Y_XW, "1", a_prime="0"), PoTerm(Y_A, "0", sign=-1))
    if name == "NIE1":
        return (PoTerm(Y_A, "1"), PoTerm(Y_XW, "1", sign=-1, a_prime="0"))
    if name == "NDE1":
        return (PoTerm(Y_A, "1"), PoTerm(Y_XW, "0", sign=-1, a_prime="1"))
    if name == "NIE0":
        return (PoTerm(Y_XW, "0", a_prime="1"), PoTerm(Y_A, "0", sign=-1))
    return None


def parse_estimand(text: str) -> EstimandExpr:
    toks = _Tokens(text)
    if toks.peek() is None:
        raise EstimandSyntaxError("empty expression", 0)

    terms: list[PoTerm] = []
    name: Optional[str] = None
    sign = 1
    first = True
    while True:
        tok = toks.peek()
        if tok is None:
            break
        if not first:
            if tok[0] != "op" or tok[1] not in "+-":
                raise EstimandSyntaxError(f"expected + or -, got {tok[1]!r}", tok[2])
            toks.next()
            sign = 1 if tok[1] == "+" else -1
        else:
            if tok[0] == "op" and tok[1] == "-":
                toks.next()
                sign = -1

        weight = Fraction(1)
        tok = toks.peek()
        if tok is not None and tok[0] == "num":
            toks.next()
            weight = Fraction(tok[1])
            toks.expect_op("*")

        tok = toks.peek()
        if tok is not None and tok[0] == "name" and weight == 1 and tok[1] not in ("EY", "XW"):
            toks.next()
            expansion = _named_expansion(tok[1], toks, tok[2])
            if expansion is None:
                raise EstimandSyntaxError(f"unknown estimand {tok[1]!r}", tok[2])
            if first and sign == 1 and toks.peek() is None:
                name = tok[1]
            terms.extend(expansion if sign == 1 else _negated(expansion))
            first = False
            continue
        term = _parse_term(toks)
        terms.append(PoTerm(**{**term.__dict__, "sign": sign * term.sign, "weight": weight}))
        first = False

    return EstimandExpr(tuple(terms), name=name)


# ---------------------------------------------------------------------------
# Assumption assembly

FAMILY_CONSISTENCY = "consistency"
FAMILY_CI = "conditional_independence"
FAMILY_POSITIVITY = "positivity"

# Entry kinds.
K_PO = "potential_outcome"
K_PM = "potential_mediator"
K_LCONS = "intermediate_confounder"
K_XW_CONS = "cross_world_consistency"
K_COMPOSITION = "composition"
K_AY = "exposure_outcome"
K_AM = "exposure_mediator"
K_MY = "mediator_outcome"
K_XW_CI = "cross_world"
K_APOS = "exposure_condition"
K_MPOS = "mediator_values"


@dataclass(frozen=True)
class RangeAtom:
    """A symbolic mediator-value range.

    kind 'point'  value=m                      the single value m
    kind 'known'  value=path,   level=cond     support of a known policy
    kind 'pot'    value=a*,     level=cond     support of M given A=a* at the
                                               stated conditioning level
    kind 'cross'  value=a'                     support of M given C, A=a'
    """

    kind: str
    value: str
    level: Optional[str] = None

    def describe(self) -> str:
        if self.kind == "point":
            return "{" + self.value + "}"
        if self.kind == "cross":
            return f"supp(M | C, A={self.value})"
        if self.kind == "known":
            if self.level == COND_MARGINAL:
                return f"supp(policy {self.value})"
            if self.level == COND_C:
                return f"supp(policy {self.value} | C)"
            return f"supp(policy {self.value} | C, L)"
        if self.level == COND_MARGINAL:
            return f"supp(M | A={self.value})"
        if self.level == COND_C:
            return f"supp(M | C, A={self.value})"
        return f"supp(M | C, L, A={self.value}) at the realized L"

    def sort_key(self):
        return (self.kind, self.value, self.level or "")


@dataclass(frozen=True)
class AssumptionEntry:
    family: str
    kind: str
    params: tuple[tuple[str, str], ...]
    atoms: Optional[frozenset[RangeAtom]] = None
    testable: bool = False
    interpretive: bool = False

    def param(self, key: str) -> Optional[str]:
        for k, v in self.params:
            if k == key:
                return v
        return None

    def _range_text(self) -> str:
        assert self.atoms is not None
        return " u ".join(a.describe() for a in sorted(self.atoms, key=RangeAtom.sort_key))

    @property
    def statement(self) -> str:
        a = self.param("a")
        if self.kind == K_PO:
            if self.atoms is None:
                return f"Y = Y({a}) if A={a}"
            return f"Y = Y({a},m) if A={a}, M=m, for all m in {self._range_text()}"
        if self.kind == K_PM:
            s = self.param("a_star")
            return f"M = M({s}) if A={s}"
        if self.kind == K_LCONS:
            arms = self.param("arms")
            if arms == "0,1":
                return "L = A*L(1) + (1-A)*L(0)"
            return f"L = L({arms}) if A={arms}"
        if self.kind == K_XW_CONS:
            ap = self.param("a_prime")
            return f"Y({a},M({ap})) = Y({a},m) if M({ap})=m"
        if self.kind == K_COMPOSITION:
            return "Y(a) = Y(a,M(a)) for a=0,1"
        if self.kind == K_AY:
            if self.atoms is None:
                return f"A _||_ Y({a}) | C"
            return f"A _||_ Y({a},m) | C, for all m in {self._range_text()}"
        if self.kind == K_AM:
            s = self.param("a_star")
            return f"A _||_ M({s}) | C"
        if self.kind == K_MY:
            given = "C, L" if self.param("with_l") == "yes" else "C"
            return f"M _||_ Y({a},m) | {given}, A={a}, for all m in {self._range_text()}"
        if self.kind == K_XW_CI:
            ap = self.param("a_prime")
            return f"M({ap}) _||_ Y({a},m) | C, for all m in {self._range_text()}"
        if self.kind == K_APOS:
            given = "C, L" if self.param("given") == "CL" else "C"
            return f"P(A={a} | {given}) > 0"
        if self.kind == K_MPOS:
            given = "C, L" if self.param("with_l") == "yes" else "C"
            return f"P(M=m | {given}, A={a}) > 0 for all m in {self._range_text()}"
        raise ModelError(f"unknown assumption kind {self.kind}")


@dataclass(frozen=True)
class AssumptionSet:
    entries: tuple[AssumptionEntry, ...]

    def by_family(self, family: str) -> tuple[AssumptionEntry, ...]:
        return tuple(e for e in self.entries if e.family == family)

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            atoms = (
                ""
                if e.atoms is None
                else ",".join(
                    ":".join(p for p in (a.kind, a.value, a.level) if p is not None)
                    for a in sorted(e.atoms, key=RangeAtom.sort_key)
                )
            )
            params = ";".join(f"{k}={v}" for k, v in e.params)
            flags = ("testable" if e.testable else "untestable") + (
                ",interpretive" if e.interpretive else ""
            )
            lines.append("|".join([e.family, e.kind, params, atoms, flags, e.statement]))
        return "\n".join(lines) + "\n"


def _entry(family, kind, params: dict, atoms=None, testable=False, interpretive=False):
    return AssumptionEntry(
        family=family,
        kind=kind,
        params=tuple(sorted(params.items())),
        atoms=None if atoms is None else frozenset(atoms),
        testable=testable,
        interpretive=interpretive,
    )


def _term_entries(t: PoTerm) -> list[AssumptionEntry]:
    out: list[AssumptionEntry] = []
    a = t.a
    if t.kind == Y_A:
        out.append(_entry(FAMILY_CONSISTENCY, K_PO, {"a": a}))
        out.append(_entry(FAMILY_CI, K_AY, {"a": a}))
        out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": a, "given": "C"}, testable=True))
        return out

    if t.kind == Y_AM:
        atoms = {RangeAtom("point", t.m)}
        out.append(_entry(FAMILY_CONSISTENCY, K_PO, {"a": a}, atoms))
        out.append(_entry(FAMILY_CI, K_AY, {"a": a}, atoms))
        out.append(_entry(FAMILY_CI, K_MY, {"a": a, "with_l": "yes"}, atoms))
        out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": a, "given": "C"}, testable=True))
        out.append(_entry(FAMILY_POSITIVITY, K_MPOS, {"a": a, "with_l": "yes"}, atoms, testable=True))
        return out

    if t.kind == Y_POL:
        atoms = {RangeAtom("known", t.policy_path, t.cond)}
        out.append(_entry(FAMILY_CONSISTENCY, K_PO, {"a": a}, atoms))
        if t.cond == COND_CL:
            out.append(_entry(FAMILY_CONSISTENCY, K_LCONS, {"arms": a}))
        out.append(_entry(FAMILY_CI, K_AY, {"a": a}, atoms))
        out.append(_entry(FAMILY_CI, K_MY, {"a": a, "with_l": "yes"}, atoms))
        out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": a, "given": "C"}, testable=True))
        out.append(_entry(FAMILY_POSITIVITY, K_MPOS, {"a": a, "with_l": "yes"}, atoms, testable=True))
        return out

    if t.kind == Y_POT:
        s = t.a_star
        atoms = {RangeAtom("pot", s, t.cond)}
        out.append(_entry(FAMILY_CONSISTENCY, K_PO, {"a": a}, atoms))
        out.append(_entry(FAMILY_CONSISTENCY, K_PM, {"a_star": s}))
        if t.cond == COND_CL:
            arms = "0,1" if s != a else a
            out.append(_entry(FAMILY_CONSISTENCY, K_LCONS, {"arms": arms}))
        out.append(_entry(FAMILY_CI, K_AM, {"a_star": s}))
        out.append(_entry(FAMILY_CI, K_AY, {"a": a}, atoms))
        out.append(_entry(FAMILY_CI, K_MY, {"a": a, "with_l": "yes"}, atoms))
        out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": a, "given": "C"}, testable=True))
        if t.cond == COND_CL and s != a:
            out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": s, "given": "CL"}, testable=True))
        elif s != a:
            out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": s, "given": "C"}, testable=True))
        out.append(_entry(FAMILY_POSITIVITY, K_MPOS, {"a": a, "with_l": "yes"}, atoms, testable=True))
        return out

    # Y_XW
    ap = t.a_prime
    atoms = {RangeAtom("cross", ap)}
    out.append(_entry(FAMILY_CONSISTENCY, K_PO, {"a": a}, atoms))
    out.append(_entry(FAMILY_CONSISTENCY, K_PM, {"a_star": ap}))
    out.append(_entry(FAMILY_CONSISTENCY, K_XW_CONS, {"a": a, "a_prime": ap}))
    out.append(
        _entry(FAMILY_CONSISTENCY, K_COMPOSITION, {"arms": "0,1"}, interpretive=True)
    )
    out.append(_entry(FAMILY_CI, K_AM, {"a_star": ap}))
    out.append(_entry(FAMILY_CI, K_AY, {"a": a}, atoms))
    out.append(_entry(FAMILY_CI, K_MY, {"a": a, "with_l": "no"}, atoms))
    out.append(_entry(FAMILY_CI, K_XW_CI, {"a": a, "a_prime": ap}, atoms))
    out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": a, "given": "C"}, testable=True))
    out.append(_entry(FAMILY_POSITIVITY, K_APOS, {"a": ap, "given": "C"}, testable=True))
    out.append(_entry(FAMILY_POSITIVITY, K_MPOS, {"a": a, "with_l": "no"}, atoms, testable=True))
    return out


_FAMILY_ORDER = {FAMILY_CONSISTENCY: 0, FAMILY_CI: 1, FAMILY_POSITIVITY: 2}
_KIND_ORDER = {
    K_PO: 0,
    K_PM: 1,
    K_LCONS: 2,
    K_XW_CONS: 3,
    K_COMPOSITION: 4,
    K_AM: 0,
    K_AY: 1,
    K_MY: 2,
    K_XW_CI: 3,
    K_APOS: 0,
    K_MPOS: 1,
}


def required_assumptions(expr: EstimandExpr) -> AssumptionSet:
    """Union the per-term assumption entries, merging mediator-value ranges.

    Entries agreeing on (family, kind, parameters) are merged by uniting
    their range atoms, mirroring how the assumption tables share rows across
    the potential outcome means of a contrast."""
    merged: dict[tuple, AssumptionEntry] = {}
    for t in expr.terms:
        for e in _term_entries(t):
            if e.kind in (K_LCONS, K_COMPOSITION):
                key = (e.family, e.kind)
            else:
                key = (e.family, e.kind, e.params, e.atoms is None)
            if key in merged:
                old = merged[key]
                atoms = old.atoms
                if e.atoms is not None:
                    atoms = (atoms or frozenset()) | e.atoms
                params = old.params
                if e.kind == K_LCONS and old.param("arms") != e.param("arms"):
                    arms = set(old.param("arms").split(",")) | set(e.param("arms").split(","))
                    params = tuple(sorted({"arms": ",".join(sorted(arms))}.items()))
                merged[key] = AssumptionEntry(
                    family=old.family,
                    kind=old.kind,
                    params=params,
                    atoms=atoms,
                    testable=old.testable,
                    interpretive=old.interpretive,
                )
            else:
                merged[key] = e
    # An exposure-positivity requirement at the (C, L) level subsumes the
    # C-level requirement for the same arm; keep only the stronger row.
    cl_arms = {
        e.param("a")
        for e in merged.values()
        if e.kind == K_APOS and e.param("given") == "CL"
    }
    entries = sorted(
        (
            e
            for e in merged.values()
            if not (e.kind == K_APOS and e.param("given") == "C" and e.param("a") in cl_arms)
        ),
        key=lambda e: (_FAMILY_ORDER[e.family], _KIND_ORDER[e.kind], e.params),
    )
    return AssumptionSet(tuple(entries))


def _atom_subset(sub: Optional[frozenset], sup: Optional[frozenset]) -> bool:
    if sub is None or sup is None:
        return sub == sup
    return sub <= sup


def _dominates(strong: AssumptionEntry, weak: AssumptionEntry) -> bool:
    """Does assuming ``strong`` cover the need for ``weak``?

    Identical entries dominate; a for-all-m family of statements about the
    same exposure arm dominates the corresponding single-world statement
    (the quantified potential-outcome consistency and exposure-outcome
    independence statements are the natural strengthening of their
    unquantified counterparts)."""
    if strong.family != weak.family or strong.kind != weak.kind:
        return False
    if strong.params == weak.params and _atom_subset(weak.atoms, strong.atoms):
        return True
    if weak.atoms is None and strong.atoms is not None and weak.kind in (K_PO, K_AY):
        return weak.param("a") == strong.param("a")
    if weak.kind == K_APOS and weak.param("a") == strong.param("a"):
        # Positivity of an exposure condition within (C, L) cells implies it
        # within C cells.
        return weak.param("given") == "C" and strong.param("given") == "CL"
    return False


def is_weaker(weaker: AssumptionSet, stronger: AssumptionSet) -> bool:
    """True when every entry of ``weaker`` is dominated by some entry of
    ``stronger`` (so the stronger set suffices for everything the weaker set
    is needed for)."""
    return all(any(_dominates(s, w) for s in stronger.entries) for w in weaker.entries)


def is_strictly_weaker(weaker: AssumptionSet, stronger: AssumptionSet) -> bool:
    return is_weaker(weaker, stronger) and not is_weaker(stronger, weaker)


# ---------------------------------------------------------------------------
# Evaluation sources


class OracleSource:
    """Evaluates terms by exhaustive counterfactual enumeration of a model."""

    def __init__(self, model, cap=None):
        from .scm import DEFAULT_ENUMERATION_CAP

        self.model = model
        self.cap = DEFAULT_ENUMERATION_CAP if cap is None else cap

    def _known_policy(self, term: PoTerm):
        from .policy import load_known_policy

        model = self.model
        mediator = (model.mediator.name, model.mediator.states)
        c_vars = [(v.name, v.states) for v in model.by_role("C")]
        l_vars = [(v.name, v.states) for v in model.by_role("L")]
        return load_known_policy(term.policy_path, mediator, c_vars, l_vars, term.cond)

    def term_mean(self, term: PoTerm):
        from . import oracle
        from .policy import KnownPolicy

        if term.kind == Y_A:
            return oracle.po_mean_a(self.model, term.a, self.cap)
        if term.kind == Y_AM:
            return oracle.po_mean_am(self.model, term.a, term.m, self.cap)
        if term.kind == Y_POL:
            return oracle.po_mean_policy(self.model, term.a, self._known_policy(term), self.cap)
        if term.kind == Y_POT:
            dist = oracle.potential_mediator_dist(self.model, term.a_star, term.cond, self.cap)
            return oracle.po_mean_policy(self.model, term.a, KnownPolicy(dist), self.cap)
        return oracle.po_mean_crossworld(self.model, term.a, term.a_prime, self.cap)


class IdentSource:
    """Evaluates terms through the identification formulas on an observed joint."""

    def __init__(self, joint, roles):
        self.joint = joint
        self.roles = roles

    def _known_policy(self, term: PoTerm):
        from .policy import load_known_policy

        roles = self.roles
        mediator = (roles.mediator, roles.states_of(roles.mediator))
        c_vars = [(n, roles.states_of(n)) for n in roles.c_names]
        l_vars = [(n, roles.states_of(n)) for n in roles.l_names]
        return load_known_policy(term.policy_path, mediator, c_vars, l_vars, term.cond)

    def term_mean(self, term: PoTerm):
        from . import ident
        from .policy import PotentialPolicy

        if term.kind == Y_A:
            return ident.ident_mean_a(self.joint, self.roles, term.a)
        if term.kind == Y_AM:
            return ident.ident_mean_am(self.joint, self.roles, term.a, term.m)
        if term.kind == Y_POL:
            return ident.ident_mean_policy(self.joint, self.roles, term.a, self._known_policy(term))
        if term.kind == Y_POT:
            policy = PotentialPolicy(term.a_star, term.cond)
            return ident.ident_mean_policy(self.joint, self.roles, term.a, policy)
        return ident.ident_mean_crossworld(self.joint, self.roles, term.a, term.a_prime)


def evaluate(expr: EstimandExpr, source):
    """Signed, weighted sum of term means; errors are annotated with the
    offending term and re-raised."""
    from .errors import MedidError

    total = 0
    for term in expr.terms:
        try:
            value = source.term_mean(term)
        except MedidError as exc:
            if exc.args and isinstance(exc.args[0], str):
                exc.args = (f"{term.describe()}: {exc.args[0]}",) + exc.args[1:]
            raise
        total = total + term.sign * term.weight * value
    return total
