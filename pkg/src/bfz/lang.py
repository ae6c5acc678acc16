"""Type and term ASTs, primitive signatures, and the pretty-printer.

Concrete syntax summary (``.bfz`` files, UTF-8, ``--`` line comments):

    types   real | unit | ![s] T | T (*@p) T | T -o@p T | T + T
            | circP T | circH T | set T
    terms   x | 1.5 | () | fun (x : T) -o@p e | e e | (e1, e2)@p
            | let (x, y)@p = e in e | inl[T] e | inr[T] e
            | case@p e { inl x -> e1 | inr y -> e2 }
            | ![s] e | let !x @p = e in e | mlet@p x = e in e
            | return e | hreturn e | prim.NAME[args]

``inf`` is accepted for both grades and p-indices. ``fun (x : ![s] T)`` is
sugar for a grade-1 lambda followed by ``let !x`` at the lambda's p-index;
the desugared form is what the checker sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .metrics import INF, approx_eq, check_pidx, check_sens, format_sens

Loc = tuple[int, int]  # (line, column), 1-based

# Internal suffix for the wrapper variable introduced by the ![s]-parameter
# sugar; '#' cannot appear in source identifiers, so no capture is possible.
SUGAR_SUFFIX = "#"


# ---------------------------------------------------------------------------
# Types


class Ty:
    pass


@dataclass(frozen=True)
class TUnit(Ty):
    pass


@dataclass(frozen=True)
class TReal(Ty):
    pass


@dataclass(frozen=True)
class TBang(Ty):
    sens: float
    inner: Ty


@dataclass(frozen=True)
class TTensor(Ty):
    p: float
    left: Ty
    right: Ty


@dataclass(frozen=True)
class TArrow(Ty):
    p: float
    dom: Ty
    cod: Ty


@dataclass(frozen=True)
class TSum(Ty):
    left: Ty
    right: Ty


@dataclass(frozen=True)
class TProbP(Ty):
    inner: Ty


@dataclass(frozen=True)
class TProbH(Ty):
    inner: Ty


@dataclass(frozen=True)
class TSet(Ty):
    elem: Ty


def ty_eq(a: Ty, b: Ty) -> bool:
    """Structural equality with tolerant comparison of grades and p-indices."""
    if type(a) is not type(b):
        return False
    match a:
        case TUnit() | TReal():
            return True
        case TBang(s, inner):
            return approx_eq(s, b.sens) and ty_eq(inner, b.inner)
        case TTensor(p, l, r):
            return approx_eq(p, b.p) and ty_eq(l, b.left) and ty_eq(r, b.right)
        case TArrow(p, d, c):
            return approx_eq(p, b.p) and ty_eq(d, b.dom) and ty_eq(c, b.cod)
        case TSum(l, r):
            return ty_eq(l, b.left) and ty_eq(r, b.right)
        case TProbP(inner) | TProbH(inner):
            return ty_eq(inner, b.inner)
        case TSet(elem):
            return ty_eq(elem, b.elem)
    raise TypeError(f"unknown type node {a!r}")


def ty_skeleton_eq(a: Ty, b: Ty) -> bool:
    """Equality ignoring grades and p-indices (used to flag p-mismatches)."""
    if type(a) is not type(b):
        return False
    match a:
        case TUnit() | TReal():
            return True
        case TBang(_, inner):
            return ty_skeleton_eq(inner, b.inner)
        case TTensor(_, l, r):
            return ty_skeleton_eq(l, b.left) and ty_skeleton_eq(r, b.right)
        case TArrow(_, d, c):
            return ty_skeleton_eq(d, b.dom) and ty_skeleton_eq(c, b.cod)
        case TSum(l, r):
            return ty_skeleton_eq(l, b.left) and ty_skeleton_eq(r, b.right)
        case TProbP(inner) | TProbH(inner):
            return ty_skeleton_eq(inner, b.inner)
        case TSet(elem):
            return ty_skeleton_eq(elem, b.elem)
    raise TypeError(f"unknown type node {a!r}")


def ty_str(t: Ty) -> str:
    """Concrete syntax for a type, fully parenthesized at binary nodes."""
    match t:
        case TUnit():
            return "unit"
        case TReal():
            return "real"
        case TBang(s, inner):
            return f"![{format_sens(s)}] {_ty_atom(inner)}"
        case TTensor(p, l, r):
            return f"({ty_str(l)} (*@{format_sens(p)}) {ty_str(r)})"
        case TArrow(p, d, c):
            return f"({ty_str(d)} -o@{format_sens(p)} {ty_str(c)})"
        case TSum(l, r):
            return f"({ty_str(l)} + {ty_str(r)})"
        case TProbP(inner):
            return f"circP {_ty_atom(inner)}"
        case TProbH(inner):
            return f"circH {_ty_atom(inner)}"
        case TSet(elem):
            return f"set {_ty_atom(elem)}"
    raise TypeError(f"unknown type node {t!r}")


def _ty_atom(t: Ty) -> str:
    s = ty_str(t)
    if isinstance(t, (TBang, TProbP, TProbH, TSet)):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# Terms


class Term:
    loc: Loc


@dataclass(frozen=True)
class Var(Term):
    name: str
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class RealLit(Term):
    value: float
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class UnitLit(Term):
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Lam(Term):
    p: float
    var: str
    annot: Ty
    body: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Pair(Term):
    p: float
    fst: Term
    snd: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class LetPair(Term):
    q: float | None  # splice index; None means "use the rhs tensor's p"
    x: str
    y: str
    rhs: Term
    body: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Inj(Term):
    side: int  # 1 or 2
    other: Ty  # annotation for the absent branch
    arg: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Case(Term):
    p: float
    scrut: Term
    x: str
    left: Term
    y: str
    right: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Bang(Term):
    sens: float
    arg: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class LetBang(Term):
    p: float
    var: str
    rhs: Term
    body: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class MLet(Term):
    p: float
    var: str
    rhs: Term
    body: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Ret(Term):
    monad: str  # "P" or "H"
    arg: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Prim(Term):
    name: str
    args: tuple = ()  # floats and Ty nodes, per the primitive's schema
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Def:
    name: str
    declared: Ty | None
    term: Term
    loc: Loc = (0, 0)


@dataclass(frozen=True)
class Program:
    defs: tuple[Def, ...]
    entry: Term | None = None

    def __post_init__(self) -> None:
        seen = set()
        for d in self.defs:
            if d.name in seen:
                raise ValueError(f"duplicate definition name {d.name!r}")
            seen.add(d.name)


def sugar_param(p: float, var: str, annot: TBang, body: Term, loc: Loc = (0, 0)) -> Lam:
    """Build the desugared form of ``fun (x : ![s] T) -o@p body``."""
    wrapper = var + SUGAR_SUFFIX
    return Lam(p, wrapper, annot, LetBang(p, var, Var(wrapper, loc), body, loc), loc)


def match_sugar_param(t: Term):
    """Recognize the ![s]-parameter sugar; returns (p, var, annot, body) or None."""
    if (
        isinstance(t, Lam)
        and t.var.endswith(SUGAR_SUFFIX)
        and isinstance(t.annot, TBang)
        and isinstance(t.body, LetBang)
        and t.body.var == t.var[: -len(SUGAR_SUFFIX)]
        and t.body.p == t.p
        and isinstance(t.body.rhs, Var)
        and t.body.rhs.name == t.var
    ):
        return t.p, t.body.var, t.annot, t.body.body
    return None


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset({name})
        case RealLit() | UnitLit() | Prim():
            return frozenset()
        case Lam(_, var, _, body):
            return free_vars(body) - {var}
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Pair(_, fst, snd):
            return free_vars(fst) | free_vars(snd)
        case LetPair(_, x, y, rhs, body):
            return free_vars(rhs) | (free_vars(body) - {x, y})
        case Inj(_, _, arg):
            return free_vars(arg)
        case Case(_, scrut, x, left, y, right):
            return free_vars(scrut) | (free_vars(left) - {x}) | (free_vars(right) - {y})
        case Bang(_, arg):
            return free_vars(arg)
        case LetBang(_, var, rhs, body) | MLet(_, var, rhs, body):
            return free_vars(rhs) | (free_vars(body) - {var})
        case Ret(_, arg):
            return free_vars(arg)
    raise TypeError(f"unknown term node {t!r}")


# ---------------------------------------------------------------------------
# Primitive signatures

R = TReal()
U = TUnit()

# Argument schemas: N raw number, S sensitivity (>= 0), S+ positive
# sensitivity, P p-index, T type.
PRIM_SCHEMAS: dict[str, tuple[str, ...]] = {
    "add": (),
    "scale": ("N",),
    "rot": ("N",),
    "dist": (),
    "clip": (),
    "cmp": (),
    "sum": ("T",),
    "relax": ("P", "P", "T", "T"),
    "tighten": ("P", "P", "T", "T"),
    "dlap": ("S+",),
    "lpmech2": ("S+", "P", "S+"),
}


class PrimError(ValueError):
    pass


def prim_sig(name: str, args: tuple = ()) -> Ty:
    """Declared closed type of a primitive instance.

    Raises PrimError for unknown names, arity/kind errors, and for
    relax/tighten instances with p > q.
    """
    schema = PRIM_SCHEMAS.get(name)
    if schema is None:
        raise PrimError(f"unknown primitive {name!r}")
    if len(args) != len(schema):
        raise PrimError(
            f"prim.{name} expects {len(schema)} argument(s), got {len(args)}"
        )
    checked = []
    for kind, a in zip(schema, args):
        if kind == "T":
            if not isinstance(a, Ty):
                raise PrimError(f"prim.{name}: expected a type argument, got {a!r}")
            checked.append(a)
        else:
            if isinstance(a, Ty):
                raise PrimError(f"prim.{name}: expected a numeric argument, got a type")
            x = float(a)
            if kind == "S+":
                x = check_sens(x)
                if x <= 0:
                    raise PrimError(f"prim.{name}: argument must be > 0, got {x!r}")
            elif kind == "S":
                x = check_sens(x)
            elif kind == "P":
                x = check_pidx(x)
            checked.append(x)
    a = tuple(checked)

    match name:
        case "add":
            return TArrow(1, TTensor(1, R, R), R)
        case "scale":
            return TArrow(1, TBang(abs(a[0]), R), R)
        case "rot":
            return TArrow(1, TTensor(2, R, R), TTensor(2, R, R))
        case "dist":
            return TArrow(1, TTensor(1, R, R), R)
        case "clip":
            return TArrow(1, R, R)
        case "cmp":
            return TArrow(1, TTensor(1, TBang(INF, R), TBang(INF, R)), TSum(U, U))
        case "sum":
            (elem,) = a
            return TArrow(1, TBang(INF, TArrow(1, TBang(INF, elem), R)), TArrow(1, TSet(elem), R))
        case "relax":
            p, q, t1, t2 = a
            if p > q:
                raise PrimError(f"prim.relax: requires p <= q, got p={p}, q={q}")
            return TArrow(1, TTensor(p, t1, t2), TTensor(q, t1, t2))
        case "tighten":
            p, q, t1, t2 = a
            if p > q:
                raise PrimError(f"prim.tighten: requires p <= q, got p={p}, q={q}")
            inv_p = 0.0 if p == INF else 1.0 / p
            inv_q = 0.0 if q == INF else 1.0 / q
            grade = 2.0 ** (inv_p - inv_q)
            return TArrow(1, TBang(grade, TTensor(q, t1, t2)), TTensor(p, t1, t2))
        case "dlap":
            (eps,) = a
            return TArrow(1, TBang(eps, R), TProbP(R))
        case "lpmech2":
            eps, p, s = a
            db = TSet(R)
            query = TArrow(1, TBang(s, db), TTensor(p, R, R))
            return TArrow(1, TBang(INF, query), TArrow(1, TBang(eps, db), TProbP(TTensor(p, R, R))))
    raise PrimError(f"unknown primitive {name!r}")  # pragma: no cover


def prim_arg_str(a) -> str:
    if isinstance(a, Ty):
        return ty_str(a)
    return format_sens(a) if a >= 0 else f"-{format_sens(-a)}"


# ---------------------------------------------------------------------------
# Pretty-printer


def term_str(t: Term) -> str:
    """Concrete syntax; parse(term_str(t)) is structurally equal to t."""
    sugar = match_sugar_param(t)
    if sugar is not None:
        p, var, annot, body = sugar
        return f"fun ({var} : {ty_str(annot)}) -o@{format_sens(p)} {term_str(body)}"
    match t:
        case Var(name):
            return name
        case RealLit(v):
            if v == int(v) and abs(v) < 1e15:
                return f"{int(v)}.0" if v < 0 or True else str(int(v))
            return repr(v)
        case UnitLit():
            return "()"
        case Lam(p, var, annot, body):
            return f"fun ({var} : {ty_str(annot)}) -o@{format_sens(p)} {term_str(body)}"
        case App(fn, arg):
            return f"{_app_str(fn)} {_atom_str(arg)}"
        case Pair(p, fst, snd):
            return f"({term_str(fst)}, {term_str(snd)})@{format_sens(p)}"
        case LetPair(q, x, y, rhs, body):
            at = "" if q is None else f"@{format_sens(q)}"
            return f"let ({x}, {y}){at} = {term_str(rhs)} in {term_str(body)}"
        case Inj(side, other, arg):
            kw = "inl" if side == 1 else "inr"
            return f"{kw}[{ty_str(other)}] {_atom_str(arg)}"
        case Case(p, scrut, x, left, y, right):
            return (
                f"case@{format_sens(p)} {_atom_str(scrut)} "
                f"{{ inl {x} -> {term_str(left)} | inr {y} -> {term_str(right)} }}"
            )
        case Bang(s, arg):
            return f"![{format_sens(s)}] {_atom_str(arg)}"
        case LetBang(p, var, rhs, body):
            return f"let !{var} @{format_sens(p)} = {term_str(rhs)} in {term_str(body)}"
        case MLet(p, var, rhs, body):
            return f"mlet@{format_sens(p)} {var} = {term_str(rhs)} in {term_str(body)}"
        case Ret(monad, arg):
            kw = "return" if monad == "P" else "hreturn"
            return f"{kw} {_atom_str(arg)}"
        case Prim(name, args):
            if args:
                return f"prim.{name}[{', '.join(prim_arg_str(a) for a in args)}]"
            return f"prim.{name}"
    raise TypeError(f"unknown term node {t!r}")


def _is_atom(t: Term) -> bool:
    return isinstance(t, (Var, UnitLit, Pair, Prim)) or (
        isinstance(t, RealLit) and t.value >= 0
    )


def _atom_str(t: Term) -> str:
    s = term_str(t)
    return s if _is_atom(t) else f"({s})"


def _app_str(t: Term) -> str:
    if isinstance(t, App):
        return term_str(t)
    return _atom_str(t)


def print_def(d: Def) -> str:
    head = f"def {d.name}"
    if d.declared is not None:
        head += f" : {ty_str(d.declared)}"
    return f"{head} = {term_str(d.term)}"


def print_program(prog: Program) -> str:
    parts = [print_def(d) for d in prog.defs]
    if prog.entry is not None:
        parts.append(term_str(prog.entry))
    return "\n\n".join(parts) + "\n"
