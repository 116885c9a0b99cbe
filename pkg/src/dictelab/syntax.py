"""Abstract syntax for the three languages of the elaboration pipeline.

Three term languages live here: the surface language with type classes, the
intermediate language with first-class dictionaries, and the record-based
System F target. All nodes are immutable dataclasses. A single generic
traversal engine (driven by per-class binder metadata) provides free
variables, capture-avoiding substitution and alpha equivalence for every
sort of variable in every language.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional


# ---------------------------------------------------------------------------
# Source language
# ---------------------------------------------------------------------------

class SrcMono:
    """Base class for source monotypes."""


@dataclass(frozen=True)
class SBool(SrcMono):
    pass


@dataclass(frozen=True)
class STyVar(SrcMono):
    name: str


@dataclass(frozen=True)
class SArrow(SrcMono):
    left: SrcMono
    right: SrcMono


@dataclass(frozen=True)
class SrcConstraint:
    cls: str
    arg: SrcMono


@dataclass(frozen=True)
class SrcScheme:
    """Flattened type scheme: forall binders. context => head."""
    binders: tuple[str, ...]
    context: tuple[SrcConstraint, ...]
    head: SrcMono


@dataclass(frozen=True)
class SrcConstraintScheme:
    binders: tuple[str, ...]
    context: tuple[SrcConstraint, ...]
    head: SrcConstraint


class SrcExpr:
    """Base class for source expressions (and expression contexts)."""


@dataclass(frozen=True)
class STrue(SrcExpr):
    pass


@dataclass(frozen=True)
class SFalse(SrcExpr):
    pass


@dataclass(frozen=True)
class SVar(SrcExpr):
    name: str


@dataclass(frozen=True)
class SMeth(SrcExpr):
    # Produced by name resolution; the parser always emits SVar.
    name: str


@dataclass(frozen=True)
class SLam(SrcExpr):
    param: str
    body: SrcExpr


@dataclass(frozen=True)
class SApp(SrcExpr):
    fun: SrcExpr
    arg: SrcExpr


@dataclass(frozen=True)
class SLet(SrcExpr):
    # Non-recursive: name scopes over body only.
    name: str
    scheme: SrcScheme
    bound: SrcExpr
    body: SrcExpr


@dataclass(frozen=True)
class SAnn(SrcExpr):
    expr: SrcExpr
    ty: SrcMono


@dataclass(frozen=True)
class SHole(SrcExpr):
    # Only legal inside expression contexts.
    pass


@dataclass(frozen=True)
class ClassDecl:
    superclasses: tuple[str, ...]
    name: str
    var: str
    method: str
    method_scheme: SrcScheme


@dataclass(frozen=True)
class InstDecl:
    context: tuple[SrcConstraint, ...]
    cls: str
    head: SrcMono
    method: str
    body: SrcExpr


@dataclass(frozen=True)
class SrcProgram:
    decls: tuple[object, ...]
    main: SrcExpr


# ---------------------------------------------------------------------------
# Intermediate language (System F + first-class dictionaries)
# ---------------------------------------------------------------------------

class FdType:
    pass


@dataclass(frozen=True)
class IBool(FdType):
    pass


@dataclass(frozen=True)
class ITyVar(FdType):
    name: str


@dataclass(frozen=True)
class IArrow(FdType):
    left: FdType
    right: FdType


@dataclass(frozen=True)
class FdQ:
    cls: str
    arg: FdType


@dataclass(frozen=True)
class IQArrow(FdType):
    q: FdQ
    result: FdType


@dataclass(frozen=True)
class IForall(FdType):
    var: str
    body: FdType


@dataclass(frozen=True)
class FdConstraintScheme:
    binders: tuple[str, ...]
    context: tuple[FdQ, ...]
    head: FdQ


class FdDict:
    pass


@dataclass(frozen=True)
class DVar(FdDict):
    name: str


@dataclass(frozen=True)
class DCon(FdDict):
    name: str
    type_args: tuple[FdType, ...]
    dict_args: tuple[FdDict, ...]


class FdExpr:
    pass


@dataclass(frozen=True)
class ITrue(FdExpr):
    pass


@dataclass(frozen=True)
class IFalse(FdExpr):
    pass


@dataclass(frozen=True)
class IVar(FdExpr):
    name: str


@dataclass(frozen=True)
class ILam(FdExpr):
    param: str
    ty: FdType
    body: FdExpr


@dataclass(frozen=True)
class IApp(FdExpr):
    fun: FdExpr
    arg: FdExpr


@dataclass(frozen=True)
class IDLam(FdExpr):
    param: str
    q: FdQ
    body: FdExpr


@dataclass(frozen=True)
class IDApp(FdExpr):
    fun: FdExpr
    arg: FdDict


@dataclass(frozen=True)
class ITyLam(FdExpr):
    param: str
    body: FdExpr


@dataclass(frozen=True)
class ITyApp(FdExpr):
    fun: FdExpr
    ty: FdType


@dataclass(frozen=True)
class IMethod(FdExpr):
    dict: FdDict
    method: str


@dataclass(frozen=True)
class ILet(FdExpr):
    name: str
    ty: FdType
    bound: FdExpr
    body: FdExpr


@dataclass(frozen=True)
class MethodImpl:
    """One entry of the global method environment."""
    con: str
    scheme: FdConstraintScheme
    method: str
    impl: FdExpr


# The method environment is an ordered tuple of MethodImpl entries; the order
# matters because constructor implementations may only use earlier entries.
MethodEnv = tuple


@dataclass(frozen=True)
class FdClassEntry:
    method: str
    cls: str
    var: str
    method_type: FdType


# ---------------------------------------------------------------------------
# Target language (System F with records)
# ---------------------------------------------------------------------------

class TgtType:
    pass


@dataclass(frozen=True)
class TBool(TgtType):
    pass


@dataclass(frozen=True)
class TTyVar(TgtType):
    name: str


@dataclass(frozen=True)
class TArrow(TgtType):
    left: TgtType
    right: TgtType


@dataclass(frozen=True)
class TForall(TgtType):
    var: str
    body: TgtType


@dataclass(frozen=True)
class TRecordTy(TgtType):
    # Label -> type, kept sorted by label: records are label-indexed.
    fields: tuple[tuple[str, TgtType], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "fields",
            tuple(sorted(self.fields, key=lambda kv: kv[0])))


class TgtExpr:
    pass


@dataclass(frozen=True)
class TTrue(TgtExpr):
    pass


@dataclass(frozen=True)
class TFalse(TgtExpr):
    pass


@dataclass(frozen=True)
class TVar(TgtExpr):
    name: str


@dataclass(frozen=True)
class TLam(TgtExpr):
    param: str
    ty: TgtType
    body: TgtExpr


@dataclass(frozen=True)
class TApp(TgtExpr):
    fun: TgtExpr
    arg: TgtExpr


@dataclass(frozen=True)
class TTyLam(TgtExpr):
    param: str
    body: TgtExpr


@dataclass(frozen=True)
class TTyApp(TgtExpr):
    fun: TgtExpr
    ty: TgtType


@dataclass(frozen=True)
class TRecord(TgtExpr):
    fields: tuple[tuple[str, TgtExpr], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "fields",
            tuple(sorted(self.fields, key=lambda kv: kv[0])))


@dataclass(frozen=True)
class TProj(TgtExpr):
    expr: TgtExpr
    label: str


@dataclass(frozen=True)
class TLet(TgtExpr):
    name: str
    ty: TgtType
    bound: TgtExpr
    body: TgtExpr


# ---------------------------------------------------------------------------
# Typing-environment building blocks (shared shape across languages)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermBind:
    name: str
    ty: object


@dataclass(frozen=True)
class TyVarBind:
    name: str


@dataclass(frozen=True)
class DictBind:
    name: str
    q: object


# ---------------------------------------------------------------------------
# Fresh names
# ---------------------------------------------------------------------------

class FreshSupply:
    """Deterministic per-namespace name supply.

    Namespaces keep term, type and dictionary variables apart. Two runs that
    perform the same traversal draw the same names.
    """

    def __init__(self):
        self._counters: dict[str, int] = {}

    def fresh(self, namespace: str, base: str = "") -> str:
        n = self._counters.get(namespace, 0) + 1
        self._counters[namespace] = n
        return f"{base or namespace}{n}"


def avoid_name(base: str, taken) -> str:
    """Smallest primed variant of base not in taken."""
    candidate = base
    while candidate in taken:
        candidate += "'"
    return candidate


# ---------------------------------------------------------------------------
# Generic traversal engine
#
# Variable sorts:
#   sa - source type variables      sv - source term variables
#   ic - intermediate type vars     iv - intermediate term vars
#   id - dictionary variables
#   ta - target type variables      tv - target term variables
# ---------------------------------------------------------------------------

_VAR_SORT = {
    STyVar: "sa", SVar: "sv",
    ITyVar: "ic", IVar: "iv", DVar: "id",
    TTyVar: "ta", TVar: "tv",
}

_VAR_CLASS = {
    "sa": STyVar, "sv": SVar,
    "ic": ITyVar, "iv": IVar, "id": DVar,
    "ta": TTyVar, "tv": TVar,
}

# cls -> (binder_field, sort, fields in the binder's scope)
_BINDERS = {
    SLam: ("param", "sv", ("body",)),
    SLet: ("name", "sv", ("body",)),
    SrcScheme: ("binders", "sa", ("context", "head")),
    SrcConstraintScheme: ("binders", "sa", ("context", "head")),
    ILam: ("param", "iv", ("body",)),
    IDLam: ("param", "id", ("body",)),
    ITyLam: ("param", "ic", ("body",)),
    ILet: ("name", "iv", ("body",)),
    IForall: ("var", "ic", ("body",)),
    FdConstraintScheme: ("binders", "ic", ("context", "head")),
    TLam: ("param", "tv", ("body",)),
    TTyLam: ("param", "ta", ("body",)),
    TLet: ("name", "tv", ("body",)),
    TForall: ("var", "ta", ("body",)),
}

_NODE_BASES = (SrcMono, SrcConstraint, SrcScheme, SrcConstraintScheme, SrcExpr,
               FdType, FdQ, FdConstraintScheme, FdDict, FdExpr,
               TgtType, TgtExpr)


def _is_node(x) -> bool:
    return isinstance(x, _NODE_BASES)


def _binder_names(node):
    field, _, _ = _BINDERS[type(node)]
    value = getattr(node, field)
    return (value,) if isinstance(value, str) else tuple(value)


def free_vars(node, sort: str) -> list[str]:
    """Free variables of the given sort, first occurrence order, no dups."""
    out: list[str] = []

    def go(x, bound: frozenset):
        if isinstance(x, tuple):
            for item in x:
                go(item, bound)
            return
        if not _is_node(x):
            return
        cls = type(x)
        if cls in _VAR_SORT and _VAR_SORT[cls] == sort:
            if x.name not in bound and x.name not in out:
                out.append(x.name)
            return
        spec = _BINDERS.get(cls)
        if spec is not None and spec[1] == sort:
            _, _, scope = spec
            inner = bound | set(_binder_names(x))
            for f in fields(x):
                if f.name == spec[0]:
                    continue
                go(getattr(x, f.name), inner if f.name in scope else bound)
            return
        for f in fields(x):
            go(getattr(x, f.name), bound)

    go(node, frozenset())
    return out


def subst(node, sort: str, mapping: dict):
    """Simultaneous capture-avoiding substitution of variables of one sort."""
    if not mapping:
        return node

    def range_fvs(m):
        taken = set()
        for v in m.values():
            taken.update(free_vars(v, sort))
        return taken

    def go(x, m):
        if not m:
            return x
        if isinstance(x, tuple):
            return tuple(go(item, m) for item in x)
        if not _is_node(x):
            return x
        cls = type(x)
        if cls in _VAR_SORT and _VAR_SORT[cls] == sort:
            return m.get(x.name, x)
        spec = _BINDERS.get(cls)
        if spec is not None and spec[1] == sort:
            bfield, _, scope = spec
            names = _binder_names(x)
            inner = {k: v for k, v in m.items() if k not in names}
            # Rename binders that would capture a free variable of the range.
            clash = range_fvs(inner)
            renames = {}
            taken = set(names) | clash | set(inner)
            for sf in scope:
                taken.update(free_vars(getattr(x, sf), sort))
            new_names = []
            for n in names:
                if n in clash:
                    n2 = avoid_name(n, taken)
                    taken.add(n2)
                    renames[n] = _VAR_CLASS[sort](n2)
                    new_names.append(n2)
                else:
                    new_names.append(n)
            kwargs = {}
            for f in fields(x):
                v = getattr(x, f.name)
                if f.name == bfield:
                    kwargs[f.name] = (new_names[0] if isinstance(v, str)
                                      else tuple(new_names))
                elif f.name in scope:
                    if renames:
                        v = go(v, renames)
                    kwargs[f.name] = go(v, inner)
                else:
                    kwargs[f.name] = go(v, m)
            return cls(**kwargs)
        return cls(**{f.name: go(getattr(x, f.name), m) for f in fields(x)})

    return go(node, dict(mapping))


def alpha_eq(a, b) -> bool:
    """Equality up to consistent renaming of bound variables."""
    counter = [0]

    def go(x, y, env1, env2):
        if isinstance(x, tuple) or isinstance(y, tuple):
            if not (isinstance(x, tuple) and isinstance(y, tuple)):
                return False
            return len(x) == len(y) and all(
                go(p, q, env1, env2) for p, q in zip(x, y))
        if not _is_node(x) or not _is_node(y):
            return x == y
        cls = type(x)
        if cls is not type(y):
            return False
        if cls in _VAR_SORT:
            sort = _VAR_SORT[cls]
            i = env1.get((sort, x.name))
            j = env2.get((sort, y.name))
            if i is None and j is None:
                return x.name == y.name
            return i is not None and i == j
        spec = _BINDERS.get(cls)
        if spec is not None:
            bfield, sort, scope = spec
            nx, ny = _binder_names(x), _binder_names(y)
            if len(nx) != len(ny):
                return False
            inner1, inner2 = dict(env1), dict(env2)
            for n1, n2 in zip(nx, ny):
                idx = counter[0]
                counter[0] += 1
                inner1[(sort, n1)] = idx
                inner2[(sort, n2)] = idx
            for f in fields(x):
                if f.name == bfield:
                    continue
                e1 = inner1 if f.name in scope else env1
                e2 = inner2 if f.name in scope else env2
                if not go(getattr(x, f.name), getattr(y, f.name), e1, e2):
                    return False
            return True
        return all(go(getattr(x, f.name), getattr(y, f.name), env1, env2)
                   for f in fields(x))

    return go(a, b, {}, {})


# Friendly wrappers -----------------------------------------------------------

_TYPE_SORT = [(SrcMono, "sa"), (SrcConstraint, "sa"), (SrcScheme, "sa"),
              (SrcConstraintScheme, "sa"),
              (FdType, "ic"), (FdQ, "ic"), (FdConstraintScheme, "ic"),
              (FdDict, "ic"), (FdExpr, "ic"),
              (TgtType, "ta"), (TgtExpr, "ta")]


def _type_sort_of(node) -> str:
    for base, sort in _TYPE_SORT:
        if isinstance(node, base):
            return sort
    raise TypeError(f"no type-variable sort for {type(node).__name__}")


def subst_type(node, mapping: dict):
    """Substitute type variables (of the node's own language) in a type,
    constraint, dictionary or expression."""
    return subst(node, _type_sort_of(node), mapping)


def free_type_vars(node) -> list[str]:
    return free_vars(node, _type_sort_of(node))


def subst_fd_var(e: FdExpr, name: str, by: FdExpr) -> FdExpr:
    return subst(e, "iv", {name: by})


def subst_fd_dvar(e, name: str, by: FdDict):
    return subst(e, "id", {name: by})


def subst_tgt_var(e: TgtExpr, name: str, by: TgtExpr) -> TgtExpr:
    return subst(e, "tv", {name: by})


# ---------------------------------------------------------------------------
# Context plugging
# ---------------------------------------------------------------------------

def count_holes(ctx: SrcExpr) -> int:
    if isinstance(ctx, SHole):
        return 1
    if not _is_node(ctx):
        return 0
    total = 0
    for f in fields(ctx):
        v = getattr(ctx, f.name)
        if isinstance(v, SrcExpr):
            total += count_holes(v)
    return total


def plug(ctx: SrcExpr, e: SrcExpr) -> SrcExpr:
    """Replace the unique hole by e verbatim; plugging may capture."""
    if isinstance(ctx, SHole):
        return e
    kwargs = {}
    for f in fields(ctx):
        v = getattr(ctx, f.name)
        kwargs[f.name] = plug(v, e) if isinstance(v, SrcExpr) else v
    return type(ctx)(**kwargs)


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

def _parens(s: str, need: bool) -> str:
    return f"({s})" if need else s


def pretty_src_mono(t: SrcMono, atom: bool = False) -> str:
    match t:
        case SBool():
            return "Bool"
        case STyVar(name):
            return name
        case SArrow(l, r):
            s = f"{pretty_src_mono(l, atom=True)} -> {pretty_src_mono(r)}"
            return _parens(s, atom)
    raise TypeError(t)


def pretty_src_constraint(q: SrcConstraint) -> str:
    return f"{q.cls} {pretty_src_mono(q.arg, atom=True)}"


def pretty_src_scheme(s: SrcScheme) -> str:
    parts = []
    if s.binders:
        parts.append("forall " + " ".join(s.binders) + ".")
    if s.context:
        ctx = ", ".join(pretty_src_constraint(q) for q in s.context)
        if len(s.context) > 1:
            ctx = f"({ctx})"
        parts.append(ctx + " =>")
    parts.append(pretty_src_mono(s.head))
    return " ".join(parts)


def pretty_src_expr(e: SrcExpr, prec: int = 0) -> str:
    # prec 0 = open, 1 = application operand position
    match e:
        case STrue():
            return "True"
        case SFalse():
            return "False"
        case SVar(name) | SMeth(name):
            return name
        case SHole():
            return "[]"
        case SLam(x, body):
            return _parens(f"\\{x}. {pretty_src_expr(body)}", prec > 0)
        case SLet(x, sch, bound, body):
            s = (f"let {x} : {pretty_src_scheme(sch)} = "
                 f"{pretty_src_expr(bound)} in {pretty_src_expr(body)}")
            return _parens(s, prec > 0)
        case SApp(f, a):
            s = f"{pretty_src_expr(f, 1)} {pretty_src_expr(a, 2)}"
            return _parens(s, prec > 1)
        case SAnn(inner, ty):
            return f"({pretty_src_expr(inner)} :: {pretty_src_mono(ty)})"
    raise TypeError(e)


def pretty_src_program(p: SrcProgram) -> str:
    lines = []
    for d in p.decls:
        if isinstance(d, ClassDecl):
            sup = ""
            if d.superclasses:
                items = ", ".join(f"{s} {d.var}" for s in d.superclasses)
                if len(d.superclasses) > 1:
                    items = f"({items})"
                sup = f"{items} => "
            lines.append(f"class {sup}{d.name} {d.var} where "
                         f"{{ {d.method} : {pretty_src_scheme(d.method_scheme)} }};")
        else:
            ctx = ""
            if d.context:
                items = ", ".join(pretty_src_constraint(q) for q in d.context)
                if len(d.context) > 1:
                    items = f"({items})"
                ctx = f"{items} => "
            lines.append(f"instance {ctx}{d.cls} {pretty_src_mono(d.head, atom=True)} "
                         f"where {{ {d.method} = {pretty_src_expr(d.body)} }};")
    lines.append(pretty_src_expr(p.main))
    return "\n".join(lines)


def pretty_fd_type(t: FdType, atom: bool = False) -> str:
    match t:
        case IBool():
            return "Bool"
        case ITyVar(name):
            return name
        case IArrow(l, r):
            return _parens(f"{pretty_fd_type(l, atom=True)} -> {pretty_fd_type(r)}",
                           atom)
        case IQArrow(q, r):
            return _parens(f"{pretty_fd_q(q)} -> {pretty_fd_type(r)}", atom)
        case IForall(a, body):
            return _parens(f"forall {a}. {pretty_fd_type(body)}", atom)
    raise TypeError(t)


def pretty_fd_q(q: FdQ) -> str:
    return f"[{q.cls} {pretty_fd_type(q.arg, atom=True)}]"


def pretty_fd_dict(d: FdDict) -> str:
    match d:
        case DVar(name):
            return name
        case DCon(name, tys, dicts):
            parts = [name]
            parts += [f"@{pretty_fd_type(t, atom=True)}" for t in tys]
            parts += [f"[{pretty_fd_dict(x)}]" for x in dicts]
            return " ".join(parts)
    raise TypeError(d)


def pretty_fd_expr(e: FdExpr, prec: int = 0) -> str:
    match e:
        case ITrue():
            return "True"
        case IFalse():
            return "False"
        case IVar(name):
            return name
        case ILam(x, ty, body):
            return _parens(f"\\{x} : {pretty_fd_type(ty)}. {pretty_fd_expr(body)}",
                           prec > 0)
        case IDLam(dv, q, body):
            return _parens(f"\\{dv} : {pretty_fd_q(q)}. {pretty_fd_expr(body)}",
                           prec > 0)
        case ITyLam(a, body):
            return _parens(f"/\\{a}. {pretty_fd_expr(body)}", prec > 0)
        case ILet(x, ty, bound, body):
            s = (f"let {x} : {pretty_fd_type(ty)} = {pretty_fd_expr(bound)} "
                 f"in {pretty_fd_expr(body)}")
            return _parens(s, prec > 0)
        case IApp(f, a):
            return _parens(f"{pretty_fd_expr(f, 1)} {pretty_fd_expr(a, 2)}",
                           prec > 1)
        case ITyApp(f, ty):
            return _parens(f"{pretty_fd_expr(f, 1)} @{pretty_fd_type(ty, atom=True)}",
                           prec > 1)
        case IDApp(f, d):
            return _parens(f"{pretty_fd_expr(f, 1)} [{pretty_fd_dict(d)}]",
                           prec > 1)
        case IMethod(d, m):
            return f"[{pretty_fd_dict(d)}].{m}"
    raise TypeError(e)


def pretty_tgt_type(t: TgtType, atom: bool = False) -> str:
    match t:
        case TBool():
            return "Bool"
        case TTyVar(name):
            return name
        case TArrow(l, r):
            return _parens(f"{pretty_tgt_type(l, atom=True)} -> {pretty_tgt_type(r)}",
                           atom)
        case TForall(a, body):
            return _parens(f"forall {a}. {pretty_tgt_type(body)}", atom)
        case TRecordTy(fs):
            inner = ", ".join(f"{l} : {pretty_tgt_type(ty)}" for l, ty in fs)
            return "{" + inner + "}"
    raise TypeError(t)


def pretty_tgt_expr(e: TgtExpr, prec: int = 0) -> str:
    match e:
        case TTrue():
            return "True"
        case TFalse():
            return "False"
        case TVar(name):
            return name
        case TLam(x, ty, body):
            return _parens(f"\\{x} : {pretty_tgt_type(ty)}. {pretty_tgt_expr(body)}",
                           prec > 0)
        case TTyLam(a, body):
            return _parens(f"/\\{a}. {pretty_tgt_expr(body)}", prec > 0)
        case TLet(x, ty, bound, body):
            s = (f"let {x} : {pretty_tgt_type(ty)} = {pretty_tgt_expr(bound)} "
                 f"in {pretty_tgt_expr(body)}")
            return _parens(s, prec > 0)
        case TApp(f, a):
            return _parens(f"{pretty_tgt_expr(f, 1)} {pretty_tgt_expr(a, 2)}",
                           prec > 1)
        case TTyApp(f, ty):
            return _parens(f"{pretty_tgt_expr(f, 1)} @{pretty_tgt_type(ty, atom=True)}",
                           prec > 1)
        case TRecord(fs):
            inner = ", ".join(f"{l} = {pretty_tgt_expr(x)}" for l, x in fs)
            return "{" + inner + "}"
        case TProj(inner, label):
            return f"{pretty_tgt_expr(inner, 2)}.{label}"
    raise TypeError(e)


def pretty(x) -> str:
    """Dispatching pretty printer for any AST node."""
    if isinstance(x, SrcProgram):
        return pretty_src_program(x)
    if isinstance(x, SrcMono):
        return pretty_src_mono(x)
    if isinstance(x, SrcScheme):
        return pretty_src_scheme(x)
    if isinstance(x, SrcConstraint):
        return pretty_src_constraint(x)
    if isinstance(x, SrcExpr):
        return pretty_src_expr(x)
    if isinstance(x, FdType):
        return pretty_fd_type(x)
    if isinstance(x, FdQ):
        return pretty_fd_q(x)
    if isinstance(x, FdDict):
        return pretty_fd_dict(x)
    if isinstance(x, FdExpr):
        return pretty_fd_expr(x)
    if isinstance(x, TgtType):
        return pretty_tgt_type(x)
    if isinstance(x, TgtExpr):
        return pretty_tgt_expr(x)
    raise TypeError(f"cannot pretty-print {type(x).__name__}")
