"""Typing and elaboration of the surface language.

All judgments of the surface language live here: superclass closure,
unambiguity, one-way matching, constraint entailment, bidirectional term
typing, class/instance/program typing and environment elaboration. Every
elaborating judgment is implemented twice, as two independent code paths:
one targeting the dictionary-passing intermediate language and one going
directly to the record-based target. Keeping the paths separate makes the
decomposition check in the harness a genuine cross-check.

Typing is type-deterministic; only the elaboration is nondeterministic.
Enumeration order is fixed: local dictionary bindings in environment order
before global instances in declaration order, context constraints resolved
left to right, Cartesian products in that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    ClassDecl, DictBind, InstDecl, SrcConstraint, SrcConstraintScheme,
    SrcExpr, SrcMono, SrcProgram, SrcScheme, TermBind, TyVarBind,
    SAnn, SApp, SArrow, SBool, SFalse, SHole, SLam, SLet, SMeth, STrue,
    STyVar, SVar,
    FdConstraintScheme, FdClassEntry, FdQ, MethodImpl,
    DCon, DVar, IApp, IDApp, IDLam, ILam, ILet, IMethod, ITrue, IFalse,
    ITyApp, ITyLam, IVar, FdExpr, FdType,
    TApp, TFalse, TLam, TLet, TProj, TRecord, TRecordTy, TTrue, TTyApp,
    TTyLam, TVar, TgtExpr, TgtType,
    avoid_name, free_type_vars, subst_type,
)
from . import syntax as S


class SrcTypeError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class Limits:
    max_depth: int = 32
    max_elaborations: int = 256


@dataclass(frozen=True)
class ElabSet:
    """All elaborations of one judgment, in derivation-tree DFS order."""
    ty: SrcMono
    alternatives: tuple
    truncated: bool = False


@dataclass(frozen=True)
class ClassEntry:
    method: str
    superclasses: tuple[str, ...]
    cls: str
    var: str
    scheme: SrcScheme


@dataclass(frozen=True)
class InstEntry:
    con: str
    scheme: SrcConstraintScheme        # forall fv(head). closed ctx => C head
    method: str
    local_env: tuple
    body: SrcExpr
    # Derived data fixed at declaration time (used by both backends):
    ctx_dvars: tuple[str, ...]         # aligned with scheme.context
    meth_binders: tuple[str, ...]
    meth_ctx: tuple[SrcConstraint, ...]
    meth_dvars: tuple[str, ...]
    meth_head: SrcMono                 # method head at the instance type
    body_fd: tuple[FdExpr, ...]        # elaborations of body, fixed prefix
    body_tgt: tuple[TgtExpr, ...]
    truncated: bool = False

    @property
    def cls(self) -> str:
        return self.scheme.head.cls


ClassEnv = tuple  # of ClassEntry
ProgramCtx = tuple  # of InstEntry


def dict_target_name(dvar: str) -> str:
    # Dictionary variables live in their own namespace; the reserved prefix
    # keeps them from colliding with source term variables in the target.
    return "$d_" + dvar


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------

def lookup_class(GC, name: str) -> ClassEntry:
    for entry in GC:
        if entry.cls == name:
            return entry
    raise SrcTypeError("unknown-class", f"unknown class {name!r}")


def lookup_method(GC, method: str) -> ClassEntry | None:
    for entry in GC:
        if entry.method == method:
            return entry
    return None


def lookup_term(env, name: str) -> SrcScheme:
    for bind in reversed(env):
        if isinstance(bind, TermBind) and bind.name == name:
            return bind.ty
    raise SrcTypeError("unbound", f"unbound variable {name!r}")


def env_tyvars(env) -> set[str]:
    return {b.name for b in env if isinstance(b, TyVarBind)}


def env_dicts(env) -> list[DictBind]:
    return [b for b in env if isinstance(b, DictBind)]


# ---------------------------------------------------------------------------
# Closure, unambiguity, matching
# ---------------------------------------------------------------------------

def closure(GC, qs) -> tuple[SrcConstraint, ...]:
    """Superclass closure, supers first, duplicates kept."""
    out: list[SrcConstraint] = []
    for q in qs:
        entry = lookup_class(GC, q.cls)
        for sup in entry.superclasses:
            out.extend(closure(GC, [SrcConstraint(sup, q.arg)]))
        out.append(q)
    return tuple(out)


def unambig_scheme(s: SrcScheme) -> bool:
    head_fvs = set(free_type_vars(s.head))
    return all(b in head_fvs for b in s.binders)


def unambig_constraint(c: SrcConstraintScheme) -> bool:
    head_fvs = set(free_type_vars(c.head.arg))
    return all(b in head_fvs for b in c.binders)


def match_mono(pattern: SrcMono, vars: set[str], target: SrcMono):
    """One-way first-order matching; None signals failure."""
    subst: dict[str, SrcMono] = {}

    def go(p, t) -> bool:
        match p, t:
            case STyVar(a), _ if a in vars:
                if a in subst:
                    return subst[a] == t
                subst[a] = t
                return True
            case SBool(), SBool():
                return True
            case STyVar(a), STyVar(b):
                return a == b
            case SArrow(p1, p2), SArrow(t1, t2):
                return go(p1, t1) and go(p2, t2)
        return False

    return subst if go(pattern, target) else None


def unify_mono(t1: SrcMono, t2: SrcMono, vars: set[str]):
    """Most general unifier over vars, first-order with occurs check."""
    subst: dict[str, SrcMono] = {}

    def resolve(t):
        while isinstance(t, STyVar) and t.name in subst:
            t = subst[t.name]
        return t

    def occurs(a, t):
        t = resolve(t)
        match t:
            case STyVar(b):
                return a == b
            case SArrow(l, r):
                return occurs(a, l) or occurs(a, r)
        return False

    def go(x, y) -> bool:
        x, y = resolve(x), resolve(y)
        match x, y:
            case STyVar(a), _ if a in vars:
                if x == y:
                    return True
                if occurs(a, y):
                    return False
                subst[a] = y
                return True
            case _, STyVar(b) if b in vars:
                return go(y, x)
            case SBool(), SBool():
                return True
            case STyVar(a), STyVar(b):
                return a == b
            case SArrow(l1, r1), SArrow(l2, r2):
                return go(l1, l2) and go(r1, r2)
        return False

    return subst if go(t1, t2) else None


def _rename_apart(binders, avoid):
    """Deterministically rename binders away from avoid; returns mapping."""
    taken = set(avoid) | set(binders)
    mapping = {}
    for b in binders:
        if b in avoid:
            b2 = avoid_name(b, taken)
            taken.add(b2)
            mapping[b] = b2
    return mapping


# ---------------------------------------------------------------------------
# Type elaboration (both backends)
# ---------------------------------------------------------------------------

def _check_mono_wf(GC, tyvars: set[str], t: SrcMono):
    for a in free_type_vars(t):
        if a not in tyvars:
            raise SrcTypeError("unbound", f"unbound type variable {a!r}")


def elab_mono_fd(GC, tyvars: set[str], t: SrcMono) -> FdType:
    match t:
        case SBool():
            return S.IBool()
        case STyVar(a):
            if a not in tyvars:
                raise SrcTypeError("unbound", f"unbound type variable {a!r}")
            return S.ITyVar(a)
        case SArrow(l, r):
            return S.IArrow(elab_mono_fd(GC, tyvars, l),
                            elab_mono_fd(GC, tyvars, r))
    raise TypeError(t)


def elab_q_fd(GC, tyvars: set[str], q: SrcConstraint) -> FdQ:
    lookup_class(GC, q.cls)
    return FdQ(q.cls, elab_mono_fd(GC, tyvars, q.arg))


def elab_type_fd(GC, env, s: SrcScheme | SrcMono) -> FdType:
    if isinstance(s, SrcMono):
        s = SrcScheme((), (), s)
    tyvars = env_tyvars(env) | set(s.binders)
    ty = elab_mono_fd(GC, tyvars, s.head)
    for q in reversed(s.context):
        ty = S.IQArrow(elab_q_fd(GC, tyvars, q), ty)
    for a in reversed(s.binders):
        ty = S.IForall(a, ty)
    return ty


def elab_mono_tgt(GC, tyvars: set[str], t: SrcMono) -> TgtType:
    match t:
        case SBool():
            return S.TBool()
        case STyVar(a):
            if a not in tyvars:
                raise SrcTypeError("unbound", f"unbound type variable {a!r}")
            return S.TTyVar(a)
        case SArrow(l, r):
            return S.TArrow(elab_mono_tgt(GC, tyvars, l),
                            elab_mono_tgt(GC, tyvars, r))
    raise TypeError(t)


def elab_q_tgt(GC, tyvars: set[str], q: SrcConstraint) -> TgtType:
    """A class constraint becomes the single-field record of its method."""
    entry = lookup_class(GC, q.cls)
    method_ty = elab_type_tgt(GC, (TyVarBind(entry.var),), entry.scheme)
    arg = elab_mono_tgt(GC, tyvars, q.arg)
    return TRecordTy(((entry.method,
                       subst_type(method_ty, {entry.var: arg})),))


def elab_type_tgt(GC, env, s: SrcScheme | SrcMono) -> TgtType:
    if isinstance(s, SrcMono):
        s = SrcScheme((), (), s)
    tyvars = env_tyvars(env) | set(s.binders)
    ty = elab_mono_tgt(GC, tyvars, s.head)
    for q in reversed(s.context):
        ty = S.TArrow(elab_q_tgt(GC, tyvars, q), ty)
    for a in reversed(s.binders):
        ty = S.TForall(a, ty)
    return ty


# ---------------------------------------------------------------------------
# Constraint entailment (both backends)
# ---------------------------------------------------------------------------

def _dedup_alpha(items):
    out = []
    for x in items:
        if not any(S.alpha_eq(x, y) for y in out):
            out.append(x)
    return out


def _instance_matches(P, q: SrcConstraint):
    """Instances whose head matches q, with the matched types per binder."""
    found = []
    for entry in P:
        sc = entry.scheme
        if sc.head.cls != q.cls:
            continue
        renaming = _rename_apart(sc.binders, set(free_type_vars(q.arg)))
        binders = tuple(renaming.get(b, b) for b in sc.binders)
        mono_renaming = {a: STyVar(b) for a, b in renaming.items()}
        head_arg = subst_type(sc.head.arg, mono_renaming)
        sigma = match_mono(head_arg, set(binders), q.arg)
        if sigma is None:
            continue
        # All binders occur in the head (unambiguity), so sigma is total.
        type_args = tuple(sigma[b] for b in binders)
        ctx = tuple(subst_type(subst_type(c, mono_renaming),
                               dict(zip(binders, type_args)))
                    for c in sc.context)
        found.append((entry, type_args, ctx))
    return found


def entail_fd(P, GC, env, q: SrcConstraint, limits: Limits, depth: int = 0):
    """All resolutions of q as first-class dictionaries, DFS order."""
    if depth >= limits.max_depth:
        return [], True
    truncated = False
    out = []
    for bind in env_dicts(env):
        if bind.q == q:
            out.append(DVar(bind.name))
    tyvars = env_tyvars(env) | set(free_type_vars(q.arg))
    for entry, type_args, ctx in _instance_matches(P, q):
        arg_lists, t = _entail_many(entail_fd, P, GC, env, ctx, limits, depth + 1)
        truncated |= t
        fd_types = tuple(elab_mono_fd(GC, tyvars, t_) for t_ in type_args)
        for dicts in arg_lists:
            out.append(DCon(entry.con, fd_types, tuple(dicts)))
    out = _dedup_alpha(out)
    if len(out) > limits.max_elaborations:
        out = out[:limits.max_elaborations]
        truncated = True
    return out, truncated


def entail_tgt(P, GC, env, q: SrcConstraint, limits: Limits, depth: int = 0):
    """All resolutions of q as target record expressions, DFS order."""
    if depth >= limits.max_depth:
        return [], True
    truncated = False
    out = []
    for bind in env_dicts(env):
        if bind.q == q:
            out.append(TVar(dict_target_name(bind.name)))
    tyvars = env_tyvars(env) | set(free_type_vars(q.arg))
    for entry, type_args, ctx in _instance_matches(P, q):
        arg_lists, t = _entail_many(entail_tgt, P, GC, env, ctx, limits, depth + 1)
        truncated |= t
        tgt_types = tuple(elab_mono_tgt(GC, tyvars, t_) for t_ in type_args)
        truncated |= entry.truncated
        for body in entry.body_tgt:
            record = TRecord(((entry.method,
                               _wrap_method_tgt(GC, entry, body)),))
            wrapper = _wrap_instance_tgt(GC, entry, record)
            for args in arg_lists:
                te = wrapper
                for ty in tgt_types:
                    te = TTyApp(te, ty)
                for a in args:
                    te = TApp(te, a)
                out.append(te)
    out = _dedup_alpha(out)
    if len(out) > limits.max_elaborations:
        out = out[:limits.max_elaborations]
        truncated = True
    return out, truncated


def _entail_many(entail, P, GC, env, qs, limits, depth):
    """Resolve a constraint list left to right; Cartesian product."""
    lists = []
    truncated = False
    for q in qs:
        alts, t = entail(P, GC, env, q, limits, depth)
        truncated |= t
        if not alts:
            return [], truncated
        lists.append(alts)
    product = list(itertools.product(*lists)) if lists else [()]
    if len(product) > limits.max_elaborations:
        product = product[:limits.max_elaborations]
        truncated = True
    return product, truncated


def _wrap_method_tgt(GC, entry: InstEntry, body: TgtExpr) -> TgtExpr:
    """Wrap an instance body in the method scheme's own binders/constraints."""
    tyvars = set(entry.scheme.binders) | set(entry.meth_binders)
    te = body
    for dv, q in zip(reversed(entry.meth_dvars), reversed(entry.meth_ctx)):
        te = TLam(dict_target_name(dv), elab_q_tgt(GC, tyvars, q), te)
    for b in reversed(entry.meth_binders):
        te = TTyLam(b, te)
    return te


def _wrap_instance_tgt(GC, entry: InstEntry, record: TgtExpr) -> TgtExpr:
    """Abstract the record over the instance binders and (closed) context."""
    tyvars = set(entry.scheme.binders)
    te = record
    for dv, q in zip(reversed(entry.ctx_dvars), reversed(entry.scheme.context)):
        te = TLam(dict_target_name(dv), elab_q_tgt(GC, tyvars, q), te)
    for b in reversed(entry.scheme.binders):
        te = TTyLam(b, te)
    return te


# ---------------------------------------------------------------------------
# Bidirectional term typing with elaboration to the intermediate language
# ---------------------------------------------------------------------------

def _check_no_method_shadow(GC, name: str):
    if lookup_method(GC, name) is not None:
        raise SrcTypeError(
            "shadow", f"{name!r} is a class method and cannot be rebound")


def _let_dict_vars(name: str, qs) -> tuple[str, ...]:
    return tuple(f"δ{name}{i}" for i in range(1, len(qs) + 1))


def _cap(alts, limits, truncated):
    if len(alts) > limits.max_elaborations:
        return alts[:limits.max_elaborations], True
    return alts, truncated


def infer_fd(P, GC, env, e: SrcExpr, limits: Limits):
    """Returns (type, alternatives, truncated)."""
    match e:
        case STrue():
            return SBool(), [ITrue()], False
        case SFalse():
            return SBool(), [IFalse()], False
        case SApp(f, a):
            fty, falts, t1 = infer_fd(P, GC, env, f, limits)
            if not isinstance(fty, SArrow):
                raise SrcTypeError(
                    "mismatch",
                    f"applied a non-function of type {S.pretty(fty)}")
            aalts, t2 = check_fd(P, GC, env, a, fty.left, limits)
            alts = [IApp(x, y) for x, y in itertools.product(falts, aalts)]
            alts, trunc = _cap(alts, limits, t1 | t2)
            return fty.right, alts, trunc
        case SAnn(inner, ty):
            _check_mono_wf(GC, env_tyvars(env), ty)
            alts, t = check_fd(P, GC, env, inner, ty, limits)
            return ty, alts, t
        case SLet(x, sch, bound, body):
            _check_no_method_shadow(GC, x)
            if not unambig_scheme(sch):
                raise SrcTypeError(
                    "ambiguous",
                    f"ambiguous type scheme for {x!r}: not every bound "
                    f"variable occurs in the head of the type")
            elab_type_fd(GC, env, sch)  # well-formedness
            closed = closure(GC, sch.context)
            dvars = _let_dict_vars(x, closed)
            env1 = (tuple(env)
                    + tuple(TyVarBind(a) for a in sch.binders)
                    + tuple(DictBind(dv, q) for dv, q in zip(dvars, closed)))
            balts, t1 = check_fd(P, GC, env1, bound, sch.head, limits)
            closed_scheme = SrcScheme(sch.binders, closed, sch.head)
            env2 = tuple(env) + (TermBind(x, closed_scheme),)
            bty, alts2, t2 = infer_fd(P, GC, env2, body, limits)
            tyvars1 = env_tyvars(env1)
            bound_ty = elab_type_fd(GC, env, closed_scheme)
            out = []
            for ib, ie2 in itertools.product(balts, alts2):
                wrapped = ib
                for dv, q in zip(reversed(dvars), reversed(closed)):
                    wrapped = IDLam(dv, elab_q_fd(GC, tyvars1, q), wrapped)
                for a in reversed(sch.binders):
                    wrapped = ITyLam(a, wrapped)
                out.append(ILet(x, bound_ty, wrapped, ie2))
            out, trunc = _cap(out, limits, t1 | t2)
            return bty, out, trunc
        case SVar(name) | SMeth(name):
            raise SrcTypeError(
                "not-inferable",
                f"head {name!r} not inferable - annotate its use")
        case SLam():
            raise SrcTypeError(
                "not-inferable", "cannot infer a lambda - annotate it")
        case SHole():
            raise SrcTypeError("not-inferable", "hole outside a context file")
    raise TypeError(e)


def check_fd(P, GC, env, e: SrcExpr, ty: SrcMono, limits: Limits):
    """Returns (alternatives, truncated)."""
    match e:
        case SVar(name):
            sch = _freshen_scheme(lookup_term(env, name),
                                  set(free_type_vars(ty)))
            sigma = match_mono(sch.head, set(sch.binders), ty)
            if sigma is None:
                raise SrcTypeError(
                    "mismatch",
                    f"{name!r} cannot be used at type {S.pretty(ty)}")
            tyvars = env_tyvars(env) | set(free_type_vars(ty))
            type_args = [sigma[b] for b in sch.binders]
            arg_lists, truncated = _entail_many(
                entail_fd, P, GC, env,
                [subst_type(q, sigma) for q in sch.context], limits, 0)
            if not arg_lists:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot satisfy the constraints of {name!r} at "
                    f"{S.pretty(ty)}")
            out = []
            for dicts in arg_lists:
                ie: FdExpr = IVar(name)
                for t in type_args:
                    ie = ITyApp(ie, elab_mono_fd(GC, tyvars, t))
                for d in dicts:
                    ie = IDApp(ie, d)
                out.append(ie)
            return _cap(out, limits, truncated)
        case SMeth(name):
            entry = lookup_method(GC, name)
            full = SrcScheme((entry.var,) + entry.scheme.binders,
                             entry.scheme.context, entry.scheme.head)
            if not unambig_scheme(full):
                raise SrcTypeError(
                    "ambiguous", f"ambiguous method scheme for {name!r}")
            full = _freshen_scheme(full, set(free_type_vars(ty)))
            class_var, meth_binders = full.binders[0], full.binders[1:]
            sigma = match_mono(full.head, set(full.binders), ty)
            if sigma is None:
                raise SrcTypeError(
                    "mismatch",
                    f"method {name!r} cannot be used at type {S.pretty(ty)}")
            tyvars = env_tyvars(env) | set(free_type_vars(ty))
            class_q = SrcConstraint(entry.cls, sigma[class_var])
            d_alts, t0 = entail_fd(P, GC, env, class_q, limits, 0)
            if not d_alts:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot resolve {S.pretty(class_q)} for method {name!r}")
            arg_lists, t1 = _entail_many(
                entail_fd, P, GC, env,
                [subst_type(q, sigma) for q in full.context], limits, 0)
            if not arg_lists:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot satisfy the constraints of method {name!r}")
            out = []
            for d in d_alts:
                for dicts in arg_lists:
                    ie: FdExpr = IMethod(d, name)
                    for b in meth_binders:
                        ie = ITyApp(ie, elab_mono_fd(GC, tyvars, sigma[b]))
                    for dd in dicts:
                        ie = IDApp(ie, dd)
                    out.append(ie)
            return _cap(out, limits, t0 | t1)
        case SLam(x, body):
            _check_no_method_shadow(GC, x)
            if not isinstance(ty, SArrow):
                raise SrcTypeError(
                    "mismatch",
                    f"lambda checked against non-function type {S.pretty(ty)}")
            env1 = tuple(env) + (TermBind(x, SrcScheme((), (), ty.left)),)
            alts, truncated = check_fd(P, GC, env1, body, ty.right, limits)
            arg_ty = elab_mono_fd(GC, env_tyvars(env), ty.left)
            return [ILam(x, arg_ty, b) for b in alts], truncated
        case _:
            ity, alts, truncated = infer_fd(P, GC, env, e, limits)
            if ity != ty:
                raise SrcTypeError(
                    "mismatch",
                    f"inferred {S.pretty(ity)} but expected {S.pretty(ty)}")
            return alts, truncated


def _freshen_scheme(sch: SrcScheme, avoid: set[str]) -> SrcScheme:
    renaming = _rename_apart(sch.binders, avoid)
    if not renaming:
        return sch
    mono_renaming = {a: STyVar(b) for a, b in renaming.items()}
    return SrcScheme(tuple(renaming.get(b, b) for b in sch.binders),
                     tuple(subst_type(q, mono_renaming) for q in sch.context),
                     subst_type(sch.head, mono_renaming))


# ---------------------------------------------------------------------------
# Bidirectional term typing with direct elaboration to the target
# ---------------------------------------------------------------------------

def infer_tgt(P, GC, env, e: SrcExpr, limits: Limits):
    match e:
        case STrue():
            return SBool(), [TTrue()], False
        case SFalse():
            return SBool(), [TFalse()], False
        case SApp(f, a):
            fty, falts, t1 = infer_tgt(P, GC, env, f, limits)
            if not isinstance(fty, SArrow):
                raise SrcTypeError(
                    "mismatch",
                    f"applied a non-function of type {S.pretty(fty)}")
            aalts, t2 = check_tgt(P, GC, env, a, fty.left, limits)
            alts = [TApp(x, y) for x, y in itertools.product(falts, aalts)]
            alts, trunc = _cap(alts, limits, t1 | t2)
            return fty.right, alts, trunc
        case SAnn(inner, ty):
            _check_mono_wf(GC, env_tyvars(env), ty)
            alts, t = check_tgt(P, GC, env, inner, ty, limits)
            return ty, alts, t
        case SLet(x, sch, bound, body):
            _check_no_method_shadow(GC, x)
            if not unambig_scheme(sch):
                raise SrcTypeError(
                    "ambiguous",
                    f"ambiguous type scheme for {x!r}: not every bound "
                    f"variable occurs in the head of the type")
            elab_type_tgt(GC, env, sch)
            closed = closure(GC, sch.context)
            dvars = _let_dict_vars(x, closed)
            env1 = (tuple(env)
                    + tuple(TyVarBind(a) for a in sch.binders)
                    + tuple(DictBind(dv, q) for dv, q in zip(dvars, closed)))
            balts, t1 = check_tgt(P, GC, env1, bound, sch.head, limits)
            closed_scheme = SrcScheme(sch.binders, closed, sch.head)
            env2 = tuple(env) + (TermBind(x, closed_scheme),)
            bty, alts2, t2 = infer_tgt(P, GC, env2, body, limits)
            tyvars1 = env_tyvars(env1)
            bound_ty = elab_type_tgt(GC, env, closed_scheme)
            out = []
            for tb, te2 in itertools.product(balts, alts2):
                wrapped = tb
                for dv, q in zip(reversed(dvars), reversed(closed)):
                    wrapped = TLam(dict_target_name(dv),
                                   elab_q_tgt(GC, tyvars1, q), wrapped)
                for a in reversed(sch.binders):
                    wrapped = TTyLam(a, wrapped)
                out.append(TLet(x, bound_ty, wrapped, te2))
            out, trunc = _cap(out, limits, t1 | t2)
            return bty, out, trunc
        case SVar(name) | SMeth(name):
            raise SrcTypeError(
                "not-inferable",
                f"head {name!r} not inferable - annotate its use")
        case SLam():
            raise SrcTypeError(
                "not-inferable", "cannot infer a lambda - annotate it")
        case SHole():
            raise SrcTypeError("not-inferable", "hole outside a context file")
    raise TypeError(e)


def check_tgt(P, GC, env, e: SrcExpr, ty: SrcMono, limits: Limits):
    match e:
        case SVar(name):
            sch = _freshen_scheme(lookup_term(env, name),
                                  set(free_type_vars(ty)))
            sigma = match_mono(sch.head, set(sch.binders), ty)
            if sigma is None:
                raise SrcTypeError(
                    "mismatch",
                    f"{name!r} cannot be used at type {S.pretty(ty)}")
            tyvars = env_tyvars(env) | set(free_type_vars(ty))
            arg_lists, truncated = _entail_many(
                entail_tgt, P, GC, env,
                [subst_type(q, sigma) for q in sch.context], limits, 0)
            if not arg_lists:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot satisfy the constraints of {name!r} at "
                    f"{S.pretty(ty)}")
            out = []
            for args in arg_lists:
                te: TgtExpr = TVar(name)
                for b in sch.binders:
                    te = TTyApp(te, elab_mono_tgt(GC, tyvars, sigma[b]))
                for a in args:
                    te = TApp(te, a)
                out.append(te)
            return _cap(out, limits, truncated)
        case SMeth(name):
            entry = lookup_method(GC, name)
            full = SrcScheme((entry.var,) + entry.scheme.binders,
                             entry.scheme.context, entry.scheme.head)
            if not unambig_scheme(full):
                raise SrcTypeError(
                    "ambiguous", f"ambiguous method scheme for {name!r}")
            full = _freshen_scheme(full, set(free_type_vars(ty)))
            class_var, meth_binders = full.binders[0], full.binders[1:]
            sigma = match_mono(full.head, set(full.binders), ty)
            if sigma is None:
                raise SrcTypeError(
                    "mismatch",
                    f"method {name!r} cannot be used at type {S.pretty(ty)}")
            tyvars = env_tyvars(env) | set(free_type_vars(ty))
            class_q = SrcConstraint(entry.cls, sigma[class_var])
            d_alts, t0 = entail_tgt(P, GC, env, class_q, limits, 0)
            if not d_alts:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot resolve {S.pretty(class_q)} for method {name!r}")
            arg_lists, t1 = _entail_many(
                entail_tgt, P, GC, env,
                [subst_type(q, sigma) for q in full.context], limits, 0)
            if not arg_lists:
                raise SrcTypeError(
                    "unsatisfiable",
                    f"cannot satisfy the constraints of method {name!r}")
            out = []
            for d in d_alts:
                for args in arg_lists:
                    te: TgtExpr = TProj(d, name)
                    for b in meth_binders:
                        te = TTyApp(te, elab_mono_tgt(GC, tyvars, sigma[b]))
                    for a in args:
                        te = TApp(te, a)
                    out.append(te)
            return _cap(out, limits, t0 | t1)
        case SLam(x, body):
            _check_no_method_shadow(GC, x)
            if not isinstance(ty, SArrow):
                raise SrcTypeError(
                    "mismatch",
                    f"lambda checked against non-function type {S.pretty(ty)}")
            env1 = tuple(env) + (TermBind(x, SrcScheme((), (), ty.left)),)
            alts, truncated = check_tgt(P, GC, env1, body, ty.right, limits)
            arg_ty = elab_mono_tgt(GC, env_tyvars(env), ty.left)
            return [TLam(x, arg_ty, b) for b in alts], truncated
        case _:
            ity, alts, truncated = infer_tgt(P, GC, env, e, limits)
            if ity != ty:
                raise SrcTypeError(
                    "mismatch",
                    f"inferred {S.pretty(ity)} but expected {S.pretty(ty)}")
            return alts, truncated


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

def resolve_names(GC, e: SrcExpr, bound: frozenset = frozenset()) -> SrcExpr:
    """Reclassify variables naming declared methods as method references."""
    match e:
        case SVar(name):
            if name not in bound and lookup_method(GC, name) is not None:
                return SMeth(name)
            return e
        case SLam(x, body):
            return SLam(x, resolve_names(GC, body, bound | {x}))
        case SLet(x, sch, b1, b2):
            return SLet(x, sch, resolve_names(GC, b1, bound),
                        resolve_names(GC, b2, bound | {x}))
        case SApp(f, a):
            return SApp(resolve_names(GC, f, bound),
                        resolve_names(GC, a, bound))
        case SAnn(inner, ty):
            return SAnn(resolve_names(GC, inner, bound), ty)
        case _:
            return e


def typecheck_class(GC, d: ClassDecl) -> ClassEntry:
    if any(entry.cls == d.name for entry in GC):
        raise SrcTypeError("duplicate", f"duplicate class {d.name!r}")
    if lookup_method(GC, d.method) is not None:
        raise SrcTypeError("duplicate", f"duplicate method {d.method!r}")
    for sup in d.superclasses:
        lookup_class(GC, sup)
    if d.var in d.method_scheme.binders:
        raise SrcTypeError(
            "duplicate", f"method scheme rebinds the class variable {d.var!r}")
    # Well-scopedness of the method type under the class variable.
    elab_type_fd(GC, (TyVarBind(d.var),), d.method_scheme)
    head_fvs = set(free_type_vars(d.method_scheme.head))
    missing = ({d.var} | set(d.method_scheme.binders)) - head_fvs
    if missing:
        raise SrcTypeError(
            "ambiguous",
            f"ambiguous method type for {d.method!r}: "
            f"{', '.join(sorted(missing))} not in the head of the type")
    return ClassEntry(d.method, d.superclasses, d.name, d.var, d.method_scheme)


def typecheck_instance(P, GC, d: InstDecl, limits: Limits) -> InstEntry:
    cls = lookup_class(GC, d.cls)
    if d.method != cls.method:
        raise SrcTypeError(
            "unknown-method",
            f"class {d.cls!r} declares method {cls.method!r}, "
            f"instance defines {d.method!r}")
    binders = tuple(free_type_vars(d.head))
    tyvar_env = tuple(TyVarBind(b) for b in binders)
    for q in d.context:
        elab_q_fd(GC, set(binders), q)  # well-scoped, class declared
    closed = closure(GC, d.context)
    con = f"D{len(P) + 1}_{d.cls}"
    head_q = SrcConstraint(d.cls, d.head)
    scheme = SrcConstraintScheme(binders, closed, head_q)
    if not unambig_constraint(scheme):
        raise SrcTypeError(
            "ambiguous", f"ambiguous instance context for {con!r}")
    # Non-overlap with every earlier instance of the same class.
    for other in P:
        if other.cls != d.cls:
            continue
        renaming = _rename_apart(other.scheme.binders, set(binders))
        other_head = subst_type(other.scheme.head.arg,
                                {a: STyVar(b) for a, b in renaming.items()})
        vars = set(binders) | {renaming.get(b, b)
                               for b in other.scheme.binders}
        if unify_mono(d.head, other_head, vars) is not None:
            raise SrcTypeError(
                "overlap",
                f"overlapping instances for class {d.cls!r}: "
                f"{S.pretty(d.head)} overlaps {S.pretty(other.scheme.head.arg)}")
    ctx_dvars = tuple(f"δ{con}_{i}" for i in range(1, len(closed) + 1))
    local_env = tyvar_env + tuple(
        DictBind(dv, q) for dv, q in zip(ctx_dvars, closed))
    # Method scheme instantiated at the instance type; its own binders are
    # renamed apart from the instance binders.
    meth_sch = _freshen_scheme(
        SrcScheme(cls.scheme.binders, cls.scheme.context, cls.scheme.head),
        set(binders) | {cls.var})
    inst = {cls.var: d.head}
    meth_head = subst_type(meth_sch.head, inst)
    meth_ctx = tuple(subst_type(q, inst) for q in meth_sch.context)
    meth_dvars = tuple(f"δ{con}_m{i}"
                       for i in range(1, len(meth_ctx) + 1))
    local_env = (local_env
                 + tuple(TyVarBind(b) for b in meth_sch.binders)
                 + tuple(DictBind(dv, q)
                         for dv, q in zip(meth_dvars, meth_ctx)))
    # Superclass constraints of the class must hold at the instance type.
    for sup in cls.superclasses:
        alts, _ = entail_fd(P, GC, local_env,
                            SrcConstraint(sup, d.head), limits)
        if not alts:
            raise SrcTypeError(
                "unsatisfiable",
                f"superclass {sup!r} of {d.cls!r} is not derivable at "
                f"{S.pretty(d.head)}")
    body = resolve_names(GC, d.body)
    body_fd, t1 = check_fd(P, GC, local_env, body, meth_head, limits)
    body_tgt, t2 = check_tgt(P, GC, local_env, body, meth_head, limits)
    if not body_fd or not body_tgt:
        raise SrcTypeError(
            "unsatisfiable", f"instance body for {con!r} has no elaboration")
    return InstEntry(con=con, scheme=scheme, method=d.method,
                     local_env=local_env, body=body,
                     ctx_dvars=ctx_dvars, meth_binders=meth_sch.binders,
                     meth_ctx=meth_ctx, meth_dvars=meth_dvars,
                     meth_head=meth_head,
                     body_fd=tuple(body_fd), body_tgt=tuple(body_tgt),
                     truncated=t1 | t2)


# ---------------------------------------------------------------------------
# Environment elaboration
# ---------------------------------------------------------------------------

def elab_class_env(GC) -> tuple[FdClassEntry, ...]:
    return tuple(
        FdClassEntry(entry.method, entry.cls, entry.var,
                     elab_type_fd(GC, (TyVarBind(entry.var),), entry.scheme))
        for entry in GC)


def elab_typing_env(GC, env) -> tuple:
    out = []
    for bind in env:
        if isinstance(bind, TermBind):
            out.append(TermBind(bind.name, elab_type_fd(GC, env, bind.ty)))
        elif isinstance(bind, TyVarBind):
            out.append(bind)
        else:
            out.append(DictBind(bind.name,
                                elab_q_fd(GC, env_tyvars(env), bind.q)))
    return tuple(out)


def _wrap_impl_fd(GC, entry: InstEntry, body: FdExpr) -> FdExpr:
    tyvars = set(entry.scheme.binders) | set(entry.meth_binders)
    ie = body
    for dv, q in zip(reversed(entry.meth_dvars), reversed(entry.meth_ctx)):
        ie = IDLam(dv, elab_q_fd(GC, tyvars, q), ie)
    for b in reversed(entry.meth_binders):
        ie = ITyLam(b, ie)
    inst_tyvars = set(entry.scheme.binders)
    for dv, q in zip(reversed(entry.ctx_dvars), reversed(entry.scheme.context)):
        ie = IDLam(dv, elab_q_fd(GC, inst_tyvars, q), ie)
    for b in reversed(entry.scheme.binders):
        ie = ITyLam(b, ie)
    return ie


def elab_constraint_scheme_fd(GC, sc: SrcConstraintScheme) -> FdConstraintScheme:
    tyvars = set(sc.binders)
    return FdConstraintScheme(
        sc.binders,
        tuple(elab_q_fd(GC, tyvars, q) for q in sc.context),
        elab_q_fd(GC, tyvars, sc.head))


def elab_env(P, GC, env, limits: Limits):
    """All method-environment variants plus the deterministic class and
    typing environments. Variants differ only in instance-body choices."""
    TC = elab_class_env(GC)
    TT = elab_typing_env(GC, env)
    per_entry = []
    truncated = False
    for entry in P:
        truncated |= entry.truncated
        impls = [MethodImpl(entry.con,
                            elab_constraint_scheme_fd(GC, entry.scheme),
                            entry.method,
                            _wrap_impl_fd(GC, entry, body))
                 for body in entry.body_fd]
        per_entry.append(impls)
    variants = [tuple(combo) for combo in itertools.product(*per_entry)] \
        if per_entry else [()]
    if len(variants) > limits.max_elaborations:
        variants = variants[:limits.max_elaborations]
        truncated = True
    return variants, TC, TT, truncated


def elab_env_tgt(P, GC, env) -> tuple:
    """Deterministic target environment translation."""
    out = []
    for bind in env:
        if isinstance(bind, TermBind):
            out.append(TermBind(bind.name, elab_type_tgt(GC, env, bind.ty)))
        elif isinstance(bind, TyVarBind):
            out.append(bind)
        else:
            out.append(TermBind(dict_target_name(bind.name),
                                elab_q_tgt(GC, env_tyvars(env), bind.q)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Whole programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProgramResult:
    main_type: SrcMono
    GC: tuple
    P: tuple
    # Composed pipeline: (method environment variant, main elaboration).
    fd_elabs: tuple
    fd_class_env: tuple
    fd_truncated: bool
    # Direct pipeline.
    tgt_elabs: tuple
    tgt_truncated: bool


def typecheck_program(p: SrcProgram, limits: Limits = Limits()) -> ProgramResult:
    GC: tuple = ()
    P: tuple = ()
    for d in p.decls:
        if isinstance(d, ClassDecl):
            GC = GC + (typecheck_class(GC, d),)
        else:
            P = P + (typecheck_instance(P, GC, d, limits),)
    main = resolve_names(GC, p.main)
    fd_ty, fd_main, t_fd = infer_fd(P, GC, (), main, limits)
    tgt_ty, tgt_main, t_tgt = infer_tgt(P, GC, (), main, limits)
    if fd_ty != tgt_ty:
        raise SrcTypeError(
            "mismatch",
            "the two elaboration pipelines disagree on the program type: "
            f"{S.pretty(fd_ty)} vs {S.pretty(tgt_ty)}")
    sigmas, TC, _, t_env = elab_env(P, GC, (), limits)
    fd_elabs = tuple((sigma, ie)
                     for sigma in sigmas for ie in fd_main)
    truncated = t_fd | t_env
    if len(fd_elabs) > limits.max_elaborations:
        fd_elabs = fd_elabs[:limits.max_elaborations]
        truncated = True
    return ProgramResult(
        main_type=fd_ty, GC=GC, P=P,
        fd_elabs=fd_elabs, fd_class_env=TC, fd_truncated=truncated,
        tgt_elabs=tuple(tgt_main), tgt_truncated=t_tgt)
