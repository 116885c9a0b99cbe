"""The intermediate language: System F with first-class dictionaries.

Typechecking doubles as elaboration into the record-based target: every
typing rule emits the corresponding target term, so one traversal yields
both the type and the translation. Dictionary constructors are typed
against the strict prefix of the method environment (an instance may only
use instances declared before it), while evaluation of a method projection
uses the full environment.

Evaluation is substitution-based call-by-name small-step, metered by fuel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    DCon, DVar, DictBind, FdClassEntry, FdDict, FdExpr, FdQ, FdType,
    IApp, IArrow, IBool, IDApp, IDLam, IFalse, IForall, ILam, ILet,
    IMethod, IQArrow, ITrue, ITyApp, ITyLam, ITyVar, IVar,
    TApp, TArrow, TBool, TForall, TLam, TLet, TProj, TRecord, TRecordTy,
    TTrue, TFalse, TTyApp, TTyLam, TTyVar, TVar, TgtExpr, TgtType,
    TermBind, TyVarBind,
    alpha_eq, subst, subst_fd_dvar, subst_fd_var, subst_type,
)
from . import syntax as S


# Error kinds
UNBOUND_VAR = "UnboundVar"
UNBOUND_TYVAR = "UnboundTyVar"
UNBOUND_DICT = "UnboundDict"
UNKNOWN_CONSTRUCTOR = "UnknownConstructor"
UNKNOWN_METHOD = "UnknownMethod"
MISMATCH = "Mismatch"
ARITY_MISMATCH = "ArityMismatch"
OVERLAP = "Overlap"
AMBIGUITY = "Ambiguity"
PREFIX_VIOLATION = "PrefixViolation"
STUCK = "Stuck"


@dataclass
class FdTypeError(Exception):
    kind: str
    detail: str
    location: tuple = ()

    def __str__(self):
        where = "/".join(map(str, self.location))
        return f"{self.kind}: {self.detail}" + (f" (at {where})" if where else "")


class FuelExhausted(Exception):
    pass


def dict_target_name(dvar: str) -> str:
    return "$d_" + dvar


# ---------------------------------------------------------------------------
# Types: well-formedness and elaboration to target types
# ---------------------------------------------------------------------------

def _tyvars_of(env) -> set[str]:
    return {b.name for b in env if isinstance(b, TyVarBind)}


def check_fd_type_wf(TC, tyvars: set[str], t: FdType):
    match t:
        case IBool():
            pass
        case ITyVar(a):
            if a not in tyvars:
                raise FdTypeError(UNBOUND_TYVAR, f"unbound type variable {a!r}")
        case IArrow(l, r):
            check_fd_type_wf(TC, tyvars, l)
            check_fd_type_wf(TC, tyvars, r)
        case IQArrow(q, r):
            check_fd_q_wf(TC, tyvars, q)
            check_fd_type_wf(TC, tyvars, r)
        case IForall(a, body):
            check_fd_type_wf(TC, tyvars | {a}, body)
        case _:
            raise TypeError(t)


def lookup_class_by_name(TC, cls: str) -> FdClassEntry:
    for entry in TC:
        if entry.cls == cls:
            return entry
    raise FdTypeError(UNKNOWN_METHOD, f"unknown class {cls!r}")


def lookup_class_by_method(TC, method: str) -> FdClassEntry:
    for entry in TC:
        if entry.method == method:
            return entry
    raise FdTypeError(UNKNOWN_METHOD, f"unknown method {method!r}")


def check_fd_q_wf(TC, tyvars: set[str], q: FdQ):
    lookup_class_by_name(TC, q.cls)
    check_fd_type_wf(TC, tyvars, q.arg)


def elab_fd_type(TC, t: FdType) -> TgtType:
    match t:
        case IBool():
            return TBool()
        case ITyVar(a):
            return TTyVar(a)
        case IArrow(l, r):
            return TArrow(elab_fd_type(TC, l), elab_fd_type(TC, r))
        case IQArrow(q, r):
            return TArrow(elab_fd_q(TC, q), elab_fd_type(TC, r))
        case IForall(a, body):
            return TForall(a, elab_fd_type(TC, body))
    raise TypeError(t)


def elab_fd_q(TC, q: FdQ) -> TgtType:
    """A dictionary type becomes the single-field record of its method."""
    entry = lookup_class_by_name(TC, q.cls)
    method_tt = elab_fd_type(TC, entry.method_type)
    return TRecordTy(((entry.method,
                       subst_type(method_tt, {entry.var: elab_fd_type(TC, q.arg)})),))


def elab_fd_env(TC, TT) -> tuple:
    out = []
    for bind in TT:
        if isinstance(bind, TermBind):
            out.append(TermBind(bind.name, elab_fd_type(TC, bind.ty)))
        elif isinstance(bind, TyVarBind):
            out.append(bind)
        else:
            out.append(TermBind(dict_target_name(bind.name),
                                elab_fd_q(TC, bind.q)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Head unification (for the non-overlap check)
# ---------------------------------------------------------------------------

def unify_fd_types(t1: FdType, t2: FdType, vars: set[str]):
    """First-order MGU over vars with occurs check; None if not unifiable."""
    out: dict[str, FdType] = {}

    def resolve(t):
        while isinstance(t, ITyVar) and t.name in out:
            t = out[t.name]
        return t

    def occurs(a, t):
        t = resolve(t)
        match t:
            case ITyVar(b):
                return a == b
            case IArrow(l, r):
                return occurs(a, l) or occurs(a, r)
        return False

    def go(x, y) -> bool:
        x, y = resolve(x), resolve(y)
        match x, y:
            case ITyVar(a), _ if a in vars:
                if x == y:
                    return True
                if occurs(a, y):
                    return False
                out[a] = y
                return True
            case _, ITyVar(b) if b in vars:
                return go(y, x)
            case IBool(), IBool():
                return True
            case ITyVar(a), ITyVar(b):
                return a == b
            case IArrow(l1, r1), IArrow(l2, r2):
                return go(l1, l2) and go(r1, r2)
        return False

    return out if go(t1, t2) else None


def unify_heads(q1: FdQ, q2: FdQ, vars: set[str]):
    """Unify two constraint heads; the callers rename binders apart first."""
    if q1.cls != q2.cls:
        return None
    return unify_fd_types(q1.arg, q2.arg, vars)


def _rename_apart(binders, avoid):
    taken = set(avoid) | set(binders)
    mapping = {}
    for b in binders:
        if b in avoid:
            b2 = S.avoid_name(b, taken)
            taken.add(b2)
            mapping[b] = ITyVar(b2)
    return mapping


# ---------------------------------------------------------------------------
# Typechecking with simultaneous target elaboration
# ---------------------------------------------------------------------------

class FdChecker:
    """Typechecker for one fixed method environment.

    Constructor implementations are re-checked against the strict prefix of
    the environment at first use; results are memoized per constructor.
    """

    def __init__(self, sigma, TC):
        self.sigma = tuple(sigma)
        self.TC = tuple(TC)
        self._impl_memo: dict[str, TgtExpr] = {}

    # -- expressions --------------------------------------------------------

    def check_expr(self, env, e: FdExpr) -> tuple[FdType, TgtExpr]:
        match e:
            case ITrue():
                return IBool(), TTrue()
            case IFalse():
                return IBool(), TFalse()
            case IVar(x):
                for bind in reversed(env):
                    if isinstance(bind, TermBind) and bind.name == x:
                        return bind.ty, TVar(x)
                raise FdTypeError(UNBOUND_VAR, f"unbound variable {x!r}")
            case ILam(x, ty, body):
                check_fd_type_wf(self.TC, _tyvars_of(env), ty)
                bty, tb = self.check_expr(env + (TermBind(x, ty),), body)
                return IArrow(ty, bty), TLam(x, elab_fd_type(self.TC, ty), tb)
            case IApp(f, a):
                fty, tf = self.check_expr(env, f)
                if not isinstance(fty, IArrow):
                    raise FdTypeError(
                        MISMATCH, f"applied a non-function of type {S.pretty(fty)}")
                aty, ta = self.check_expr(env, a)
                if not alpha_eq(aty, fty.left):
                    raise FdTypeError(
                        MISMATCH,
                        f"argument has type {S.pretty(aty)}, "
                        f"expected {S.pretty(fty.left)}")
                return fty.right, TApp(tf, ta)
            case IDLam(dv, q, body):
                check_fd_q_wf(self.TC, _tyvars_of(env), q)
                bty, tb = self.check_expr(env + (DictBind(dv, q),), body)
                return IQArrow(q, bty), TLam(dict_target_name(dv),
                                             elab_fd_q(self.TC, q), tb)
            case IDApp(f, d):
                fty, tf = self.check_expr(env, f)
                if not isinstance(fty, IQArrow):
                    raise FdTypeError(
                        MISMATCH,
                        f"dictionary applied to non-constrained type "
                        f"{S.pretty(fty)}")
                dq, td = self.check_dict(env, d)
                if not alpha_eq(dq, fty.q):
                    raise FdTypeError(
                        MISMATCH,
                        f"dictionary has type {S.pretty(dq)}, "
                        f"expected {S.pretty(fty.q)}")
                return fty.result, TApp(tf, td)
            case ITyLam(a, body):
                bty, tb = self.check_expr(env + (TyVarBind(a),), body)
                return IForall(a, bty), TTyLam(a, tb)
            case ITyApp(f, ty):
                fty, tf = self.check_expr(env, f)
                if not isinstance(fty, IForall):
                    raise FdTypeError(
                        MISMATCH,
                        f"type applied to non-polymorphic type {S.pretty(fty)}")
                check_fd_type_wf(self.TC, _tyvars_of(env), ty)
                return (subst_type(fty.body, {fty.var: ty}),
                        TTyApp(tf, elab_fd_type(self.TC, ty)))
            case IMethod(d, m):
                dq, td = self.check_dict(env, d)
                entry = lookup_class_by_method(self.TC, m)
                if entry.cls != dq.cls:
                    raise FdTypeError(
                        UNKNOWN_METHOD,
                        f"dictionary of class {dq.cls!r} has no method {m!r}")
                return (subst_type(entry.method_type, {entry.var: dq.arg}),
                        TProj(td, m))
            case ILet(x, ty, bound, body):
                check_fd_type_wf(self.TC, _tyvars_of(env), ty)
                bty, tb = self.check_expr(env, bound)
                if not alpha_eq(bty, ty):
                    raise FdTypeError(
                        MISMATCH,
                        f"let binding has type {S.pretty(bty)}, "
                        f"annotated {S.pretty(ty)}")
                rty, tb2 = self.check_expr(env + (TermBind(x, ty),), body)
                return rty, TLet(x, elab_fd_type(self.TC, ty), tb, tb2)
        raise TypeError(e)

    # -- dictionaries -------------------------------------------------------

    def check_dict(self, env, d: FdDict) -> tuple[FdQ, TgtExpr]:
        match d:
            case DVar(dv):
                for bind in reversed(env):
                    if isinstance(bind, DictBind) and bind.name == dv:
                        return bind.q, TVar(dict_target_name(dv))
                raise FdTypeError(UNBOUND_DICT,
                                  f"unbound dictionary variable {dv!r}")
            case DCon(name, type_args, dict_args):
                index = None
                for i, entry in enumerate(self.sigma):
                    if entry.con == name:
                        index = i
                        break
                if index is None:
                    raise FdTypeError(UNKNOWN_CONSTRUCTOR,
                                      f"unknown dictionary constructor {name!r}")
                entry = self.sigma[index]
                sc = entry.scheme
                if len(type_args) != len(sc.binders):
                    raise FdTypeError(
                        ARITY_MISMATCH,
                        f"{name!r} expects {len(sc.binders)} type arguments, "
                        f"got {len(type_args)}")
                if len(dict_args) != len(sc.context):
                    raise FdTypeError(
                        ARITY_MISMATCH,
                        f"{name!r} expects {len(sc.context)} dictionary "
                        f"arguments, got {len(dict_args)}")
                tyvars = _tyvars_of(env)
                for ty in type_args:
                    check_fd_type_wf(self.TC, tyvars, ty)
                inst = dict(zip(sc.binders, type_args))
                arg_tes = []
                for want, got in zip(sc.context, dict_args):
                    want_q = subst_type(want, inst)
                    got_q, ta = self.check_dict(env, got)
                    if not alpha_eq(got_q, want_q):
                        raise FdTypeError(
                            MISMATCH,
                            f"dictionary argument of {name!r} has type "
                            f"{S.pretty(got_q)}, expected {S.pretty(want_q)}")
                    arg_tes.append(ta)
                te_impl = self._check_impl(index)
                te = self._wrap_record(entry, te_impl)
                for ty in type_args:
                    te = TTyApp(te, elab_fd_type(self.TC, ty))
                for ta in arg_tes:
                    te = TApp(te, ta)
                return subst_type(sc.head, inst), te
        raise TypeError(d)

    def _check_impl(self, index: int) -> TgtExpr:
        """Check entry's implementation against the strict prefix of the
        method environment; returns (memoized) target elaboration."""
        entry = self.sigma[index]
        if entry.con in self._impl_memo:
            return self._impl_memo[entry.con]
        prefix = FdChecker(self.sigma[:index], self.TC)
        prefix._impl_memo = self._impl_memo  # share across constructors
        try:
            ity, te = prefix.check_expr((), entry.impl)
        except FdTypeError as err:
            if err.kind == UNKNOWN_CONSTRUCTOR:
                raise FdTypeError(
                    PREFIX_VIOLATION,
                    f"implementation of {entry.con!r} references a "
                    f"constructor declared later: {err.detail}") from err
            raise
        expected = expected_impl_type(self.TC, entry)
        if not alpha_eq(ity, expected):
            raise FdTypeError(
                MISMATCH,
                f"implementation of {entry.con!r} has type {S.pretty(ity)}, "
                f"expected {S.pretty(expected)}")
        self._impl_memo[entry.con] = te
        return te

    def _wrap_record(self, entry, te_impl: TgtExpr) -> TgtExpr:
        """Rebuild the implementation's outer binder spine around a record.

        The elaborated implementation has shape /\\c... \\xd... body; the
        dictionary constructor's translation is the same spine closing over
        {method = body} instead. Zero binders yield the bare record.
        """
        sc = entry.scheme
        spine = []
        te = te_impl
        for _ in sc.binders:
            assert isinstance(te, TTyLam)
            spine.append(("ty", te.param, None))
            te = te.body
        for _ in sc.context:
            assert isinstance(te, TLam)
            spine.append(("tm", te.param, te.ty))
            te = te.body
        out: TgtExpr = TRecord(((entry.method, te),))
        for kind, name, ty in reversed(spine):
            out = TLam(name, ty, out) if kind == "tm" else TTyLam(name, out)
        return out


def expected_impl_type(TC, entry) -> FdType:
    """forall binders. context -> method type at the instance head."""
    sc = entry.scheme
    cls = lookup_class_by_name(TC, sc.head.cls)
    ty = subst_type(cls.method_type, {cls.var: sc.head.arg})
    for q in reversed(sc.context):
        ty = IQArrow(q, ty)
    for b in reversed(sc.binders):
        ty = IForall(b, ty)
    return ty


def fd_typecheck_expr(sigma, TC, TT, e: FdExpr) -> tuple[FdType, TgtExpr]:
    return FdChecker(sigma, TC).check_expr(tuple(TT), e)


def fd_typecheck_dict(sigma, TC, TT, d: FdDict) -> tuple[FdQ, TgtExpr]:
    return FdChecker(sigma, TC).check_dict(tuple(TT), d)


# ---------------------------------------------------------------------------
# Environment well-formedness
# ---------------------------------------------------------------------------

def fd_env_wf(sigma, TC, TT):
    """Raises FdTypeError when the environments are ill-formed."""
    methods = [entry.method for entry in TC]
    classes = [entry.cls for entry in TC]
    if len(set(methods)) != len(methods) or len(set(classes)) != len(classes):
        raise FdTypeError(AMBIGUITY, "duplicate class or method name")
    for entry in TC:
        check_fd_type_wf(TC, {entry.var}, entry.method_type)
    cons = [entry.con for entry in sigma]
    if len(set(cons)) != len(cons):
        raise FdTypeError(AMBIGUITY, "duplicate dictionary constructor")
    for i, entry in enumerate(sigma):
        sc = entry.scheme
        cls = lookup_class_by_name(TC, sc.head.cls)
        if cls.method != entry.method:
            raise FdTypeError(
                UNKNOWN_METHOD,
                f"{entry.con!r} implements {entry.method!r} but class "
                f"{sc.head.cls!r} declares {cls.method!r}")
        binder_set = set(sc.binders)
        check_fd_q_wf(TC, binder_set, sc.head)
        for q in sc.context:
            check_fd_q_wf(TC, binder_set, q)
        head_fvs = set(S.free_type_vars(sc.head.arg))
        if not binder_set <= head_fvs:
            raise FdTypeError(
                AMBIGUITY,
                f"constraint scheme of {entry.con!r} is ambiguous")
        # Directional overlap: each head against every earlier head.
        for other in sigma[:i]:
            if other.scheme.head.cls != sc.head.cls:
                continue
            renaming = _rename_apart(other.scheme.binders, binder_set)
            other_head = subst_type(other.scheme.head, renaming)
            vars = binder_set | {t.name for t in renaming.values()} \
                | (set(other.scheme.binders) - set(renaming))
            if unify_heads(sc.head, other_head, vars) is not None:
                raise FdTypeError(
                    OVERLAP,
                    f"overlapping instances {other.con!r} and {entry.con!r} "
                    f"for class {sc.head.cls!r}")
        # Implementation typechecks in the strict prefix.
        FdChecker(sigma, TC)._check_impl(i)
    # Typing environment bindings.
    tyvars: set[str] = set()
    term_names: set[str] = set()
    dict_names: set[str] = set()
    for bind in TT:
        if isinstance(bind, TyVarBind):
            tyvars.add(bind.name)
        elif isinstance(bind, TermBind):
            if bind.name in term_names:
                raise FdTypeError(AMBIGUITY,
                                  f"duplicate term binding {bind.name!r}")
            term_names.add(bind.name)
            check_fd_type_wf(TC, tyvars, bind.ty)
        else:
            if bind.name in dict_names:
                raise FdTypeError(AMBIGUITY,
                                  f"duplicate dictionary binding {bind.name!r}")
            dict_names.add(bind.name)
            check_fd_q_wf(TC, tyvars, bind.q)


# ---------------------------------------------------------------------------
# Evaluation (call-by-name, substitution-based, small-step)
# ---------------------------------------------------------------------------

def is_fd_value(e: FdExpr) -> bool:
    return isinstance(e, (ITrue, IFalse, ILam, IDLam, ITyLam))


def fd_step(sigma, e: FdExpr):
    """One leftmost call-by-name step, or None when e is a value."""
    match e:
        case IApp(ILam(x, _, body), a):
            return subst_fd_var(body, x, a)
        case IApp(f, a):
            f2 = fd_step(sigma, f)
            if f2 is None:
                raise FdTypeError(STUCK, f"stuck application {S.pretty(e)}")
            return IApp(f2, a)
        case ITyApp(ITyLam(a, body), ty):
            return subst_type(body, {a: ty})
        case ITyApp(f, ty):
            f2 = fd_step(sigma, f)
            if f2 is None:
                raise FdTypeError(STUCK, f"stuck type application {S.pretty(e)}")
            return ITyApp(f2, ty)
        case IDApp(IDLam(dv, _, body), d):
            return subst_fd_dvar(body, dv, d)
        case IDApp(f, d):
            f2 = fd_step(sigma, f)
            if f2 is None:
                raise FdTypeError(STUCK,
                                  f"stuck dictionary application {S.pretty(e)}")
            return IDApp(f2, d)
        case IMethod(DCon(name, type_args, dict_args), _m):
            # Method lookup uses the full environment, unlike constructor
            # typing which sees only the prefix.
            for entry in sigma:
                if entry.con == name:
                    out = entry.impl
                    for ty in type_args:
                        out = ITyApp(out, ty)
                    for d in dict_args:
                        out = IDApp(out, d)
                    return out
            raise FdTypeError(UNKNOWN_CONSTRUCTOR,
                              f"unknown constructor {name!r} at runtime")
        case IMethod(DVar(dv), _):
            raise FdTypeError(STUCK, f"free dictionary variable {dv!r}")
        case ILet(x, _, bound, body):
            return subst_fd_var(body, x, bound)
        case _ if is_fd_value(e):
            return None
    raise FdTypeError(STUCK, f"stuck term {S.pretty(e)}")


def fd_eval(sigma, e: FdExpr, fuel: int) -> FdExpr:
    while True:
        if is_fd_value(e):
            return e
        if fuel <= 0:
            raise FuelExhausted()
        e = fd_step(sigma, e)
        fuel -= 1
