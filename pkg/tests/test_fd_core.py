from __future__ import annotations

import pytest

from dictelab import syntax as S
from dictelab.fd_core import (
    FdChecker, FdTypeError, FuelExhausted, MISMATCH, OVERLAP,
    PREFIX_VIOLATION, UNBOUND_DICT, UNBOUND_VAR, UNKNOWN_CONSTRUCTOR,
    elab_fd_env, elab_fd_q, elab_fd_type, expected_impl_type, fd_env_wf,
    fd_eval, fd_step, fd_typecheck_dict, fd_typecheck_expr, is_fd_value,
    unify_fd_types, unify_heads,
)
from dictelab.reader import read_fd_dict, read_fd_expr, read_fd_type
from dictelab.syntax import (
    DictBind, FdClassEntry, FdConstraintScheme, FdQ, IArrow, IBool, ITyVar,
    MethodImpl, TermBind,
)

from conftest import POSITIVE, corpus_result

TC_EQ = (FdClassEntry("eq", "Eq", "a",
                      IArrow(ITyVar("a"), IArrow(ITyVar("a"), IBool()))),)

SIGMA_EQ = (
    MethodImpl("D1_Eq",
               FdConstraintScheme((), (), FdQ("Eq", IBool())),
               "eq",
               read_fd_expr("\\x : Bool. \\y : Bool. True")),
    MethodImpl("D2_Eq",
               FdConstraintScheme(
                   ("a",), (FdQ("Eq", ITyVar("a")),),
                   FdQ("Eq", IArrow(ITyVar("a"), ITyVar("a")))),
               "eq",
               read_fd_expr(
                   "/\\a. \\d : [Eq a]. \\f : a -> a. \\g : a -> a. True")),
)


# ---------------------------------------------------------------------------
# Head unification
# ---------------------------------------------------------------------------

def test_unify_heads_variable_against_ground():
    out = unify_heads(FdQ("Eq", ITyVar("b")), FdQ("Eq", IBool()), {"b"})
    assert out == {"b": IBool()}


def test_unify_heads_structural():
    out = unify_heads(FdQ("Eq", IArrow(ITyVar("a"), ITyVar("b"))),
                      FdQ("Eq", IArrow(IBool(), IBool())), {"a", "b"})
    assert out == {"a": IBool(), "b": IBool()}


def test_unify_heads_clash():
    assert unify_heads(FdQ("Eq", IBool()),
                       FdQ("Eq", IArrow(IBool(), IBool())), set()) is None


def test_unify_heads_different_classes():
    assert unify_heads(FdQ("Eq", ITyVar("a")), FdQ("Ord", ITyVar("a")),
                       {"a"}) is None


def test_unify_types_occurs_check():
    assert unify_fd_types(ITyVar("a"), IArrow(ITyVar("a"), IBool()),
                          {"a"}) is None


# ---------------------------------------------------------------------------
# Type translation
# ---------------------------------------------------------------------------

def test_elab_fd_type_replaces_constraints_with_records():
    t = read_fd_type("forall a. [Eq a] -> a -> Bool")
    out = elab_fd_type(TC_EQ, t)
    assert S.pretty(out) == "forall a. {eq : a -> a -> Bool} -> a -> Bool"


def test_elab_fd_q_is_single_method_record():
    out = elab_fd_q(TC_EQ, FdQ("Eq", IBool()))
    assert S.pretty(out) == "{eq : Bool -> Bool -> Bool}"


def test_elab_fd_env_renames_dict_binders():
    tt = (DictBind("d", FdQ("Eq", IBool())),)
    (bind,) = elab_fd_env(TC_EQ, tt)
    assert isinstance(bind, TermBind)
    assert bind.name == "$d_d"
    assert S.pretty(bind.ty) == "{eq : Bool -> Bool -> Bool}"


def test_expected_impl_type_instantiates_head():
    out = expected_impl_type(TC_EQ, SIGMA_EQ[1])
    assert S.pretty(out) == \
        "forall a. [Eq a] -> (a -> a) -> (a -> a) -> Bool"


# ---------------------------------------------------------------------------
# Environment well-formedness
# ---------------------------------------------------------------------------

def test_fixture_environment_is_well_formed():
    fd_env_wf(SIGMA_EQ, TC_EQ, ())


@pytest.mark.parametrize("name", POSITIVE)
def test_corpus_environments_are_well_formed(name):
    r = corpus_result(name)
    for sigma, _ in r.fd_elabs:
        fd_env_wf(sigma, r.fd_class_env, ())


def test_duplicate_ground_heads_overlap():
    dup = SIGMA_EQ[:1] + (
        MethodImpl("D3_Eq", SIGMA_EQ[0].scheme, "eq",
                   read_fd_expr("\\x : Bool. \\y : Bool. False")),)
    with pytest.raises(FdTypeError) as exc:
        fd_env_wf(dup, TC_EQ, ())
    assert exc.value.kind == OVERLAP


def test_observably_different_copies_still_overlap():
    # Two entries at the same ground head whose implementations disagree:
    # evaluation could tell them apart, but well-formedness rejects the
    # environment before it ever matters.
    tc = (FdClassEntry("base", "Base", "a", IArrow(ITyVar("a"), IBool())),)
    scheme = FdConstraintScheme((), (), FdQ("Base", IBool()))
    sigma = (
        MethodImpl("D1_Base", scheme, "base", read_fd_expr("\\x : Bool. x")),
        MethodImpl("D2_Base", scheme, "base",
                   read_fd_expr("\\x : Bool. True")),
    )
    with pytest.raises(FdTypeError) as exc:
        fd_env_wf(sigma, tc, ())
    assert exc.value.kind == OVERLAP


def test_implementation_may_only_use_earlier_entries():
    fwd = read_fd_expr(
        "\\x : Bool. \\y : Bool. "
        "[D2_Eq @Bool [D1_Eq]].eq (\\z : Bool. z) (\\z : Bool. z)")
    sigma = (MethodImpl("D1_Eq", SIGMA_EQ[0].scheme, "eq", fwd),) \
        + SIGMA_EQ[1:]
    with pytest.raises(FdTypeError) as exc:
        fd_env_wf(sigma, TC_EQ, ())
    assert exc.value.kind == PREFIX_VIOLATION


def test_dropping_a_referenced_entry_breaks_dictionaries():
    d = read_fd_dict("D2_Eq @Bool [D1_Eq]")
    q, _ = fd_typecheck_dict(SIGMA_EQ, TC_EQ, (), d)
    assert q == FdQ("Eq", IArrow(IBool(), IBool()))
    with pytest.raises(FdTypeError) as exc:
        fd_typecheck_dict(SIGMA_EQ[1:], TC_EQ, (), d)
    assert exc.value.kind == UNKNOWN_CONSTRUCTOR


# ---------------------------------------------------------------------------
# Typing
# ---------------------------------------------------------------------------

def test_method_projection_instantiates_class_variable():
    ty, _ = fd_typecheck_expr(SIGMA_EQ, TC_EQ, (),
                              read_fd_expr("[D1_Eq].eq"))
    assert S.pretty(ty) == "Bool -> Bool -> Bool"


def test_method_projection_through_local_dict():
    tt = (S.TyVarBind("b"), DictBind("d", FdQ("Eq", ITyVar("b"))),)
    ty, te = fd_typecheck_expr(SIGMA_EQ, TC_EQ, tt,
                               read_fd_expr("[d].eq"))
    assert S.pretty(ty) == "b -> b -> Bool"
    assert te == S.TProj(S.TVar("$d_d"), "eq")


def test_dictionary_abstraction_and_application():
    e = read_fd_expr("(\\d : [Eq Bool]. [d].eq) [D1_Eq] True True")
    ty, _ = fd_typecheck_expr(SIGMA_EQ, TC_EQ, (), e)
    assert ty == IBool()


def test_type_application():
    e = read_fd_expr("(/\\a. \\x : a. x) @Bool")
    ty, _ = fd_typecheck_expr((), (), (), e)
    assert ty == IArrow(IBool(), IBool())


def test_application_of_non_function_is_mismatch():
    with pytest.raises(FdTypeError) as exc:
        fd_typecheck_expr((), (), (), read_fd_expr("True True"))
    assert exc.value.kind == MISMATCH


def test_unbound_variable():
    with pytest.raises(FdTypeError) as exc:
        fd_typecheck_expr((), (), (), read_fd_expr("x"))
    assert exc.value.kind == UNBOUND_VAR


def test_unbound_dict_variable():
    with pytest.raises(FdTypeError) as exc:
        fd_typecheck_dict(SIGMA_EQ, TC_EQ, (), read_fd_dict("d"))
    assert exc.value.kind == UNBOUND_DICT


def test_argument_type_must_match():
    e = read_fd_expr("(\\f : Bool -> Bool. True) True")
    with pytest.raises(FdTypeError) as exc:
        fd_typecheck_expr((), (), (), e)
    assert exc.value.kind == MISMATCH


# ---------------------------------------------------------------------------
# Elaboration to records
# ---------------------------------------------------------------------------

def test_ground_dictionary_elaborates_to_record():
    _, te = fd_typecheck_dict(SIGMA_EQ, TC_EQ, (), read_fd_dict("D1_Eq"))
    assert S.pretty(te) == "{eq = \\x : Bool. \\y : Bool. True}"


def test_nested_dictionary_applies_wrapper():
    _, te = fd_typecheck_dict(SIGMA_EQ, TC_EQ, (),
                              read_fd_dict("D2_Eq @Bool [D1_Eq]"))
    # outer record abstraction applied to the type and the inner record
    assert isinstance(te, S.TApp)
    assert isinstance(te.fun, S.TTyApp)


def test_elaboration_is_deterministic():
    r = corpus_result("P2")
    sigma, ie = r.fd_elabs[0]
    outs = set()
    for _ in range(5):
        _, te = FdChecker(sigma, r.fd_class_env).check_expr((), ie)
        outs.add(S.pretty(te))
    assert len(outs) == 1


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

OMEGA = S.IApp(S.ILam("x", IBool(), S.IApp(S.IVar("x"), S.IVar("x"))),
               S.ILam("x", IBool(), S.IApp(S.IVar("x"), S.IVar("x"))))


def test_values():
    assert is_fd_value(read_fd_expr("True"))
    assert is_fd_value(read_fd_expr("\\x : Bool. x"))
    assert is_fd_value(read_fd_expr("/\\a. \\x : a. x"))
    assert is_fd_value(read_fd_expr("\\d : [Eq Bool]. True"))
    assert not is_fd_value(read_fd_expr("(\\x : Bool. x) True"))


def test_beta_step():
    e = read_fd_expr("(\\x : Bool. x) True")
    assert fd_step((), e) == S.ITrue()


def test_method_invocation_uses_environment_implementation():
    e = read_fd_expr("[D1_Eq].eq True False")
    assert fd_eval(SIGMA_EQ, e, 100) == S.ITrue()


def test_method_step_replays_stored_implementation():
    e = read_fd_expr("[D2_Eq @Bool [D1_Eq]].eq")
    stepped = fd_step(SIGMA_EQ, e)
    # the constructor's implementation applied to its type and dict args
    assert stepped == S.IDApp(S.ITyApp(SIGMA_EQ[1].impl, IBool()),
                              read_fd_dict("D1_Eq"))


def test_call_by_name_skips_diverging_argument():
    e = S.IApp(S.ILam("x", IBool(), S.ITrue()), OMEGA)
    assert fd_eval((), e, 10) == S.ITrue()


def test_let_substitutes_without_evaluating():
    e = S.ILet("x", IBool(), OMEGA, S.ITrue())
    assert fd_step((), e) == S.ITrue()


def test_fuel_exhaustion():
    with pytest.raises(FuelExhausted):
        fd_eval((), OMEGA, 50)


def test_evaluation_preserves_types_along_the_trace():
    r = corpus_result("P1")
    sigma, e = r.fd_elabs[0]
    ty0, _ = fd_typecheck_expr(sigma, r.fd_class_env, (), e)
    for _ in range(1000):
        nxt = fd_step(sigma, e)
        if nxt is None:
            assert is_fd_value(e)
            break
        ty, _ = fd_typecheck_expr(sigma, r.fd_class_env, (), nxt)
        assert S.alpha_eq(ty, ty0)
        e = nxt
    else:
        pytest.fail("trace did not terminate")


@pytest.mark.parametrize("name", POSITIVE)
def test_closed_well_typed_terms_never_get_stuck(name):
    r = corpus_result(name)
    for sigma, e in r.fd_elabs:
        while not is_fd_value(e):
            nxt = fd_step(sigma, e)
            assert nxt is not None, f"stuck at {S.pretty(e)}"
            e = nxt
        assert e in (S.ITrue(), S.IFalse())
