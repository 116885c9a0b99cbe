"""Hypothesis strategies for the three languages' types and small terms."""

from __future__ import annotations

from hypothesis import strategies as st

from dictelab import syntax as S

TYVARS = ["a", "b", "c"]
TMVARS = ["x", "y", "z"]


src_mono = st.deferred(lambda: st.one_of(
    st.just(S.SBool()),
    st.sampled_from(TYVARS).map(S.STyVar),
    st.builds(S.SArrow, src_mono, src_mono),
))

fd_type = st.deferred(lambda: st.one_of(
    st.just(S.IBool()),
    st.sampled_from(TYVARS).map(S.ITyVar),
    st.builds(S.IArrow, fd_type, fd_type),
    st.builds(S.IForall, st.sampled_from(TYVARS), fd_type),
))

tgt_type = st.deferred(lambda: st.one_of(
    st.just(S.TBool()),
    st.sampled_from(TYVARS).map(S.TTyVar),
    st.builds(S.TArrow, tgt_type, tgt_type),
    st.builds(S.TForall, st.sampled_from(TYVARS), tgt_type),
    st.lists(st.tuples(st.sampled_from(["f", "g"]), tgt_type),
             max_size=2, unique_by=lambda kv: kv[0])
      .map(lambda fs: S.TRecordTy(tuple(fs))),
))

# Untyped-shape target terms: enough structure for binding-related
# properties (alpha equivalence, substitution) without a typechecking
# obligation.
tgt_term = st.deferred(lambda: st.one_of(
    st.just(S.TTrue()),
    st.just(S.TFalse()),
    st.sampled_from(TMVARS).map(S.TVar),
    st.builds(S.TLam, st.sampled_from(TMVARS), tgt_type, tgt_term),
    st.builds(S.TApp, tgt_term, tgt_term),
    st.builds(S.TTyLam, st.sampled_from(TYVARS), tgt_term),
    st.builds(S.TTyApp, tgt_term, tgt_type),
    st.builds(S.TProj, tgt_term, st.sampled_from(["f", "g"])),
))

type_mapping = st.dictionaries(st.sampled_from(TYVARS), src_mono, max_size=3)
