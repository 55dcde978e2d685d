"""Skeletal Sahlqvist classification and pure hybrid correspondents for the
hybrid language with satisfaction operators and the downarrow binder."""

from .alba import (
    AlbaTrace,
    Failure,
    Side,
    Success,
    System,
    TraceStep,
    ackermann,
    as_inequality,
    finalize,
    first_approximation,
    preprocess,
    reduce_substage1,
    replay,
    run,
)
from .classify import (
    Branch,
    OrderType,
    Pol,
    Sign,
    SignedTree,
    critical_branches,
    find_order_type,
    is_definite,
    is_epsilon_uniform,
    is_skeletal_sahlqvist,
    signed_tree,
)
from .semantics import (
    EnumerationLimits,
    KripkeFrame,
    KripkeModel,
    enumerate_frames,
    eval_at,
    frame_valid,
    frame_valid_quasi,
    frame_valid_quasi_set,
    holds_inequality,
    holds_quasi,
    truth_mask,
)
from .syntax import (
    BOT,
    TOP,
    And,
    At,
    Bot,
    Box,
    Dia,
    Down,
    Formula,
    FreshContext,
    Implies,
    Inequality,
    Kind,
    Nom,
    Not,
    Or,
    Prop,
    QuasiInequality,
    Svar,
    Symbol,
    Top,
    fmt,
    parse,
    parse_inequality,
    parse_quasi,
)
from .translate import tr_ineq, tr_quasi, tr_quasiset, verify_tr_equivalence

__all__ = [name for name in dir() if not name.startswith("_")]
