"""Satisfaction sets and path probabilities, exact on a chain or by counting
on traces.

On a :class:`~tlcausal.dtmc.Dtmc`, bounded until/unless probabilities follow
the standard per-state recurrence (value iteration); infinite bounds iterate
to a fixed point.  Probability-bounded leads-to is checked per state through
the always-globally reading: every reachable state where the antecedent holds
must reach the consequent within the window with the bounded probability.

On traces, formulæ are evaluated per tick (temporal operators along the trace
suffix, with truncation satisfying only the weak until), and the leads-to
probability is the fraction of antecedent ticks whose full window contains a
consequent tick.  Antecedent ticks whose window runs off the end of the trace
are censored from both numerator and denominator, and windows never cross
trace boundaries.  Counts are integers, so callers can compare estimates in
exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dtmc import Dtmc
from .errors import CheckError, ConvergenceError, EmptyWindowError
from .pctl import (INFINITY, And, Atom, Formula, Implies, LeadsTo, Not, Or,
                   PathFormula, ProbBound, Unless, Until)
from .traces import Trace, TraceSet

__all__ = [
    "FrequencyEstimate", "sat_set", "until_prob", "unless_prob",
    "leads_to_prob", "trace_leads_to", "marginal_window_prob",
    "eval_on_trace", "window_hits",
]

FIXPOINT_TOL = 1e-12
FIXPOINT_CAP = 100_000
_SAT_ONE = 1.0 - 1e-9  # prob >= 1 test under float iteration


@dataclass(frozen=True)
class FrequencyEstimate:
    """A probability backed by its counts.

    ``probability == numerator / denominator`` whenever the denominator is
    positive.  Trace-based estimates carry integer counts; chain-based ones
    carry frequency-weighted (possibly fractional) totals.
    """

    probability: float
    numerator: float
    denominator: float


def _cmp_vec(vec, cmp, p):
    """Threshold a probability vector.  Interior bounds compare exactly;
    a >=1 bound allows for fixed-point tolerance."""
    if cmp == ">=":
        return vec >= (_SAT_ONE if p >= 1.0 else p)
    return vec > p


# ---------------------------------------------------------------------------
# Exact semantics on a Dtmc

def _state_mask(model: Dtmc, f: Formula) -> np.ndarray:
    if isinstance(f, Atom):
        if f.name == "true":
            return np.ones(model.n_states, dtype=bool)
        if f.name == "false":
            return np.zeros(model.n_states, dtype=bool)
        if f.name not in model.atoms:
            raise CheckError(f"unknown atom: {f.name!r}")
        return model.states_with(f.name)
    if isinstance(f, Not):
        return ~_state_mask(model, f.operand)
    if isinstance(f, And):
        return _state_mask(model, f.left) & _state_mask(model, f.right)
    if isinstance(f, Or):
        return _state_mask(model, f.left) | _state_mask(model, f.right)
    if isinstance(f, Implies):
        return ~_state_mask(model, f.left) | _state_mask(model, f.right)
    if isinstance(f, ProbBound):
        return _probbound_mask(model, f)
    if isinstance(f, PathFormula):
        raise CheckError("a bare path formula has no satisfaction set; "
                         "wrap it in a probability bound")
    raise CheckError(f"not a formula node: {f!r}")


def _probbound_mask(model: Dtmc, f: ProbBound) -> np.ndarray:
    inner = f.path
    if isinstance(inner, Until):
        vec = until_prob(model, _state_mask(model, inner.left),
                         _state_mask(model, inner.right), inner.tmax)
    elif isinstance(inner, Unless):
        vec = unless_prob(model, _state_mask(model, inner.left),
                          _state_mask(model, inner.right), inner.tmax)
    elif isinstance(inner, LeadsTo):
        # AG[left -> (window-reach right with this bound)]
        reach = _window_reach(model, inner, f.comparison, f.p)
        good = reach | ~_state_mask(model, inner.left)
        vec = unless_prob(model, good, np.zeros(model.n_states, bool), INFINITY)
        return vec >= _SAT_ONE
    else:
        # degenerate zero-length path: indicator of the state formula
        vec = _state_mask(model, inner).astype(float)
    return _cmp_vec(vec, f.comparison, f.p)


def _window_reach(model: Dtmc, lead: LeadsTo, cmp: str, p: float) -> np.ndarray:
    if not isinstance(lead.left, (Atom, Not, And, Or, Implies, ProbBound)) or \
       not isinstance(lead.right, (Atom, Not, And, Or, Implies, ProbBound)):
        raise CheckError("leads-to on a chain requires state-formula operands; "
                         "use the trace semantics for temporal operands")
    u = _window_reach_vector(model, _state_mask(model, lead.right),
                             lead.tmin, lead.tmax)
    return _cmp_vec(u, cmp, p)


def _window_reach_vector(model, target_mask, tmin, tmax):
    horizon = INFINITY if tmax == INFINITY else int(tmax) - int(tmin)
    v = until_prob(model, np.ones(model.n_states, bool), target_mask, horizon)
    for _ in range(int(tmin)):
        v = model.transitions @ v
    return v


def sat_set(model: Dtmc, f: Formula) -> frozenset:
    """State indices satisfying a state formula."""
    return frozenset(int(i) for i in np.flatnonzero(_state_mask(model, f)))


def _as_mask(model, states) -> np.ndarray:
    if isinstance(states, np.ndarray) and states.dtype == bool:
        return states
    mask = np.zeros(model.n_states, dtype=bool)
    for s in states:
        mask[int(s)] = True
    return mask


def until_prob(model: Dtmc, f1set, f2set, tmax) -> np.ndarray:
    """Per-state probability of ``f1 U{<=tmax} f2``.

    Recurrence: P_0 = [s in f2]; P_k = 1 on f2, else T @ P_{k-1} on f1,
    else 0.  An infinite bound iterates to the least fixed point within
    ``FIXPOINT_TOL`` and raises :class:`ConvergenceError` at the cap.
    """
    f2v = _as_mask(model, f2set).astype(float)
    cont = _as_mask(model, f1set) & ~_as_mask(model, f2set)
    return _iterate(model, f2v.copy(), f2v, cont, tmax)


def unless_prob(model: Dtmc, f1set, f2set, tmax) -> np.ndarray:
    """Per-state probability of the weak until ``f1 W{<=tmax} f2``:
    as until, except f1 may persist through the whole bound."""
    f1m = _as_mask(model, f1set)
    f2m = _as_mask(model, f2set)
    f2v = f2m.astype(float)
    start = (f1m | f2m).astype(float)
    return _iterate(model, start, f2v, f1m & ~f2m, tmax)


def _iterate(model, current, f2v, cont, tmax):
    trans = model.transitions
    if tmax != INFINITY:
        for _ in range(int(tmax)):
            current = f2v + cont * (trans @ current)
        return current
    for _ in range(FIXPOINT_CAP):
        nxt = f2v + cont * (trans @ current)
        delta = float(np.abs(nxt - current).max()) if current.size else 0.0
        current = nxt
        if delta < FIXPOINT_TOL:
            return current
    raise ConvergenceError(
        f"fixed point not reached within {FIXPOINT_CAP} iterations "
        f"(last delta {delta:.3e})")


def leads_to_prob(model: Dtmc, c: Formula, e: Formula,
                  tmin: int, tmax) -> FrequencyEstimate:
    """Chain-based leads-to probability, averaged over antecedent states.

    Per antecedent state the probability of reaching the consequent in the
    window is the ``tmin``-step push of the bounded reachability vector; the
    aggregate weights states by their observed frequency, which is the
    maximum-likelihood estimate of P(consequent in window | antecedent).
    """
    if tmin < 1:
        raise CheckError("leads-to requires tmin >= 1")
    if tmax != INFINITY and tmax < tmin:
        raise CheckError("leads-to requires tmin <= tmax")
    cmask = _state_mask(model, c)
    if not cmask.any():
        raise CheckError("antecedent holds in no state "
                         "(occurrence condition violated)")
    u = _window_reach_vector(model, _state_mask(model, e), tmin, tmax)
    weights = model.frequency[cmask]
    denom = float(weights.sum())
    if denom <= 0:
        raise CheckError("antecedent states have zero observed frequency")
    numer = float((weights * u[cmask]).sum())
    return FrequencyEstimate(numer / denom, numer, denom)


# ---------------------------------------------------------------------------
# Per-tick semantics on traces

def eval_on_trace(trace: Trace, f: Formula) -> np.ndarray:
    """Boolean satisfaction of ``f`` at every tick of one trace.

    Temporal operators look along the trace suffix; running off the end
    falsifies an until and satisfies an unless (weak truncation).
    """
    if isinstance(f, Atom):
        if f.name == "true":
            return np.ones(trace.length, dtype=bool)
        if f.name == "false":
            return np.zeros(trace.length, dtype=bool)
        return trace.column(f.name)
    if isinstance(f, Not):
        return ~eval_on_trace(trace, f.operand)
    if isinstance(f, And):
        return eval_on_trace(trace, f.left) & eval_on_trace(trace, f.right)
    if isinstance(f, Or):
        return eval_on_trace(trace, f.left) | eval_on_trace(trace, f.right)
    if isinstance(f, Implies):
        return ~eval_on_trace(trace, f.left) | eval_on_trace(trace, f.right)
    if isinstance(f, ProbBound):
        inner = f.path
        if isinstance(inner, LeadsTo):
            raise CheckError("leads-to has no per-tick truth value on traces; "
                             "use trace_leads_to")
        if isinstance(inner, (Until, Unless)):
            sat = _eval_path_on_trace(trace, inner)
        else:
            sat = eval_on_trace(trace, inner)
        vals = sat.astype(float)  # a trace is one path: probability is 0/1
        return vals >= f.p if f.comparison == ">=" else vals > f.p
    if isinstance(f, (Until, Unless)):
        return _eval_path_on_trace(trace, f)
    if isinstance(f, LeadsTo):
        raise CheckError("leads-to has no per-tick truth value on traces; "
                         "use trace_leads_to")
    raise CheckError(f"not a formula node: {f!r}")


def _eval_path_on_trace(trace: Trace, f) -> np.ndarray:
    left = eval_on_trace(trace, f.left)
    right = eval_on_trace(trace, f.right)
    weak = isinstance(f, Unless)
    n = trace.length
    if f.tmax == INFINITY:
        out = np.empty(n, dtype=bool)
        carry = weak  # beyond the end: weak succeeds, strong fails
        for t in range(n - 1, -1, -1):
            carry = right[t] or (left[t] and carry)
            out[t] = carry
        return out
    k = int(f.tmax)
    current = (right | left) if weak else right.copy()
    fill = weak
    for _ in range(k):
        shifted = np.empty(n, dtype=bool)
        shifted[:-1] = current[1:]
        shifted[-1] = fill
        current = right | (left & shifted)
    return current


def window_hits(marks: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """For each tick ``t`` with the full window in range, whether ``marks``
    is set anywhere in ``[t+lo, t+hi]``.  Result has length ``len - hi``
    (empty when the trace is shorter than the window)."""
    n = len(marks)
    nq = n - hi
    if nq <= 0:
        return np.zeros(0, dtype=bool)
    cs = np.concatenate(([0], np.cumsum(marks.astype(np.int64))))
    return (cs[hi + 1: hi + 1 + nq] - cs[lo: lo + nq]) > 0


def _check_window(tmin, tmax):
    if not (isinstance(tmin, int) and tmin >= 1):
        raise CheckError("window requires tmin >= 1")
    if tmax == INFINITY or not (isinstance(tmax, int) and tmax >= tmin):
        raise CheckError("trace windows require a finite tmax >= tmin")


def trace_leads_to(data: TraceSet, c: Formula, e: Formula,
                   tmin: int, tmax: int) -> FrequencyEstimate:
    """Windowed conditional frequency of ``e`` after ``c`` over traces.

    Denominator: ticks where ``c`` holds with the full window observed
    (``t + tmax < length``), per trace.  Numerator: those ticks with ``e``
    holding somewhere in ``[t+tmin, t+tmax]``.  Raises
    :class:`EmptyWindowError` when the denominator is zero.
    """
    _check_window(tmin, tmax)
    num = den = 0
    for trace in data:
        c_arr = eval_on_trace(trace, c)
        e_arr = eval_on_trace(trace, e)
        nq = trace.length - tmax
        if nq <= 0:
            continue
        hits = window_hits(e_arr, tmin, tmax)
        cq = c_arr[:nq]
        den += int(cq.sum())
        num += int((cq & hits).sum())
    if den == 0:
        raise EmptyWindowError(
            "antecedent never occurs with a full window in range")
    return FrequencyEstimate(num / den, num, den)


def marginal_window_prob(data: TraceSet, e: Formula,
                         width: int, offset: int) -> FrequencyEstimate:
    """Baseline frequency of ``e`` in a sliding window of ``width`` ticks
    starting ``offset`` ticks ahead, over all ticks with the window in range.
    For a hypothesis window ``[tmin, tmax]`` use ``offset=tmin`` and
    ``width=tmax-tmin+1``."""
    if width < 1:
        raise CheckError("window width must be >= 1")
    if offset < 0:
        raise CheckError("window offset must be >= 0")
    hi = offset + width - 1
    num = den = 0
    for trace in data:
        e_arr = eval_on_trace(trace, e)
        nq = trace.length - hi
        if nq <= 0:
            continue
        hits = window_hits(e_arr, offset, hi)
        den += nq
        num += int(hits.sum())
    if den == 0:
        raise EmptyWindowError("no tick has a full window in range")
    return FrequencyEstimate(num / den, num, den)
