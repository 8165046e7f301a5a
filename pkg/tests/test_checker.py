import numpy as np
import pytest

import oracles
from conftest import random_dtmc, random_traceset, traceset_from_marks
from tlcausal.checker import (eval_on_trace, leads_to_prob,
                              marginal_window_prob, sat_set, trace_leads_to,
                              unless_prob, until_prob)
from tlcausal.errors import CheckError, EmptyWindowError
from tlcausal.pctl import INFINITY, Atom, Not, parse


class TestSatSet:
    def test_atom(self, dtmc_a):
        assert sat_set(dtmc_a, Atom("b")) == {1}

    def test_complement(self, dtmc_a):
        assert sat_set(dtmc_a, Not(Atom("b"))) == {0, 2}

    def test_bounded_until_bound(self, dtmc_a):
        got = sat_set(dtmc_a, parse("[a U{<=2} b]{>=0.5}"))
        assert got == {0, 1}

    def test_unknown_atom(self, dtmc_a):
        with pytest.raises(CheckError, match="unknown atom"):
            sat_set(dtmc_a, Atom("zz"))

    def test_leads_to_ag_reading(self, dtmc_a):
        # from s2 the antecedent never holds, so the claim holds vacuously
        got = sat_set(dtmc_a, parse("a ~>{>=1,<=2}{>=0.5} b"))
        assert 2 in got

    def test_builtins(self, dtmc_a):
        assert sat_set(dtmc_a, Atom("true")) == {0, 1, 2}
        assert sat_set(dtmc_a, Atom("false")) == frozenset()


class TestUntilUnless:
    def test_worked_example_a(self, dtmc_a):
        vec = until_prob(dtmc_a, dtmc_a.states_with("a"),
                         dtmc_a.states_with("b"), 2)
        assert vec[0] == pytest.approx(0.5, abs=1e-12)
        assert vec[1] == 1.0
        assert vec[2] == 0.0

    def test_worked_example_b(self, dtmc_b):
        vec = until_prob(dtmc_b, dtmc_b.states_with("a"),
                         dtmc_b.states_with("b"), 2)
        assert vec[0] == pytest.approx(0.75, abs=1e-12)

    def test_target_state_is_one_at_every_horizon(self, dtmc_a):
        for t in (0, 1, 5, INFINITY):
            vec = until_prob(dtmc_a, dtmc_a.states_with("a"),
                             dtmc_a.states_with("b"), t)
            assert vec[1] == 1.0

    def test_unless_self_loop(self):
        rng = np.random.default_rng(0)
        model = random_dtmc(rng, 1, atoms=("a", "b"))
        f1 = np.array([True])
        f2 = np.array([False])
        vec = unless_prob(model, f1, f2, 3)
        assert vec[0] == pytest.approx(1.0, abs=1e-12)

    def test_unless_worked_example_a(self, dtmc_a):
        vec = unless_prob(dtmc_a, dtmc_a.states_with("a"),
                          dtmc_a.states_with("b"), 2)
        assert vec[0] == pytest.approx(0.5, abs=1e-12)

    def test_unless_zero_horizon(self, dtmc_a):
        vec = unless_prob(dtmc_a, dtmc_a.states_with("a"),
                          dtmc_a.states_with("b"), 0)
        assert vec[0] == 1.0  # in f1 only

    def test_oracle_agreement_small_models(self):
        rng = np.random.default_rng(2024)
        for _ in range(40):
            n = int(rng.integers(2, 6))
            model = random_dtmc(rng, n)
            T = model.transitions.toarray()
            f1 = set(int(i) for i in
                     np.flatnonzero(rng.random(n) < 0.6))
            f2 = set(int(i) for i in
                     np.flatnonzero(rng.random(n) < 0.4))
            tmax = int(rng.integers(0, 7))
            f1m = np.zeros(n, bool)
            f2m = np.zeros(n, bool)
            for i in f1:
                f1m[i] = True
            for i in f2:
                f2m[i] = True
            got_u = until_prob(model, f1m, f2m, tmax)
            got_w = unless_prob(model, f1m, f2m, tmax)
            for s in range(n):
                assert got_u[s] == pytest.approx(
                    oracles.enum_until(T, f1, f2, tmax, s), abs=1e-10)
                assert got_w[s] == pytest.approx(
                    oracles.enum_unless(T, f1, f2, tmax, s), abs=1e-10)

    def test_monotone_in_horizon(self):
        rng = np.random.default_rng(77)
        model = random_dtmc(rng, 5)
        f1 = model.states_with("a")
        f2 = model.states_with("b")
        prev = until_prob(model, f1, f2, 0)
        for t in range(1, 8):
            cur = until_prob(model, f1, f2, t)
            assert (cur >= prev - 1e-12).all()
            prev = cur

    def test_unless_dominates_until(self):
        rng = np.random.default_rng(123)
        for _ in range(20):
            model = random_dtmc(rng, 4)
            f1 = model.states_with("a")
            f2 = model.states_with("b")
            t = int(rng.integers(0, 6))
            u = until_prob(model, f1, f2, t)
            w = unless_prob(model, f1, f2, t)
            assert (w >= u - 1e-12).all()

    def test_infinite_until_fixed_point(self, dtmc_b):
        vec = until_prob(dtmc_b, dtmc_b.states_with("a"),
                         dtmc_b.states_with("b"), INFINITY)
        assert vec[0] == pytest.approx(1.0, abs=1e-9)


class TestLeadsToProb:
    def test_worked_example(self, dtmc_a):
        est = leads_to_prob(dtmc_a, Atom("a"), Atom("b"), 1, 2)
        assert est.probability == pytest.approx(0.5, abs=1e-12)

    def test_true_effect(self, dtmc_a):
        est = leads_to_prob(dtmc_a, Atom("a"), Atom("true"), 1, 2)
        assert est.probability == pytest.approx(1.0, abs=1e-12)

    def test_empty_antecedent(self, dtmc_a):
        with pytest.raises(CheckError, match="no state"):
            leads_to_prob(dtmc_a, Atom("false"), Atom("b"), 1, 2)

    def test_frequency_weighting(self):
        rng = np.random.default_rng(31)
        model = random_dtmc(rng, 5)
        T = model.transitions.toarray()
        cset = {int(i) for i in np.flatnonzero(model.states_with("a"))}
        eset = {int(i) for i in np.flatnonzero(model.states_with("b"))}
        if not cset:
            return
        est = leads_to_prob(model, Atom("a"), Atom("b"), 2, 4)
        want = oracles.enum_leads_to(T, model.frequency, cset, eset, 2, 4)
        assert est.probability == pytest.approx(want, abs=1e-10)


class TestTraceSemantics:
    def test_leads_to_hand_count(self):
        data = traceset_from_marks(("c", "e"), 10, {"c": [1, 5], "e": [2, 9]})
        est = trace_leads_to(data, Atom("c"), Atom("e"), 1, 2)
        assert (est.numerator, est.denominator) == (1, 2)

    def test_censoring_empties_denominator(self):
        data = traceset_from_marks(("c", "e"), 10, {"c": [9], "e": [2]})
        with pytest.raises(EmptyWindowError):
            trace_leads_to(data, Atom("c"), Atom("e"), 1, 2)

    def test_self_following_atom(self):
        # by the censoring rule tick 3's window is tick 4, where c is false
        data = traceset_from_marks(("c",), 5, {"c": [0, 1, 2, 3]})
        est = trace_leads_to(data, Atom("c"), Atom("c"), 1, 1)
        assert (est.numerator, est.denominator) == (3, 4)

    def test_marginal_hand_count(self):
        data = traceset_from_marks(("e",), 10, {"e": [2, 9]})
        est = marginal_window_prob(data, Atom("e"), 2, 1)
        assert (est.numerator, est.denominator) == (3, 8)

    def test_marginal_true_and_false(self):
        data = traceset_from_marks(("e",), 10, {"e": [2]})
        assert marginal_window_prob(data, Atom("true"), 3, 1).probability == 1.0
        assert marginal_window_prob(data, Atom("false"), 3, 1).probability == 0.0

    def test_brute_force_agreement(self):
        rng = np.random.default_rng(404)
        for _ in range(60):
            data = random_traceset(rng, n_atoms=int(rng.integers(2, 6)),
                                   max_len=50,
                                   n_traces=int(rng.integers(1, 3)))
            tmin = int(rng.integers(1, 4))
            tmax = tmin + int(rng.integers(0, 5))
            c, e = rng.choice(len(data.variables), size=2, replace=False)
            cname, ename = data.variables[c], data.variables[e]
            cols_c = [tr.column(cname) for tr in data]
            cols_e = [tr.column(ename) for tr in data]
            want = oracles.count_leads_to(cols_c, cols_e, tmin, tmax)
            try:
                got = trace_leads_to(data, Atom(cname), Atom(ename),
                                     tmin, tmax)
                assert (got.numerator, got.denominator) == want
            except EmptyWindowError:
                assert want[1] == 0
            want_m = oracles.count_marginal(cols_e, tmax - tmin + 1, tmin)
            try:
                got_m = marginal_window_prob(data, Atom(ename),
                                             tmax - tmin + 1, tmin)
                assert (got_m.numerator, got_m.denominator) == want_m
            except EmptyWindowError:
                assert want_m[1] == 0

    def test_windows_do_not_cross_traces(self):
        t1 = traceset_from_marks(("c", "e"), 4, {"c": [3]}).traces[0]
        t2 = traceset_from_marks(("c", "e"), 4, {"e": [0]}).traces[0]
        from tlcausal.traces import TraceSet
        with pytest.raises(EmptyWindowError):
            # c's window would need ticks from the next trace
            trace_leads_to(TraceSet((t1, t2)), Atom("c"), Atom("e"), 1, 1)


class TestEvalOnTrace:
    def test_bounded_until(self):
        data = traceset_from_marks(("a", "b"), 6,
                                   {"a": [0, 1, 2], "b": [3]})
        trace = data.traces[0]
        got = eval_on_trace(trace, parse("[a U{<=2} b]{>=1}"))
        assert got.tolist() == [False, True, True, True, False, False]

    def test_unbounded_unless_truncation(self):
        data = traceset_from_marks(("a", "b"), 4, {"a": [2, 3]})
        trace = data.traces[0]
        got = eval_on_trace(trace, parse("[a W{<=inf} b]{>=1}"))
        assert got.tolist() == [False, False, True, True]

    def test_temporal_antecedent_in_window_count(self):
        # cause formula is itself an until
        data = traceset_from_marks(("a", "b", "e"), 12,
                                   {"a": [0, 1, 4], "b": [2, 5], "e": [3, 7]})
        est = trace_leads_to(data, parse("[a U{<=2} b]{>=1}"), Atom("e"), 1, 2)
        sat = eval_on_trace(data.traces[0], parse("[a U{<=2} b]{>=1}"))
        want = oracles.count_leads_to(
            [sat], [data.traces[0].column("e")], 1, 2)
        assert (est.numerator, est.denominator) == want


class TestConvergenceCap:
    def test_cap_is_reported(self, monkeypatch):
        import tlcausal.checker as checker
        from scipy import sparse
        from tlcausal.dtmc import Dtmc
        from tlcausal.errors import ConvergenceError
        T = sparse.csr_matrix(np.array([[1.0 - 1e-7, 1e-7], [0.0, 1.0]]))
        slow = Dtmc(("a", "b"), (frozenset({"a"}), frozenset({"b"})),
                    T, 0, np.array([1.0, 1.0]))
        monkeypatch.setattr(checker, "FIXPOINT_CAP", 3)
        with pytest.raises(ConvergenceError, match="3 iterations"):
            until_prob(slow, slow.states_with("a"), slow.states_with("b"),
                       INFINITY)


class TestLeadsToSatSet:
    def test_strict_bound_splits_states(self, dtmc_a):
        # window-reach from s0 is exactly 0.5: the strict bound excludes it,
        # and s0 then violates the always-globally reading at itself
        got = sat_set(dtmc_a, parse("a ~>{>=1,<=2}{>0.5} b"))
        assert got == {1, 2}
        # the weak bound keeps s0
        assert sat_set(dtmc_a, parse("a ~>{>=1,<=2}{>=0.5} b")) == {0, 1, 2}
