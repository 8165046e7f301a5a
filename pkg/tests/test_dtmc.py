import io

import numpy as np
import pytest

from conftest import random_traceset, traceset_from_marks
from tlcausal.dtmc import build_dtmc, export_text, load_text
from tlcausal.errors import DataError
from tlcausal.traces import TraceSet


def state_by_label(model, atoms):
    target = frozenset(atoms)
    for i, lab in enumerate(model.labels):
        if lab == target:
            return i
    raise AssertionError(f"no state labeled {target}")


class TestBuild:
    def test_three_tick_worked_example(self):
        data = traceset_from_marks(("a", "b"), 3,
                                   {"a": [0, 1], "b": [0, 1, 2]})
        model = build_dtmc(data)
        assert model.n_states == 2
        ab = state_by_label(model, {"a", "b"})
        b = state_by_label(model, {"b"})
        T = model.transitions.toarray()
        assert T[ab, ab] == 0.5
        assert T[ab, b] == 0.5
        assert T[b, b] == 1.0
        assert model.initial == ab
        assert model.frequency[ab] == 2 and model.frequency[b] == 1

    def test_constant_trace(self):
        data = traceset_from_marks(("a",), 3, {"a": [0, 1, 2]})
        model = build_dtmc(data)
        assert model.n_states == 1
        assert model.transitions.toarray()[0, 0] == 1.0

    def test_no_transition_across_trace_boundary(self):
        t1 = traceset_from_marks(("a", "b"), 2, {"a": [0, 1]}).traces[0]
        t2 = traceset_from_marks(("a", "b"), 2, {"b": [0, 1]}).traces[0]
        model = build_dtmc(TraceSet((t1, t2)))
        a = state_by_label(model, {"a"})
        b = state_by_label(model, {"b"})
        T = model.transitions.toarray()
        assert T[a, b] == 0.0 and T[a, a] == 1.0 and T[b, b] == 1.0

    def test_row_stochastic_on_random_builds(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            data = random_traceset(rng, n_atoms=3, max_len=40,
                                   n_traces=int(rng.integers(1, 4)))
            model = build_dtmc(data)
            assert model.row_sum_deviation() <= 1e-9

    def test_frequency_sums_to_ticks(self):
        rng = np.random.default_rng(3)
        data = random_traceset(rng, n_atoms=2, max_len=30, n_traces=3)
        model = build_dtmc(data)
        assert int(model.frequency.sum()) == data.total_ticks

    def test_order_independent_across_traces(self):
        rng = np.random.default_rng(8)
        data = random_traceset(rng, n_atoms=2, max_len=25, n_traces=3)
        fwd = build_dtmc(data)
        rev = build_dtmc(TraceSet(tuple(reversed(data.traces))))
        # same state set and same transition probabilities modulo ordering
        fwd_map = {lab: i for i, lab in enumerate(fwd.labels)}
        Tf = fwd.transitions.toarray()
        Tr = rev.transitions.toarray()
        for i, lab_i in enumerate(rev.labels):
            for j, lab_j in enumerate(rev.labels):
                assert Tr[i, j] == pytest.approx(
                    Tf[fwd_map[lab_i], fwd_map[lab_j]], abs=1e-12)
        assert fwd.frequency.sum() == rev.frequency.sum()


class TestExport:
    def test_roundtrip(self):
        data = traceset_from_marks(("a", "b"), 5,
                                   {"a": [0, 2, 3], "b": [1, 2]})
        model = build_dtmc(data)
        sink = io.StringIO()
        export_text(model, sink)
        back = load_text(io.StringIO(sink.getvalue()))
        assert back.labels == model.labels
        assert back.initial == model.initial
        assert np.allclose(back.transitions.toarray(),
                           model.transitions.toarray())
        assert np.array_equal(back.frequency, model.frequency)

    def test_malformed(self):
        with pytest.raises(DataError):
            load_text(io.StringIO("state zero: {}\n"))
