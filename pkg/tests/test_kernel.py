import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnetsim.kernel import BufferedRng, SimulationError, Timeline, derive_rng, seconds_to_ps


class TestScheduling:
    def test_fresh_timeline_at_zero(self):
        assert Timeline().now == 0

    def test_time_ordering(self):
        tl, log = Timeline(), []
        tl.schedule(10, lambda: log.append("A"))
        tl.schedule(5, lambda: log.append("B"))
        tl.run()
        assert log == ["B", "A"]

    def test_equal_times_fifo(self):
        tl, log = Timeline(), []
        for name in "abcde":
            tl.schedule(7, lambda n=name: log.append(n))
        tl.run()
        assert log == list("abcde")

    def test_zero_delay_runs_before_later_insertion(self):
        tl, log = Timeline(), []

        def first():
            tl.schedule(0, lambda: log.append("zero-delay"))

        tl.schedule(3, first)
        tl.schedule(3, lambda: log.append("second"))
        tl.run()
        # "second" was inserted before "zero-delay", so it still goes first
        assert log == ["second", "zero-delay"]

    def test_zero_delay_before_later_call(self):
        tl, log = Timeline(), []
        tl.schedule(0, lambda: log.append(1))
        tl.schedule(0, lambda: log.append(2))
        tl.run()
        assert log == [1, 2]

    def test_now_inside_event(self):
        tl, seen = Timeline(), []
        tl.schedule(42, lambda: seen.append(tl.now))
        tl.run()
        assert seen == [42]

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            Timeline().schedule(-1, lambda: None)

    def test_cancelled_event_skipped(self):
        tl, log = Timeline(), []
        ev = tl.schedule(1, lambda: log.append("x"))
        ev.cancel()
        assert tl.run() == 0
        assert log == []

    @given(st.lists(st.integers(0, 50), max_size=60))
    def test_matches_sort_oracle(self, delays):
        tl, log = Timeline(), []
        for i, d in enumerate(delays):
            tl.schedule(d, lambda i=i: log.append(i))
        tl.run()
        assert log == sorted(range(len(delays)), key=lambda i: (delays[i], i))

    @given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 5)), max_size=30))
    def test_nested_scheduling_never_goes_back(self, plan):
        tl = Timeline()
        fired = []

        def make(child_delay):
            def action():
                fired.append(tl.now)
                if child_delay:
                    tl.schedule(child_delay, lambda: fired.append(tl.now))
            return action

        for d, child in plan:
            tl.schedule(d, make(child))
        tl.run()
        assert fired == sorted(fired)


class TestRunUntil:
    def test_empty_queue(self):
        tl = Timeline()
        assert tl.run_until(100) == 0
        assert tl.now == 100

    def test_chain(self):
        tl = Timeline()

        def tick():
            tl.schedule(1, tick)

        tl.schedule(1, tick)
        assert tl.run_until(1000) == 1000
        assert tl.now == 1000

    def test_leaves_later_events(self):
        tl, log = Timeline(), []
        tl.schedule(5, lambda: log.append(5))
        tl.schedule(15, lambda: log.append(15))
        assert tl.run_until(10) == 1
        assert log == [5]
        assert len(tl) == 1
        tl.run_until(20)
        assert log == [5, 15]

    def test_horizon_before_now(self):
        tl = Timeline()
        tl.run_until(10)
        with pytest.raises(ValueError):
            tl.run_until(5)

    def test_failure_names_event(self):
        tl = Timeline()

        def boom():
            raise KeyError("missing")

        tl.schedule(7, boom, "detector.click")
        with pytest.raises(SimulationError, match=r"detector\.click.*t=7"):
            tl.run_until(10)


class TestTrace:
    @staticmethod
    def scenario(seed):
        out = io.StringIO()
        tl = Timeline(trace=out)
        rng = derive_rng(seed, "trace-test")

        def hop(k):
            if k < 50:
                tl.schedule(int(rng.integers(0, 10)), lambda: hop(k + 1), f"hop{k}")

        tl.schedule(0, lambda: hop(0), "start")
        tl.run()
        return out.getvalue()

    def test_same_seed_same_trace(self):
        assert self.scenario(4) == self.scenario(4)

    def test_different_seed_different_trace(self):
        assert self.scenario(4) != self.scenario(5)

    def test_line_format(self):
        first = self.scenario(1).splitlines()[0]
        assert first == "0\t0\tstart"


class TestRng:
    def test_reproducible(self):
        a = derive_rng(12, "memory", 3).random(5)
        b = derive_rng(12, "memory", 3).random(5)
        assert np.array_equal(a, b)

    def test_keys_select_distinct_streams(self):
        a = derive_rng(12, "memory", 3).random(5)
        b = derive_rng(12, "memory", 4).random(5)
        c = derive_rng(13, "memory", 3).random(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_adding_a_component_leaves_others_alone(self):
        before = derive_rng(1, "detector").random(3)
        derive_rng(1, "new-component").random(100)
        assert np.array_equal(derive_rng(1, "detector").random(3), before)

    def test_buffered_matches_block_draws(self):
        buf = BufferedRng(derive_rng(5, "x"), block=8)
        scalars = [buf.random() for _ in range(20)]
        ref = derive_rng(5, "x")
        expected = np.concatenate([ref.random(8), ref.random(8), ref.random(8)])[:20]
        assert np.allclose(scalars, expected)
        assert isinstance(buf.integers(0, 3), (int, np.integer))

    def test_seconds_to_ps(self):
        assert seconds_to_ps(1e-9) == 1000
        assert seconds_to_ps(0) == 0
