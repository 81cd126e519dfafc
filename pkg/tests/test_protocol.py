import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qwdc.lm05 import default_config as lm05_config, run_lm05
from qwdc.protocol import (
    CheckReport,
    Message,
    ProtocolConfig,
    StatePrep,
    chunk_message,
    eavesdrop_check,
    run_cqd,
    run_qsdc,
    unchunk,
)
from qwdc.walk import CoinParams, basis_state, evolve

Q = math.pi / 4


class TestChunking:
    def test_three_bit_symbols(self):
        m = chunk_message("110010", 8)
        assert m.symbols == (6, 2) and m.padding == 0

    def test_tail_padding(self):
        # '10110' in 2-bit groups is 10 11 0 -> the last group is zero-filled to 00
        m = chunk_message("10110", 4)
        assert m.symbols == (2, 3, 0)
        assert m.padding == 1
        assert unchunk(m) == "10110"

    def test_non_power_of_two_cycle(self):
        assert chunk_message("1101", 5).symbols == (3, 1)
        assert chunk_message("101", 3).symbols == (1, 0, 1)

    def test_empty(self):
        m = chunk_message("", 4)
        assert m.symbols == () and unchunk(m) == ""

    @pytest.mark.parametrize("bits", ["102", "ab", "1 0"])
    def test_bad_bits(self, bits):
        with pytest.raises(ValueError):
            chunk_message(bits, 4)

    def test_bad_cycle(self):
        with pytest.raises(ValueError):
            chunk_message("1", 1)

    def test_round_trip_random_strings(self):
        r = np.random.default_rng(1000)
        for _ in range(1000):
            bits = "".join(r.choice(["0", "1"], size=int(r.integers(0, 40))))
            N = int(r.integers(2, 33))
            m = chunk_message(bits, N)
            assert unchunk(m) == bits
            assert all(0 <= s < N for s in m.symbols)

    @given(st.text(alphabet="01", max_size=64), st.integers(2, 64))
    def test_round_trip_property(self, bits, N):
        assert unchunk(chunk_message(bits, N)) == bits

    def test_overflowing_symbol_gives_empty_bits(self):
        assert Message.from_symbols([4], 5).bits == ""


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"N": 1}, {"n": 3}, {"n": 6}, {"nT": 0}, {"theta_mode": "sometimes"},
        {"error_tolerance": -0.1}, {"error_tolerance": 1.5},
    ])
    def test_invalid(self, kw):
        with pytest.raises((ValueError, TypeError)):
            ProtocolConfig(**kw)

    def test_capacity(self):
        assert ProtocolConfig(n=16).capacity == 4


class TestEavesdropCheck:
    def _preps(self, N, count, rng, coin):
        preps, states = [], {}
        for i in range(count):
            t, x, c = int(rng.integers(7)), int(rng.integers(N)), int(rng.integers(2))
            preps.append(StatePrep(i, t, x, c, coin))
            states[i] = evolve(basis_state(N, x, c), coin, t)
        return preps, states

    def test_untouched_states_pass(self, rng):
        preps, states = self._preps(5, 8, rng, CoinParams(1.0, 0.2, 0.3))
        report = eavesdrop_check(states, preps, 0.0, rng)
        assert report.mismatched == () and report.passed and report.error_rate == 0

    def test_replaced_state_is_caught(self, rng):
        coin = CoinParams(Q, Q, Q)
        prep = StatePrep(0, 0, 0, 0, coin)
        report = eavesdrop_check({0: basis_state(3, 1, 1)}, [prep], 0.0, rng)
        assert report.mismatched == (0,) and not report.passed

    def test_random_replacement_rate(self):
        # a uniformly random basis state survives the check 1 time in 2N
        r = np.random.default_rng(77)
        N, trials = 3, 20_000
        coin = CoinParams(0.0, 0.0, 0.0)
        fails = 0
        for _ in range(trials):
            prep = StatePrep(0, 0, int(r.integers(N)), int(r.integers(2)), coin)
            fake = basis_state(N, int(r.integers(N)), int(r.integers(2)))
            fails += bool(eavesdrop_check({0: fake}, [prep], 0.0, r).mismatched)
        p = 1 - 1 / (2 * N)
        assert abs(fails / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)

    def test_index_mismatch(self, rng):
        preps, states = self._preps(3, 2, rng, CoinParams(0.4))
        with pytest.raises(ValueError):
            eavesdrop_check({5: states[0]}, preps[:1], 0.0, rng)

    def test_tolerance(self):
        assert CheckReport("s", (0, 1, 2, 3), (1,), 0.25).passed
        assert not CheckReport("s", (0, 1, 2, 3), (1, 2), 0.25).passed


class TestRuns:
    @pytest.mark.parametrize("N", [2, 3, 5, 8])
    def test_qsdc_delivers(self, N):
        cfg = ProtocolConfig(N=N, n=16)
        bits = "1" * (cfg.capacity * max(1, int(math.log2(N))))
        tr = run_qsdc(cfg, chunk_message(bits, N), rng=np.random.default_rng(N))
        assert not tr.aborted and tr.decoded["alice"].bits == bits

    def test_partition_sizes(self, rng):
        tr = run_qsdc(ProtocolConfig(N=4, n=32), chunk_message("01101100", 4), rng=rng)
        part = tr.partition
        assert (len(part["check"]), len(part["message"]), len(part["decoy"])) == (16, 8, 8)
        assert sorted(part["check"] + part["message"] + part["decoy"]) == list(range(32))

    def test_message_too_long(self, rng):
        with pytest.raises(ValueError):
            run_qsdc(ProtocolConfig(N=4, n=8), chunk_message("101010", 4), rng=rng)

    def test_wrong_cycle(self, rng):
        with pytest.raises(ValueError):
            run_qsdc(ProtocolConfig(N=4), chunk_message("10", 8), rng=rng)

    def test_transcript_deterministic(self):
        cfg = ProtocolConfig(N=5, n=16)
        msg = chunk_message("10011011", 5)
        a = run_qsdc(cfg, msg, rng=np.random.default_rng(42)).to_json()
        b = run_qsdc(cfg, msg, rng=np.random.default_rng(42)).to_json()
        assert a == b
        doc = json.loads(a)
        assert doc["protocol"] == "qsdc" and doc["aborted"] is False

    def test_cqd_dialogue(self):
        cfg = ProtocolConfig(N=4, n=16)
        a, b = chunk_message("0110", 4), chunk_message("1101", 4)
        tr = run_cqd(cfg, a, b, rng=np.random.default_rng(9))
        assert not tr.aborted
        assert tr.decoded["bob"].bits == "0110" and tr.decoded["alice"].bits == "1101"
        ann = tr.announcements
        assert 1 <= ann["k"] <= cfg.nT
        assert ann["sums"] == [(x + y) % 4 for x, y in zip(a.symbols + (0, 0), b.symbols + (0, 0))]

    def test_cqd_pinned_layer(self, rng):
        cfg = ProtocolConfig(N=3, n=16, cqd_k=3, cqd_theta_r=0.5)
        tr = run_cqd(cfg, chunk_message("1", 3), chunk_message("0", 3), rng=rng)
        assert tr.announcements["k"] == 3 and tr.announcements["theta_r"] == 0.5

    def test_lm05_delivers(self, rng):
        tr = run_lm05(lm05_config(16), chunk_message("1011", 2), rng=rng)
        assert not tr.aborted and tr.decoded["alice"].bits == "1011"

    def test_fixed_theta_mode(self, rng):
        cfg = ProtocolConfig(N=3, theta_mode="fixed", coin=CoinParams(0.3, 0.1, 0.2))
        tr = run_qsdc(cfg, chunk_message("1", 3), rng=rng)
        assert {p.coin for p in tr.preps} == {cfg.coin}
