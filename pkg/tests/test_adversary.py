import math

import numpy as np
import pytest

from qwdc import adversary
from qwdc.analysis import ParameterSpace
from qwdc.lm05 import default_config as lm05_config, run_lm05
from qwdc.protocol import ProtocolConfig, chunk_message, run_cqd, run_qsdc
from qwdc.walk import CoinParams, basis_state, evolve

Q = math.pi / 4
SPACE = ParameterSpace(3, 7, CoinParams(Q, Q, Q))


class TestExactOracles:
    def test_known_values(self):
        assert adversary.detection_exact("IR1", SPACE) == pytest.approx(0.5659877232142857, abs=1e-12)
        assert adversary.detection_exact("IR2", SPACE) == pytest.approx(0.5493064413265306, abs=1e-12)
        assert adversary.detection_exact("DoS", SPACE) == pytest.approx(5 / 6, abs=1e-12)
        assert adversary.detection_exact("MITM", SPACE) == adversary.detection_exact("DoS", SPACE)

    @pytest.mark.parametrize("N", [2, 3, 4, 7])
    def test_ir2_single_step_set_undetectable(self, N):
        assert adversary.detection_exact("IR2", SPACE.replace(N=N, nT=1)) == 0.0

    def test_ir1_undetectable_without_walk(self):
        assert adversary.detection_exact("IR1", SPACE.replace(nT=1)) == 0.0

    def test_lm05_quarter(self):
        assert adversary.lm05_ir_detection_exact() == 0.25

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            adversary.detection_exact("photon-splitting", SPACE)

    def test_charlie_exact_matches_mc(self):
        coin_r = CoinParams(Q, Q, Q)
        exact = adversary.charlie_guess_accuracy_exact(SPACE, coin_r, range(1, 8))
        acc, _, n = adversary.charlie_guess_mc(SPACE, 4000, np.random.default_rng(5), coin_r=coin_r)
        assert abs(acc - exact) <= 3 * math.sqrt(exact * (1 - exact) / n)


class TestMonteCarlo:
    @pytest.mark.parametrize("strategy", ["IR1", "IR2", "DoS"])
    def test_mc_within_three_sigma(self, strategy, backend):
        exact = adversary.detection_exact(strategy, SPACE)
        rate, _, n = adversary.detection_mc(strategy, SPACE, 20_000, np.random.default_rng(2))
        assert abs(rate - exact) <= 3 * math.sqrt(exact * (1 - exact) / n)

    def test_seeded_reproducible(self):
        a = adversary.detection_mc("IR2", SPACE, 5000, np.random.default_rng(8))
        b = adversary.detection_mc("IR2", SPACE, 5000, np.random.default_rng(8))
        assert a == b

    def test_lm05_mc(self):
        rate, _, n = adversary.lm05_ir_detection_mc(8000, np.random.default_rng(4))
        assert abs(rate - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)


class TestSingleState:
    def test_ir1_collapses(self, rng):
        s = evolve(basis_state(3, 0, 0), CoinParams(Q), 3)
        resent, rec = adversary.attack_ir1(s, rng)
        assert resent.allclose(basis_state(3, rec["x_E"], rec["c_E"]))

    def test_ir2_correct_guess_is_invisible(self):
        space = ParameterSpace(4, 1, CoinParams(0.6, 0.1, 0.2))
        s = basis_state(4, 2, 1)
        resent, rec = adversary.attack_ir2(s, space, np.random.default_rng(0))
        assert rec["t_E"] == 0 and resent.allclose(s)

    def test_ir2_space_mismatch(self, rng):
        with pytest.raises(ValueError):
            adversary.attack_ir2(basis_state(3, 0, 0), SPACE.replace(N=4), rng)

    def test_dos_output_shape(self, rng):
        fresh, rec = adversary.attack_dos(basis_state(3, 0, 0), SPACE, rng)
        assert fresh.N == 3 and 0 <= rec["t"] < 7


class TestInterceptors:
    def cfg(self, **kw):
        return adversary.fixed_config(SPACE, n=16, **kw)

    def test_ir1_usually_aborts(self):
        aborts = 0
        for seed in range(20):
            tr = run_qsdc(self.cfg(), chunk_message("1", 3), adversary.IR1Interceptor(), np.random.default_rng(seed))
            aborts += tr.aborted
            assert tr.attack.kind == "IR1"
            assert all(leg == "alice->bob" for leg in tr.attack.legs)
        assert aborts >= 18

    def test_aborted_run_has_no_decoding(self):
        tr = run_qsdc(self.cfg(), chunk_message("1", 3), adversary.DoSInterceptor(), np.random.default_rng(0))
        assert tr.aborted and tr.abort_step == "bob-check" and tr.decoded == {}

    def test_mitm_detected_at_first_check(self):
        tr = run_qsdc(self.cfg(), chunk_message("1010", 3), adversary.MitmInterceptor(), np.random.default_rng(1))
        assert tr.aborted and tr.abort_step == "bob-check"
        assert 0 < tr.attack.detection_rate <= 1

    def test_mitm_reads_everything_when_checks_are_ignored(self):
        tr = run_qsdc(self.cfg(error_tolerance=1.0), chunk_message("1010", 3), adversary.MitmInterceptor(),
                      np.random.default_rng(3))
        assert not tr.aborted
        assert tr.attack.extraction_accuracy == 1.0
        assert tr.decoded["alice"].bits == "1010"

    def test_mitm_cqd(self):
        cfg = self.cfg(error_tolerance=1.0)
        a, b = chunk_message("101", 3), chunk_message("011", 3)
        tr = run_cqd(cfg, a, b, adversary.MitmInterceptor(), np.random.default_rng(6))
        assert tr.attack.extraction_accuracy == 1.0

    def test_mitm_needs_both_legs(self):
        with pytest.raises(ValueError):
            run_qsdc(self.cfg(), chunk_message("1", 3), adversary.MitmInterceptor(["alice->bob"]),
                     np.random.default_rng(0))

    def test_bad_leg(self):
        with pytest.raises(ValueError):
            run_qsdc(self.cfg(), chunk_message("1", 3), adversary.IR1Interceptor(["charlie->alice"]),
                     np.random.default_rng(0))

    def test_untrusted_charlie_only_in_cqd(self):
        with pytest.raises(ValueError):
            run_qsdc(self.cfg(), chunk_message("1", 3), adversary.UntrustedCharlie(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            adversary.attack_untrusted_charlie(self.cfg(), chunk_message("1", 3), chunk_message("1", 3),
                                               np.random.default_rng(0), protocol="qsdc")

    def test_untrusted_charlie_report(self):
        report = adversary.attack_untrusted_charlie(self.cfg(error_tolerance=1.0), chunk_message("1011", 3),
                                                    chunk_message("0110", 3), np.random.default_rng(2))
        assert report.kind == "UntrustedCharlie"
        assert report.extraction_accuracy is not None
        assert set(report.symbol_guesses.values()) <= {0, 1, 2}

    def test_lm05_intercept(self):
        eve = adversary.make_interceptor("IR1", protocol="lm05")
        tr = run_lm05(lm05_config(16, 1.0), chunk_message("1", 2), eve, np.random.default_rng(0))
        assert tr.attack.kind == "LM05-IR"

    def test_make_interceptor(self):
        assert adversary.make_interceptor("none") is None
        assert isinstance(adversary.make_interceptor("IR2"), adversary.IR2Interceptor)
        with pytest.raises(ValueError):
            adversary.make_interceptor("DoS", protocol="lm05")
        with pytest.raises(ValueError):
            adversary.make_interceptor("quantum-cloning")

    def test_report_serializes(self):
        tr = run_qsdc(self.cfg(error_tolerance=1.0), chunk_message("11", 3), adversary.IR2Interceptor(),
                      np.random.default_rng(4))
        d = tr.attack.to_dict()
        assert d["kind"] == "IR2" and 0 <= d["detection_rate"] <= 1
        tr.to_json()

    def test_untrusted_charlie_exact_without_layer(self):
        cfg = self.cfg(error_tolerance=1.0, cqd_k=0, cqd_theta_r=Q)
        report = adversary.attack_untrusted_charlie(cfg, chunk_message("1011", 3), chunk_message("0110", 3),
                                                    np.random.default_rng(2))
        assert report.extraction_accuracy == 1.0
        assert adversary.charlie_guess_accuracy_exact(SPACE, CoinParams(Q, Q, Q), [0]) == pytest.approx(1.0)
