import numpy as np
import pytest

from atomchain.errors import OutOfRangeError
from atomchain.model import ChainConfig, ConstantSegment, CouplingFrame, RampSegment, Schedule, validate


def ramp(N=4, T=10.0, jx=(5.0, 0.0), W=-1.0):
    a = CouplingFrame.uniform(N, Jx=jx[0], W=W)
    b = CouplingFrame.uniform(N, Jx=jx[1], W=W)
    return Schedule(ChainConfig(N), (RampSegment(a, b, T),))


def test_frame_lengths_checked():
    with pytest.raises(OutOfRangeError, match=r"\(3, 3, 2\)"):
        CouplingFrame(np.ones(3), np.zeros(3), np.ones(3))


def test_frame_rejects_nan():
    with pytest.raises(OutOfRangeError, match="non-finite"):
        CouplingFrame([1.0, np.nan], [0, 0], [1.0])


def test_frame_is_read_only():
    f = CouplingFrame.uniform(3, Jx=1.0, W=0.5)
    with pytest.raises(ValueError):
        f.Jx[0] = 2.0


def test_chain_config_validation():
    with pytest.raises(OutOfRangeError):
        ChainConfig(1)
    with pytest.raises(OutOfRangeError):
        ChainConfig(4, interaction_sign="weird")
    assert ChainConfig(4).sign == -1
    assert ChainConfig(4, "antiferro").sign == 1


def test_eval_frame_midpoint():
    s = ramp()
    assert s.eval_frame(5.0).Jx[0] == pytest.approx(2.5)
    assert s.eval_frame(5.0).t == 5.0


def test_eval_frame_end_is_last_segment_end():
    a = CouplingFrame.uniform(3, Jx=1.0)
    b = CouplingFrame.uniform(3, Jx=2.0)
    s = Schedule(ChainConfig(3), (ConstantSegment.from_frame(a, 1.0), ConstantSegment.from_frame(b, 2.0)))
    assert s.eval_frame(1.0).Jx[0] == 2.0      # closed on the left
    assert s.eval_frame(3.0).Jx[0] == 2.0
    assert s.breakpoints == (0.0, 1.0, 3.0)


def test_eval_frame_tolerates_rounding_at_T():
    s = ramp(T=0.3)
    assert s.eval_frame(0.1 + 0.2).Jx[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("t", [-0.1, 10.5, float("nan")])
def test_eval_frame_out_of_range(t):
    with pytest.raises(OutOfRangeError):
        ramp().eval_frame(t)


def test_validate_clean_schedule():
    assert validate(ramp()) == []


def test_validate_reports_each_invariant():
    N = 3
    good = CouplingFrame.uniform(N, Jx=1.0, W=-1.0)
    jz = CouplingFrame(np.ones(N), np.full(N, 0.1), np.full(N - 1, -1.0))
    wrong_sign = CouplingFrame.uniform(N, Jx=1.0, W=1.0)
    s = Schedule(ChainConfig(N), (ConstantSegment.from_frame(good, 0.0), ConstantSegment.from_frame(jz, 1.0),
                                  ConstantSegment.from_frame(wrong_sign, 1.0)))
    kinds = [d.invariant for d in validate(s)]
    assert kinds == ["nonpositive duration", "fermionizable violated", "interaction sign"]
    assert validate(Schedule(ChainConfig(N), ()))[0].invariant == "empty schedule"


def test_validate_shape_mismatch():
    seg = ConstantSegment(np.ones(4), np.zeros(4), np.ones(3) * -1, 1.0)
    d = validate(Schedule(ChainConfig(3), (seg,)))
    assert [x.invariant for x in d] == ["shape mismatch"]


def test_reversed_schedule_mirrors_couplings():
    s = ramp()
    r = s.reversed()
    for t in (0.0, 2.5, 7.0, 10.0):
        np.testing.assert_array_equal(r.eval_frame(t).Jx, s.eval_frame(10.0 - t).Jx)
    assert r.metadata["reversed"] is True


def test_describe_is_serialisable():
    import json
    json.dumps(ramp().describe())
