import json
from fractions import Fraction

import numpy as np
import pytest

from brc.channels import (BOTH, DEGRADED, NEITHER, SEMI_DEGRADED, BrcChannel, BrcCrChannel,
                          ChannelError, broadcast_part, bsc_broadcast, channel_from_json,
                          classify_brc_cr, induced_joint, make_test_channel, random_broadcast,
                          silence_relays, tie_relays)
from brc.prob import DiscretePMF, mutual_information, uniform

from conftest import FIXTURES


def load(name):
    return channel_from_json((FIXTURES / name).read_text())


def test_law_validation():
    with pytest.raises(ChannelError):
        BrcCrChannel(("X", "X1"), (2, 1), ("Y1", "Z1", "Y2"), (2, 1, 1), np.full(4, 0.6))
    with pytest.raises(ChannelError):
        BrcCrChannel(("X",), (2,), ("Y1", "Z1", "Y2"), (2, 1, 1), np.full(4, 0.5))
    with pytest.raises(ChannelError):
        BrcCrChannel(("X", "X1"), (2, 1), ("Y1", "Z1", "Y2"), (2, 1, 1), [1.5, -0.5, 0.5, 0.5])


def test_json_round_trip_exact_and_float():
    for ch in (make_test_channel("semi-degraded-cascade", p="1/10", q="1/5", r="1/10"),
               bsc_broadcast(0.1, 0.2)):
        back = channel_from_json(json.dumps(ch.to_json()))
        assert type(back) is type(ch) and back.exact == ch.exact
        assert np.array_equal(back.law, ch.law)


def test_json_errors():
    good = make_test_channel("neither").to_json()
    bad = json.loads(json.dumps(good))
    bad["rows"] = bad["rows"][:1]
    with pytest.raises(ChannelError, match="rows"):
        channel_from_json(bad)
    bad = json.loads(json.dumps(good))
    bad["outputs"][0]["name"] = "Q"
    with pytest.raises(ChannelError, match="signature"):
        channel_from_json(bad)
    with pytest.raises(ChannelError):
        channel_from_json({"inputs": []})


def test_induced_joint_bsc_mutual_information():
    bc = bsc_broadcast(0.11, 0.0)
    joint = induced_joint(bc, uniform(("X",), (2,)))
    h = -(0.11 * np.log2(0.11) + 0.89 * np.log2(0.89))
    assert mutual_information(joint, {"X"}, {"Y1"}) == pytest.approx(1 - h, abs=1e-12)
    # with p2 = 0 the second output copies the first
    assert mutual_information(joint, {"Y1"}, {"Y2"}) == pytest.approx(1.0, abs=1e-12)


def test_induced_joint_keeps_auxiliaries_memoryless():
    rng = np.random.default_rng(4)
    probs = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
    dist = DiscretePMF(("U", "X", "X1"), (2, 2, 2), probs)
    ch = make_test_channel("degraded-cascade", exact=False, a=0.1, b=0.2, c=0.1)
    joint = induced_joint(ch, dist)
    assert mutual_information(joint, {"U"}, {"Y1", "Z1", "Y2"}, {"X", "X1"}) < 1e-12
    with pytest.raises(ChannelError):
        induced_joint(ch, uniform(("X",), (2,)))


def test_fixture_classes():
    assert classify_brc_cr(load("degraded.json")).kind == DEGRADED
    assert classify_brc_cr(load("semi.json")).kind == SEMI_DEGRADED
    assert classify_brc_cr(load("neither.json")).kind == NEITHER


def test_exact_chains_have_zero_violation():
    d = classify_brc_cr(load("degraded.json"))
    assert d.violations["I.1"] == 0.0 and d.violations["I.2"] == 0.0
    s = classify_brc_cr(load("semi.json"))
    assert s.violations["II.1"] == 0.0 and s.violations["II.2"] == 0.0


def test_noiseless_is_both():
    # Y1 = Y2 = Z1 = X satisfies all four chains
    assert classify_brc_cr(make_test_channel("noiseless")).kind == BOTH


@pytest.mark.parametrize("name", ["degraded.json", "semi.json", "neither.json"])
def test_class_invariant_under_output_relabeling(name):
    ch = load(name)
    perms = {n: list(reversed(range(s))) for n, s in zip(ch.output_names, ch.output_sizes)}
    assert classify_brc_cr(ch.relabel_outputs(perms)).kind == classify_brc_cr(ch).kind


def test_classifier_rejects_non_common_relay():
    with pytest.raises(ChannelError):
        classify_brc_cr(bsc_broadcast(0.1, 0.1))


def test_structural_helpers():
    bc = random_broadcast(np.random.default_rng(0))
    brc = silence_relays(bc)
    assert isinstance(brc, BrcChannel) and brc.input_sizes == (2, 1, 1)
    assert np.allclose(broadcast_part(brc).law, bc.law)
    cr = make_test_channel("degraded-cascade", a="1/20", b="1/10", c="1/10")
    tied = tie_relays(cr)
    assert tied.output_sizes[1] == tied.output_sizes[3]
    # Z2 copies Z1 exactly
    for x, x1, x2 in np.ndindex(*tied.input_sizes):
        row = tied.law[x, x1, x2]
        assert sum(row[y1, z1, y2, z2] for y1, z1, y2, z2 in np.ndindex(row.shape)
                   if z1 != z2) == 0
    assert broadcast_part(cr).law[0, 0, 0] == Fraction(19, 20) * Fraction(9, 10) * Fraction(9, 10) \
        + Fraction(1, 20) * Fraction(1, 10) * Fraction(9, 10)
