"""Regenerate the channel and aux-spec fixtures under fixtures/."""

import json
from fractions import Fraction
from pathlib import Path

from brc.channels import classify_brc_cr, make_test_channel
from brc.sampling import AuxSpec

OUT = Path(__file__).resolve().parent.parent / "fixtures"

CHANNELS = {
    "degraded": ("degraded-cascade", dict(a=Fraction(1, 20), b=Fraction(1, 10), c=Fraction(1, 10))),
    "semi": ("semi-degraded-cascade", dict(p=Fraction(1, 10), q=Fraction(1, 5), r=Fraction(1, 10))),
    "neither": ("neither", dict(p=Fraction(1, 10))),
}
EXPECT = {"degraded": "Degraded", "semi": "SemiDegraded", "neither": "Neither"}


def main():
    OUT.mkdir(exist_ok=True)
    for name, (kind, params) in CHANNELS.items():
        ch = make_test_channel(kind, exact=True, **params)
        got = classify_brc_cr(ch).kind
        assert got == EXPECT[name], (name, got)
        (OUT / f"{name}.json").write_text(json.dumps(ch.to_json(), indent=1) + "\n")
    spec = AuxSpec(samples=128, refine_steps=4, block=64)
    (OUT / "aux_default.json").write_text(json.dumps(spec.to_json(), indent=1) + "\n")


if __name__ == "__main__":
    main()
