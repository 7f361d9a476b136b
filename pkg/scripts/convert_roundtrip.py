#!/usr/bin/env python3
"""Round-trip demo: streaming machine -> two-way transducer -> streaming
machine, with a behavioral comparison on sample inputs."""

from omegastream import convert, fixture_path, sst
from omegastream.sst import check_bounded, eval_limit
from omegastream.twoway import eval_2dt
from omegastream.words import format_upword, parse_upword

SAMPLES = ["(001)^w", "(012)^w", "002(02)^w", "(2)^w", "1(01)^w"]


def main():
    for name in ("replace_sst.json", "double_sst.json"):
        S = sst.load(fixture_path(name))
        T2 = convert.sst_to_twoway(S)
        S2 = convert.twoway_to_sst(T2)
        print(f"== {name} ==")
        print(f"  two-way states: {len(T2.states)}, "
              f"lookbehind states: {len(T2.lookbehind.states)}")
        print(f"  round-trip machine: {len(S2.states)} states, "
              f"1-bounded: {check_bounded(S2, 1)}")
        for s in SAMPLES:
            x = parse_upword(s)
            y = eval_limit(S, x)
            if y is None:
                print(f"  {s:12s} -> outside the domain")
                continue
            mid = eval_2dt(T2, x, 30).output
            back = eval_limit(S2, x)
            agree = mid == y.first(30) and back.first(100) == y.first(100)
            print(f"  {s:12s} -> {format_upword(y):18s} round trip "
                  f"{'agrees' if agree else 'DISAGREES'}")
        print()


if __name__ == "__main__":
    main()
