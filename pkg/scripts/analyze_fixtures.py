#!/usr/bin/env python3
"""Structural and continuity report for the bundled example machines."""

from omegastream import fixture_path, nft
from omegastream.analysis import AnalysisContext, is_continuous
from omegastream.words import format_upword

FIXTURES = ["replace.json", "double.json", "normalize.json"]


def main():
    for name in FIXTURES:
        T = nft.load(fixture_path(name))
        print(f"== {name} ==")
        print(f"  states: {sorted(T.states)}")
        print(f"  initial: {sorted(T.initial)}  final: {sorted(T.final)}")
        print(f"  trim={nft.is_trim(T)} clean={nft.is_clean(T)} "
              f"unambiguous={nft.is_unambiguous(T)} "
              f"productive={nft.is_productive(T)}")
        ok, witness = is_continuous(T)
        if ok:
            print("  continuous: yes")
            ctx = AnalysisContext(nft.normalize(T))
            for C in ctx.comp_subsets(frozenset(nft.normalize(T).initial)):
                sep = ctx.is_separable(C)
                tag = "separable" if sep else "not separable"
                print(f"  compatible {sorted(C)}: {tag}")
        else:
            u = "".join(witness.u)
            ul = "".join(witness.u_loop)
            w0, w1 = (format_upword(w) for w in witness.words)
            print(f"  continuous: no (u={u!r}, loop={ul!r}, "
                  f"outputs {w0} vs {w1})")
        print()


if __name__ == "__main__":
    main()
