"""
The coin game, total correctness
================================

Alice and Bob flip until their coins agree; n counts the rounds.  Alice's
inversion of her coin does not change the distribution of n.
"""

from importlib import resources

from pexp_slicer.lang import parse_program, pretty_print
from pexp_slicer.semantics import simulate
from pexp_slicer.slicing import greedy_slice, local_specifications, resolve
from pexp_slicer.vcgen import discharge, vcg_total


def load(name):
    return parse_program((resources.files("pexp_slicer") / "fixtures" / f"{name}.pexp").read_text())


r = load("coin_game")
f, g = r.spec
report = discharge(vcg_total(f, r.prog, g), r.space)
print(report.format())

# three specs on the loop body: invariant, termination, variant decrease
body = resolve(r.prog, (4, "body"))
for s in local_specifications(r.prog, f, g, r.mode):
    if s.path == (4, "body"):
        print(s, "->", "valid" if discharge(s.vcg(body), r.space).valid else "INVALID")

res = greedy_slice(r.prog, f, g, r.mode, r.space)
print("\n" + pretty_print(res.prog))
for rm in res.removals:
    print(rm)

# sanity check by sampling: P(n = 3) should be near 1/8
counts = simulate(r.prog, {"K": 3, "n": 0, "a": 0, "b": 0}, 4000, seed=1)
hits = sum(k for s, k in counts.items() if s["n"] == 3)
print(f"\nsampled P(n = 3) = {hits / 4000:.3f}")

# asking for a decrease probability of 1 is too much
bad = load("coin_game_eps1")
for e in discharge(vcg_total(bad.spec[0], bad.prog, bad.spec[1]), bad.space).failures:
    print("\nfails:", e.vc)
    print("  at", ", ".join(f"{k}={v}" for k, v in e.result.state))
