"""
What local reasoning misses
===========================

{ x := 1 } [3/4] { x := x + 1 } against "x = 1 with probability 1/2".  The
left branch alone already gives 3/4, so the right branch could go.  But the
right branch inherits the pre [x + 1 = 1] and the post [x = 1], and `skip`
would need [x = 0] => [x = 1].  The branch is judged by what it does, not by
the slack the left branch leaves.
"""

from importlib import resources

from pexp_slicer.lang import SKIP, parse_program, pretty_print
from pexp_slicer.slicing import greedy_slice, local_specifications, replace_subprogram
from pexp_slicer.vcgen import discharge, vcg

r = parse_program((resources.files("pexp_slicer") / "fixtures" / "choice34.pexp").read_text())
f, g = r.spec

for s in local_specifications(r.prog, f, g, r.mode):
    print(s)

without = replace_subprogram(r.prog, (1, "right"), SKIP)
print("\nwithout the right branch:", pretty_print(without))
print("still meets the spec:", discharge(vcg(f, without, g), r.space).valid)
print("slicer output:", pretty_print(greedy_slice(r.prog, f, g, r.mode, r.space).prog))
