"""
A first slice
=============

x is set from y, then decremented by 1 or 2 on a fair coin.  The spec asks
for x >= 0 with probability at least 1/2 when y*y <= 1/2.
"""

from pexp_slicer.lang import parse_program, pretty_print
from pexp_slicer.semantics import wp_eval
from pexp_slicer.slicegraph import build_slice_graph, min_slice
from pexp_slicer.vcgen import discharge, vcg, suffix_wpres
from pexp_slicer.expectation import format_expectation
from importlib import resources

src = (resources.files("pexp_slicer") / "fixtures" / "prog1.pexp").read_text()
r = parse_program(src)
f, g = r.spec
print(pretty_print(r.prog))

# ground truth: wp of [x >= 0], exact since there are no loops
table = wp_eval(r.prog, g, r.space)
for s, v in table.items():
    if s["x"] == 0:  # x is overwritten anyway
        print(f"  y={s['y']!s:>5}  wp={v}")

# the verification conditions hold
print(discharge(vcg(f, r.prog, g), r.space).format())

# backwards from the post: wpre^3 = g, wpre^2, wpre^1
for j, w in enumerate(suffix_wpres(r.prog, g), 1):
    print(f"wpre^{j}: {format_expectation(w)}")

# wpre^2 => wpre^3, so the choice can go
res = min_slice(build_slice_graph(r.prog, f, g, r.mode, r.space))
print("\nslice:", pretty_print(res.prog), " weight", res.weight)
for rm in res.removals:
    print(rm)
