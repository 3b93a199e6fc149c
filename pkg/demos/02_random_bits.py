"""
Four random bits
================

r is built from four fair bits.  Only the top bit matters for r >= 8, and
only one of its outcomes needs to be kept.
"""

from importlib import resources

from pexp_slicer.expectation import simplify, format_expectation
from pexp_slicer.lang import parse_program, pretty_print
from pexp_slicer.slicegraph import build_slice_graph, export_dot, min_slice
from pexp_slicer.slicing import greedy_slice, local_specifications
from pexp_slicer.vcgen import wpre_suffix

r = parse_program((resources.files("pexp_slicer") / "fixtures" / "randint.pexp").read_text())
f, g = r.spec

print("wpre^1 =", format_expectation(simplify(wpre_suffix(1, r.prog, g))))

# what each branch of the last choice has to achieve
for s in local_specifications(r.prog, f, g, r.mode):
    if s.path[:1] == (4,):
        print(s)

# greedy removes spans first and then the left branch body
print("\ngreedy:\n" + pretty_print(greedy_slice(r.prog, f, g, r.mode, r.space).prog))

# the graph search prefers `skip` over `b3 := 0` because skip edges weigh 1/2
sg = build_slice_graph(r.prog, f, g, r.mode, r.space)
prog, weight = min_slice(sg)
print(f"\ngraph (weight {weight}):\n" + pretty_print(prog))
print(f"\n{sg.graph.number_of_nodes()} nodes, {len(sg.shortcuts())} shortcut edges")

with open("randint.dot", "w") as fh:
    fh.write(export_dot(sg))
print("wrote randint.dot")
