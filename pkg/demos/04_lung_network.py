"""
A Bayesian network as a program
===============================

The lung-disease network, written as eight probabilistic instructions, and
sliced for two different queries.
"""

from importlib import resources

from pexp_slicer.expectation import format_expectation
from pexp_slicer.lang import parse_program
from pexp_slicer.lang.exprs import format_fraction
from pexp_slicer.slicegraph import build_slice_graph, min_slice
from pexp_slicer.slicing import format_path
from pexp_slicer.vcgen import wpre_suffix

for name in ("bn_x", "bn_tl"):
    r = parse_program((resources.files("pexp_slicer") / "fixtures" / f"{name}.pexp").read_text())
    f, g = r.spec
    w = wpre_suffix(1, r.prog, g, total=True)
    print(f"post {format_expectation(g)}: probability {format_expectation(w)}")
    res = min_slice(build_slice_graph(r.prog, f, g, r.mode, r.space))
    print(f"  weight {format_fraction(res.weight)}, {len(res.removed_paths())} instructions removed")
    for rm in res.removals:
        for path, code in zip(rm.paths, rm.code):
            print(f"    {format_path(path):22} {code.splitlines()[0]}")
    print()
