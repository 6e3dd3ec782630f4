"""Walk through the Schottky deformation of a genus-two curve with two loops.

Run with ``python3 demos/schottky_deformation.py``.  Every number printed is
exact: coefficients live in Q[x, 1/x, 1/(1-x)] and series are truncated in
the multiplier variables.
"""

from schottkycft.compare import ComparisonCase, default_branches, ratio_report, u_parameters
from schottkycft.graphs import format_graph, he, path_str, two_loops
from schottkycft.schottky import INF, attractive_fixed_point, generic_config, multiplier, path_element

ORDER = 4

graph = two_loops()
print("Dual graph of the degenerate curve:")
print(format_graph(graph))

# Each loop carries a generator with fixed points at the two ends of its half-edges.
a, b = he("a"), he("b")
cfg = generic_config(graph, {a: 0, -a: INF, b: 1, -b: -1}, ORDER)

print(f"\nMultipliers and attracting fixed points up to order {ORDER}:")
for word in [(a,), (b,), (a, b), (a, -b), (b, a, b)]:
    cfg_w = generic_config(graph, {a: 0, -a: INF, b: 1, -b: -1}, ORDER + len(word))
    m = multiplier(path_element(cfg_w, word))
    fix = attractive_fixed_point(cfg, word)
    print(f"  {path_str(word):>8}  multiplier = {m}")
    print(f"  {'':>8}  fixed point = {fix.affine()}")

# The 4-valent vertex of the two-loop graph has two resolutions.  Compare the
# parameters on each side: every ratio must be a unit.
v0, branches = default_branches(graph)
for side in ("prime", "double_prime"):
    case = ComparisonCase(graph, v0, branches, side)
    report = ratio_report(case, 2)
    print(f"\nParameter ratios on the {side} side (all units: {report.all_units()}):")
    print(report.table())

print("\nCoordinates on the total family:")
for u in u_parameters(ComparisonCase(graph, v0, branches, "prime"), 1):
    print(f"  {u.name} = {u.formula()}")
