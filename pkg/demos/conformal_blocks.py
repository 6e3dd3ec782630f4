"""Conformal blocks from glued three-point functionals, and moves acting on them.

Run with ``python3 demos/conformal_blocks.py``.
"""

from fractions import Fraction

from schottkycft.blocks import dumbbell_pants, factorization, four_point_block, graph_block, torus_block
from schottkycft.moves import MoveWord, compose
from schottkycft.virasoro import VirasoroParams, gram_matrix

c = Fraction(7, 3)

print("Gram matrix at level 2 for c = 7/3, weight 2/5:")
for row in gram_matrix(VirasoroParams(c, Fraction(2, 5)), 2):
    print("  ", [str(x) for x in row])

print("\nFour-point block, external weights 1/5, 2/3, 1/7, 3/2 and internal weight 5/4:")
block = four_point_block(c, Fraction(1, 5), Fraction(2, 3), Fraction(1, 7), Fraction(3, 2), Fraction(5, 4), 3)
for k, coeff in enumerate(block.coefficients()):
    print(f"  q^{k}: {coeff}")

print("\nOne-point torus block with the identity inserted counts states level by level:")
print("  ", [str(x) for x in torus_block(c, 0, Fraction(2, 3), 6).coefficients()])

# A genus-two block on the dumbbell: two loops joined by a separating edge c.
pants = dumbbell_pants(c, "2/5", "1/3", "3/7")
print("\nGenus-two block on the dumbbell, order 2:")
print("  ", graph_block(pants, 2).body)

direct, glued = factorization(pants, "c", 3)
print("\nCutting along the separating edge and regluing gives the same block:", direct.body == glued.body)

# Two half-Dehn twists are a full twist: the body returns, with a phase.
out = compose(MoveWord.parse("HD:c HD:c", pants), graph_block(pants, 2))
print("\nFull twist on c: body unchanged =", out.block.body == graph_block(pants, 2).body,
      "| phase", out.formal_phase())

# A fusing move needs the fusing kernel, which is not a finite computation here.
stop = compose(MoveWord.parse("HD:c F:c:13", pants), graph_block(pants, 1))
print("Fusing along c:", stop)
