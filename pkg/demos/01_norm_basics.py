"""Walkthrough: the implicit partition norm on finitely supported vectors.

The norm is the unique fixed point of

    N(x) = max( sup|x_i| ,
                max over n >= 2 and successive sets E_1 < ... < E_n of
                    (1/log2(n+1)) * sum_i N(E_i x) )

Run:  python demos/01_norm_basics.py
"""

import math

from implicitnorm import (F_SYSTEM, G_SYSTEM, FinVector, brute_norm,
                          character, norm, norm_value, norming_functional)

e = FinVector.from_dense

print("=" * 70)
print("Single coordinates are normalized: the sup-norm branch wins")
print("=" * 70)
x = FinVector.basis(7)
r = norm(x)
print(f"  norm(e_7)      = {r.value}")
print(f"  character      = {r.character}   (only the sup norm attains it)")
print(f"  witness        = {r.witness.to_jsonable()}")

print()
print("=" * 70)
print("Two unit coordinates: the 2-part split beats the sup norm")
print("=" * 70)
x = e([1.0, 1.0])
r = norm(x)
print(f"  norm(e_1 + e_2) = {r.value}")
print(f"  2 / log2(3)     = {2 / math.log2(3)}")
print(f"  character       = {r.character}")
print(f"  witness         = {r.witness.to_jsonable()}")

print()
print("=" * 70)
print("The norm never sees signs or index positions")
print("=" * 70)
flipped = e([1.0, -1.0])
spread_out = x.spread(lambda i: 10 * i)
print(f"  norm(e_1 - e_2)      = {norm_value(flipped)}   (bitwise equal)")
print(f"  norm(e_10 + e_20)    = {norm_value(spread_out)} (bitwise equal)")

print()
print("=" * 70)
print("An independent oracle enumerates ALL successive-set partitions")
print("=" * 70)
x = e([1.0, -0.5, 2.0, 0.25, 1.0])
print(f"  interval DP : {norm_value(x)}")
print(f"  set oracle  : {brute_norm(x)}")
print("  The oracle allows sets that skip support points; interval")
print("  partitions always win, which is what makes the DP exact.")

print()
print("=" * 70)
print("The companion norm with weight log2(1 + n/2), minimum 3 parts")
print("=" * 70)
x = e([1.0, 1.0])
print(f"  g-norm(e_1 + e_2) = {norm_value(x, G_SYSTEM)}")
print(f"  2 / log2(5/2)     = {2 / math.log2(2.5)}")
print("  (two nonempty parts, padded to the 3-part minimum)")
print(f"  g-norm >= f-norm holds always: "
      f"{norm_value(x, G_SYSTEM) >= norm_value(x, F_SYSTEM)}")

print()
print("=" * 70)
print("Norming functionals from the witness tree")
print("=" * 70)
x = e([1.0, -1.0])
phi = norming_functional(x)
print(f"  functional      = {phi.to_jsonable()}")
print(f"  phi(x)          = {phi.apply(x)}  (attains the norm)")
y = e([0.3, 0.9, -0.4])
print(f"  phi(y)          = {phi.apply(y)} <= norm(y) = {norm_value(y)}")
print("  (membership in the dual unit ball)")

print()
print("=" * 70)
print("Characters: the smallest layer attaining the norm")
print("=" * 70)
for vec, label in [(FinVector.basis(3), "e_3"),
                   (e([1.0, 1.0]), "e_1+e_2"),
                   (e([1.0, 1.0, 1.0]), "ones(3)"),
                   (e([1.0] * 4), "ones(4)")]:
    ch = character(vec)
    print(f"  char({label:8s}) = {ch.value}")
