"""Walkthrough: greedy splitting and flat averages that imitate l1.

Greedy splitting cuts a vector into maximal successive pieces of norm at
most eps; for normalized vectors with small coordinates the piece count
is pinned between two computable bounds.  Averaging m consecutive flat
blocks produces a vector whose partition sums barely exceed its norm,
with an explicit equivalence certificate.

Run:  python demos/03_splitting_and_averages.py
"""

from implicitnorm import (FinVector, average_split_experiment, greedy_split,
                          l1_average_block, norm_value, split_count_bounds)

e = FinVector.from_dense


def normalized(x):
    return x.scale(1.0 / norm_value(x))


print("=" * 70)
print("Greedy splitting at scale eps")
print("=" * 70)
y = normalized(e([1.0] * 8))
prof = greedy_split(y, 0.5)
print(f"  normalized ones(8), eps = 1/2 -> {prof.count} pieces")
print(f"  piece norms: {[round(v, 12) for v in prof.piece_norms]}")
print("  Each piece is a PAIR of norm exactly 1/2: the weight of 8 parts")
print("  is exactly twice the weight of 2 parts, and boundary values are")
print("  included by the maximal-support rule.")
print(f"  pieces reassemble the vector exactly: {prof.reconstruct() == y}")

print()
print("=" * 70)
print("Piece-count bounds h(eps) <= count <= H(eps)")
print("=" * 70)
for eps in (1.0, 0.5, 0.25):
    h, H = split_count_bounds(eps)
    print(f"  eps = {eps:<5}: counts confined to [{h}, {H}]")
print("  (for normalized vectors with sup norm at most eps/2)")

y = normalized(e([1.0 + 0.05 * (i % 3) for i in range(24)]))
prof = greedy_split(y, 0.5)
h, H = split_count_bounds(0.5)
print(f"  example: 24 wobbly coefficients at eps = 1/2 -> "
      f"{prof.count} pieces, inside [{h}, {H}]")

print()
print("=" * 70)
print("Flat averages imitating the unit basis of l1^m")
print("=" * 70)
for m, n_len in ((1, 9), (4, 15), (8, 31)):
    seq, cert = l1_average_block(m, n_len)
    print(f"  m = {m}, block length {n_len:3d}: certificate "
          f"w({m * n_len})/w({n_len}) = {cert:.6f}")
print("  Sums of these blocks trap the coefficient l1-mass within the")
print("  certificate factor: the flat functional gives the lower bound,")
print("  the triangle inequality the upper.")

print()
print("=" * 70)
print("The average of many flat blocks splits poorly")
print("=" * 70)
rep = average_split_experiment(1.0, 2, 8, 127)
print(f"  8 blocks of length 127, averaged and cut into 2 parts:")
print(f"  best partition sum  = {rep.lhs:.6f}")
print(f"  norm + eps          = {rep.rhs:.6f}")
print(f"  within budget       = {rep.passed}")
print("  Cutting an l1-like average cannot gain more than eps over its")
print("  norm, no matter where the two parts fall.")

print()
print("=" * 70)
print("The preconditions gate dishonest parameters")
print("=" * 70)
try:
    average_split_experiment(1.0, 2, 4, 127)
except Exception as exc:
    print(f"  m too small   -> {exc}")
try:
    average_split_experiment(1.0, 2, 8, 31)
except Exception as exc:
    print(f"  cert too big  -> {exc}")
