"""
The exact phase table
=====================

Closed forms in exact rational arithmetic: per-edge configuration
probabilities, mean collision counts, the two fixation margins, and the
predicted long-run regime for every pair of opinion counts.
"""

from fractions import Fraction

from axelrod_lab import h1, h2, predict_regime, probabilities, symmetric_fixation_condition

print(f"{'q1':>3} {'q2':>3} {'p2':>8} {'h1':>10} {'h2':>12}  regime")
for q1 in range(2, 7):
    for q2 in range(q1, 7):
        p = probabilities(q1, q2)
        print(f"{q1:>3} {q2:>3} {str(p.p2):>8} {str(h1(q1, q2)):>10} "
              f"{str(h2(q1, q2)):>12}  {predict_regime(q1, q2).value}")

print("""
Notes.  The first-order margin h1 weighs frozen-pair hit counts against
single-walker supply; it certifies fixation once positive, which happens
for every pair summing to at least seven.  The refined margin h2 also
credits walker-walker encounters and is positive on the q1 + q2 = 6 line,
where h1 alone falls short:
""")
print(f"  h1(2,4) = {h1(2, 4)}   (negative, first-order bound insufficient)")
print(f"  h2(2,4) = {h2(2, 4)}   (positive, refined bound settles it)")

print("\nEqual opinion counts, any number of features: F/q < (1 - 1/q)^(F-1)")
for F, q in [(2, 2), (2, 3), (2, 5), (3, 5), (5, 10), (10, 10)]:
    verdict = symmetric_fixation_condition(F, q)
    print(f"  F={F:2d} q={q:2d}: {'holds' if verdict else 'fails'}")
