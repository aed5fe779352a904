"""
Screening GQ(s,t) parameters with the Krein condition
=====================================================

The closed-form Krein matrices of a putative GQ(s,t) can be evaluated for
any s, t >= 1.  A negative one rules the parameters out; the pattern that
appears is the classical s^2 >= t, t^2 >= s.
"""

from cckrein.generators import gq_feasibility, gq_feasibility_sweep

print(gq_feasibility(2, 5).message())
print(gq_feasibility(2, 4).message())
print(gq_feasibility(3, 3).message())

# '#' marks infeasible, 'o' boundary, '.' feasible.
sweep = gq_feasibility_sweep(range(2, 13), range(2, 13))
symbol = {"infeasible": "#", "boundary": "o", "feasible": "."}
print("\n    t " + "".join(f"{t:>3}" for t in range(2, 13)))
for s in range(2, 13):
    print(f"s={s:>2}  " + "".join(f"{symbol[sweep[(s, t)].verdict]:>3}" for t in range(2, 13)))

# Nothing beyond the two scalar matrices ever goes negative.
print("\nother entries nonnegative everywhere:",
      all(v.other_entries_nonnegative for v in sweep.values()))
