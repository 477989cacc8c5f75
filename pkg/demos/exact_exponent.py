"""Mean contour length L(h) from the exact recursion, and its growth exponent.

L(1) and L(2) come out as exact rationals; up to ``exact_cutoff`` every value
is exact, beyond it the recursion runs in extended precision.  The local
log-log slopes climb towards (1 + sqrt 17)/2.
"""

import math

from cornerlab.series import DELTA2, L_sequence, fit_exponent, indicial_roots

H = 1024

s = L_sequence(H, exact_cutoff=64)
print("L(1) =", s.value(1), "  L(2) =", s.value(2), "  L(3) =", s.value(3))
print(f"largest relative error bound of the float values: {s.max_relative_error():.2e}")

fit = fit_exponent(s, h_lo=16)
print("\n     h   local slope")
for h, v in zip(fit.h, fit.slopes):
    print(f"{h:6d}   {v:.6f}")
print(f"\nextrapolated {fit.extrapolated:.5f}, Richardson {fit.richardson:.5f}, "
      f"target {DELTA2:.5f} = (1 + sqrt 17)/2")
print("indicial roots:", ", ".join(f"{r:.5f}" for r in sorted(indicial_roots())))
print(f"so the contour of a height-h pair has length about h^{DELTA2:.3f}, "
      f"and a cycle of diameter n = h^2 about n^{DELTA2 / 2:.3f}")
assert math.isclose(float(s.value(2)), 52 / 3)
