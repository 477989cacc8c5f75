"""How big is the contour through the origin?

Traces the origin's component in growing windows and reports the tail of
its marginal height and of its diameter.  Both are heavy: a sizeable
fraction of contours is still open at the largest window.
"""

from cornerlab import montecarlo as mc

SAMPLES = 3000

P = mc.estimate_P((4, 8, 16, 32, 64), samples=SAMPLES, seed=7)
print("P(height > h):")
for h, y, e in zip(P.x, P.y, P.yerr):
    print(f"  h={int(h):4d}  {y:.4f} +- {e:.4f}")
print(f"fitted 2 gamma = {P.exponent:.3f}  CI {P.exponent_ci[0]:.3f}..{P.exponent_ci[1]:.3f}"
      f"  (reference {mc.TWO_GAMMA:.3f})")

r = mc.estimate_closure(SAMPLES, seed=7, max_window=1 << 12)
print(f"\nclosed within window 4096: {r.estimate:.3f}  ({r.censored} open)")
for n, y in zip(r.extra["tail_n"], r.extra["tail_P"]):
    print(f"  P(diameter > {n:5d}) = {y:.3f}")

c = mc.estimate_crossing(128, 400, seed=7)
print(f"\nleft-right crossing of a 128 square: {c.estimate:.3f}, up-down {c.extra['ud_estimate']:.3f}, "
      f"both at once: {c.violations['both_crossings']}")
