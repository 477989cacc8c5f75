"""Linear-entropy relatives: 2-xor bonds, trixor and 4-xor sites.

Checks the local constraint of trixor (every site has an even number of
0-labelled neighbours) and reports cluster-size exponents with bootstrap
intervals next to published simulation ranges.
"""

import numpy as np

from cornerlab.xor import even_zero_violations, gen_2xor, gen_trixor, variant_study

f = gen_2xor(((0, 15), (0, 15)), seed=3)
rows = f.horizontal
same = [bool((rows[:, j] == rows[:, j + 1]).all() or (rows[:, j] != rows[:, j + 1]).all())
        for j in range(rows.shape[1] - 1)]
print("2-xor: adjacent rows of horizontal bonds agree or complement:", all(same))

t = gen_trixor(128, seed=3)
print("trixor: fraction of 1-sites", round(float(t.states.mean()), 3),
      " even-neighbourhood violations", even_zero_violations(t.states))

for name in ("trixor", "4xor"):
    r = variant_study(name, size=128, samples=6, seed=3)
    print(f"\n{name}: {r['clusters']} clusters, largest covers {r['largest_fraction']:.3f} of a field")
    print(f"  gamma {r['gamma']:.3f} CI {np.round(r['gamma_ci'], 3)}  reference {r['reference']['gamma']}")
    print(f"  delta {r['delta']:.3f} CI {np.round(r['delta_ci'], 3)}  reference {r['reference']['delta']}")
