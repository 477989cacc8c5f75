"""Sample a window, trace its closed contours and look at one of them closely.

Run from the repository root::

    python3 demos/window_and_cycles.py [seed] [size]

Writes ``window.svg`` and ``heights.svg`` into the current directory.
"""

import sys

from cornerlab.builders import cycle_from_pair_hikers, cycle_from_pair_trace
from cornerlab.contours import all_cycles, level_set_census, pair_of
from cornerlab.lattice import WindowSpec
from cornerlab.render import render_height_svg, render_window_svg


def main(seed=1, size=48):
    w = WindowSpec.centered(seed, size).build()
    cycles = all_cycles(w)
    census = level_set_census(w, cycles=cycles)
    print(f"{size}x{size} window, seed {seed}: {len(cycles)} closed cycles, "
          f"total length {census.total_length}, trichotomy violations {census.violations}")

    c = max(cycles, key=lambda c: c.length)
    p = pair_of(w, c)
    print(f"largest cycle: length {c.length}, diameter {c.diameter}, {c.direction}, level {c.level}")
    print(f"  marginals: height {p.height}, columns {p.first.offset}..{p.first.end}, "
          f"rows {p.second.offset}..{p.second.end}; pair level {p.level}")
    # rebuild the cycle from its marginals alone, two ways
    print("  rebuilt by tracing:", cycle_from_pair_trace(p) == c,
          " rebuilt by the hikers:", cycle_from_pair_hikers(p) == c)

    with open("window.svg", "w") as fh:
        fh.write(render_window_svg(w, scale=10))
    with open("heights.svg", "w") as fh:
        fh.write(render_height_svg(w, scale=10))
    print("wrote window.svg and heights.svg")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
