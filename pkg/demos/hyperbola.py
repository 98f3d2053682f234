"""A fiber that gets ever closer to the model without touching it.

The model is the branch {(a, 1/a) : a > 0}; we only observe the second
coordinate, here -1. Walking right along the line of points with that
observation, the distance to the curve keeps shrinking towards 1 but never
reaches it, so an exact minimizer does not exist and decoders need slack.
"""
from iocert.constructions import hyperbola_demo, hyperbola_svg

rows = hyperbola_demo(-1.0)
print("        t     distance   vertical gap")
for r in rows:
    print(f"{r.t:9.0e}   {r.distance:.8f}   {r.vertical_gap:.8f}")

with open("hyperbola.svg", "w") as fh:
    fh.write(hyperbola_svg(rows, -1.0))
print("\nplot written to hyperbola.svg")
