"""
Reflection of the seven patch cells
===================================

Each cell is a square patch on a grounded 1.6 mm substrate. The gap between
neighbouring patches sets the resonance, where the reflection phase passes
through 0 deg (a PEC reflects with 180 deg).
"""
import numpy as np

from pgmrcs.cellmodel import IncidenceSpec, find_resonances, reference_palette, reflection_coefficient
from pgmrcs.errors import SlabResonanceError

palette = reference_palette()
freqs = np.linspace(5, 35, 301)

print("gap (mm)  patch (mm)  resonance (GHz)")
for cell in palette:
    res = find_resonances(cell, freqs)
    print(f"{cell.gap_g:8.2f}  {cell.patch_edge:10.2f}  {res[0]:15.2f}")

# phase at a few frequencies: wider gaps resonate higher, so at 12 GHz they still
# sit on the capacitive (positive phase) side
for f in (12.0, 18.0, 31.1):
    ph = np.degrees(np.angle([reflection_coefficient(c, f) for c in palette]))
    print(f"{f:5.1f} GHz  phases", np.round(ph, 1))

# lossless cells reflect everything
g = reflection_coefficient(palette[3], freqs)
print("max ||Gamma| - 1| =", np.max(np.abs(np.abs(g) - 1)))

# at oblique incidence TE and TM separate
for pol in ("TE", "TM"):
    inc = IncidenceSpec(40.0, pol)
    print(f"40 deg {pol}: resonances", [round(r, 2) for r in find_resonances(palette[3], freqs, inc)])

# the substrate is a quarter wave thick near 24.86 GHz at normal incidence; the
# model refuses to evaluate right on that pole
try:
    reflection_coefficient(palette[0], 24.8624)
except SlabResonanceError as e:
    print("pole guard:", e)
