"""
Where does the energy go?
=========================

The modulated surface pushes reflected power out of the specular direction into
lobes near asin(lambda / 24 mm). Bistatic cuts are computed from the array
factor of the column sums.
"""
import numpy as np

from pgmrcs.cellmodel import ConstantProvider, IncidenceSpec, SurrogateProvider, reference_palette
from pgmrcs.layout import build_layout
from pgmrcs.metrics import REFERENCE_WEIGHTS, FrequencyGrid, threshold_band
from pgmrcs.scatter import bistatic_cut, grating_angle_deg, monostatic_spectrum, scattered_power, strongest_lobe

palette = reference_palette()
provider = SurrogateProvider(palette)
pec = ConstantProvider([-1.0] * 7)
layout = build_layout(REFERENCE_WEIGHTS, palette)

for f in (18.0, 31.1):
    pat = bistatic_cut(layout, provider, f)
    theta, level = strongest_lobe(pat)
    i0 = np.argmin(np.abs(pat.theta_deg))
    print(f"{f:5.1f} GHz: specular {pat.level_dB[i0]:6.1f} dB, lobe at {theta:+.2f} deg ({level:.1f} dB),",
          f"expected {grating_angle_deg(f, 24.0):.2f} deg")
    ratio = scattered_power(pat) / scattered_power(bistatic_cut(layout, pec, f))
    print(f"        power in the cut relative to PEC: {ratio:.3f}")

# oblique incidence, levels against a PEC plate in its specular direction
grid = FrequencyGrid(10, 35, 251)
for pol in ("TE", "TM"):
    spec = monostatic_spectrum(layout, provider, grid, IncidenceSpec(40.0, pol))
    bands = threshold_band(spec)
    text = ", ".join(f"{b.f_lo:.2f}-{b.f_hi:.2f} GHz" for b in bands) or "none"
    print(f"40 deg {pol}: min {spec.rcsr_dB.min():.1f} dB, bands below -10 dB: {text}")
