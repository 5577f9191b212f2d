"""Morphable planar arrays: element layout, steering, and shape effects.

A rigid 2x2 half-wavelength array cannot tell a wave arriving from
azimuth +phi apart from one arriving from -phi: its x/z lattice phases
are even in azimuth.  Morphing the elements along y breaks that mirror
symmetry.  This script walks through the geometry and shows the effect
directly on steering-vector correlations.

Run:  python demos/01_morphable_arrays.py
"""

import numpy as np

from fimsim import (FimGeometry, PathAngles, element_positions, project_surface,
                    random_surface, steering_vector)

wavelength = 3e8 / 28e9
geom = FimGeometry.half_spaced(2, 2, wavelength, -wavelength, wavelength)
print(f"2x2 array, wavelength {wavelength * 1e3:.2f} mm, "
      f"morphing range +-{geom.y_max / wavelength:.0f} wavelength")

flat = geom.flat_surface()
print("\nflat element positions (mm):")
print(np.round(element_positions(geom, flat) * 1e3, 3))

morphed = random_surface(geom, 7)
print("\na random morphed shape (fractions of a wavelength):")
print(np.round(morphed / wavelength, 3))
print("positions stay on the x/z lattice; only the y column moved:")
print(np.round(element_positions(geom, morphed) * 1e3, 3))

# the mirror pair: same elevation, opposite azimuth
left = PathAngles(azimuth=-0.6, elevation=1.9)
right = PathAngles(azimuth=+0.6, elevation=1.9)

for label, shape in (("flat", flat), ("morphed", morphed)):
    b_left = steering_vector(geom, shape, left)
    b_right = steering_vector(geom, shape, right)
    corr = abs(np.vdot(b_left, b_right))
    print(f"\n{label}: |<b(-phi), b(+phi)>| = {corr:.4f}"
          + ("  (indistinguishable)" if corr > 0.999 else "  (resolvable)"))

# shapes always live inside the morphing box
wild = morphed * 10
print("\nprojecting a shape that left the box:",
      np.round(project_surface(geom, wild) / wavelength, 3))
