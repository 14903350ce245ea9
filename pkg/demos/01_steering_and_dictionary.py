"""Steering vectors and the over-complete dictionary.

Walks through the array model used everywhere else: per-sensor phases for a
plane-wave arrival, the Vandermonde structure of the dictionary, and why the
benchmark geometry (2.5-wavelength spacing) restricts the usable search
sector.
"""

import numpy as np

from raysep import AngleGrid, ArrayGeometry, build_dictionary, steering_vector

geom = ArrayGeometry(num_sensors=11, spacing_m=2.5, sound_speed_mps=1500.0)
freq = 1500.0  # one-meter wavelength, so spacing is 2.5 wavelengths

print("array:", geom)
print("\nsteering vector phases (degrees) for a 5-degree arrival:")
g = steering_vector(5.0, freq, geom)
print(np.round(np.degrees(np.angle(g)), 2))

print("\nreference sensor response is exactly 1:", g[geom.reference_index])
print("conjugate symmetry g(-5) == conj(g(5)):",
      np.allclose(steering_vector(-5.0, freq, geom), g.conj()))

grid = AngleGrid.uniform(-10.0, 10.0, 0.2)
d = build_dictionary(grid, freq, geom)
print(f"\ndictionary over the +/-10 degree sector: {d.matrix.shape[0]} x {d.matrix.shape[1]}")
ratios = d.matrix[1:, :] / d.matrix[:-1, :]
print("Vandermonde check, max row-ratio deviation:",
      f"{np.max(np.abs(ratios - ratios[0])):.2e}")

# With 2.5-wavelength spacing, steering repeats whenever sin(theta) moves by
# 1/2.5 = 0.4: a 1-degree arrival is indistinguishable from ~-22.6 degrees.
alias = np.degrees(np.arcsin(np.sin(np.radians(1.0)) - 0.4))
g_alias = steering_vector(alias, freq, geom)
print(f"\ngrating-lobe twin of a 1.0 degree arrival sits at {alias:.2f} degrees")
print("max |difference| between the two steering vectors:",
      f"{np.max(np.abs(g_alias - steering_vector(1.0, freq, geom))):.2e}")
print("-> benchmarks search the +/-10 degree sector that holds the eigenrays")
