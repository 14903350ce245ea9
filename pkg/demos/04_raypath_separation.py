"""One full separation run: five coherent eigenrays at 0 dB SNR.

Reproduces the headline comparison on synthetic data: the covariance-domain
sparse solver resolves all five closely spaced arrivals while unsmoothed
MUSIC and snapshot-domain reweighted recovery blur or miss them. Prints the
peak table and optionally plots the three spectra over the truth.
"""

import numpy as np

from raysep import (
    AngleGrid,
    ArrayGeometry,
    EstimatorSettings,
    NoiseSpec,
    WaveguideScenario,
    detect_peaks,
    eigenray_angles,
    estimate_spectra,
    synthesize_broadband,
)

geom = ArrayGeometry(num_sensors=11, spacing_m=2.5, sound_speed_mps=1500.0)
scenario = WaveguideScenario(
    water_depth_m=100.0,
    range_m=2000.0,
    source_depth_m=50.0,
    receiver_depths_m=37.5 + 2.5 * np.arange(11),
    num_paths=5,
)
paths = eigenray_angles(scenario)
truth = np.sort(paths.angles_deg)
print("true arrival angles:", np.round(truth, 3))

bins = synthesize_broadband(
    paths, (1000.0, 2000.0), 32, 150, NoiseSpec(snr_db=0.0, seed=2024), geom, "coherent"
)
grid = AngleGrid.uniform(-10.0, 10.0, 0.2)
settings = EstimatorSettings(
    geometry=geom,
    grid=grid,
    num_paths=5,
    algorithms=("subspace_cs", "reweighted_cs", "music", "cbf"),
)
spectra = estimate_spectra(bins, settings)

print(f"\n{'algorithm':>14s}  detected peak angles [deg]")
for name, spectrum in spectra.items():
    peaks = detect_peaks(spectrum, 5)
    print(f"{name:>14s}  {np.round(peaks, 2)}")
print("\nsubspace_cs should place five peaks near the truth; the others")
print("illustrate the coherent-arrival failure modes they are known for.")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name in ("subspace_cs", "reweighted_cs", "music"):
        v = np.abs(np.asarray(spectra[name].values))
        ax.plot(grid.angles_deg, v / v.max(), label=name)
    for t in truth:
        ax.axvline(t, color="k", linestyle=":", linewidth=0.8)
    ax.set_xlabel("angle [deg]")
    ax.set_ylabel("normalized spectrum")
    ax.set_title("Separation of five coherent raypaths, SNR 0 dB")
    ax.legend()
    fig.tight_layout()
    fig.savefig("raypath_separation.png", dpi=120)
    print("saved raypath_separation.png")
except ImportError:
    print("(matplotlib not installed; skipping the plot)")
