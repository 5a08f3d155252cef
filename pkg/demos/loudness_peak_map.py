"""Loudness-peak expressive range: where does each generator put its bang?

Two toy "generators" both produce 6-second rumble clips with one sharp
impact. Generator one habitually places the impact early; generator two
scatters it anywhere. Summarizing every clip by just two numbers (when the
RMS peak happens, and how far it sticks out above the clip's average
loudness) turns that habit into a visible cluster on a scatter diagram.

Run:  python demos/loudness_peak_map.py
"""

from pathlib import Path

import numpy as np

from audioera import AudioClip, emit_era_svg, loudness_peak_metrics, rms_series

SR = 22050
OUT = Path(__file__).parent / "output"


def rumble_clip(rng, impact_at_s, impact_gain=6.0, duration_s=6.0):
    """Low noise bed plus one enveloped burst at the requested time."""
    n = int(duration_s * SR)
    bed = 0.02 * rng.normal(size=n)
    burst = int(0.4 * SR)
    start = min(int(impact_at_s * SR), n - burst)
    bed[start : start + burst] += impact_gain * 0.02 * rng.normal(size=burst) * np.hanning(burst)
    return AudioClip(samples=np.clip(bed, -1, 1), sample_rate=SR)


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(7)

    rows = []
    for i in range(60):
        # "early_impact" clusters its bang in the first 1.5 seconds
        clip = rumble_clip(rng, impact_at_s=rng.uniform(0.2, 1.5))
        rows.append(("early_impact", f"{i:02d}", loudness_peak_metrics(rms_series(clip))))
        # "anywhere" has no such habit
        clip = rumble_clip(rng, impact_at_s=rng.uniform(0.0, 5.5))
        rows.append(("anywhere", f"{i:02d}", loudness_peak_metrics(rms_series(clip))))

    svg_path = OUT / "loudness_peak_map.svg"
    svg_path.write_text(emit_era_svg(rows, reference_source=None))

    for source in ("early_impact", "anywhere"):
        times = [m.peak_time_s for s, _i, m in rows if s == source]
        mags = [m.relative_magnitude for s, _i, m in rows if s == source]
        print(
            f"{source:>13}: peak time {np.mean(times):4.2f} +- {np.std(times):4.2f} s, "
            f"relative magnitude {np.mean(mags):4.2f}"
        )
    print(f"wrote {svg_path}")


if __name__ == "__main__":
    main()
