"""Render PGM spectrograms of a few characteristic synthetic sounds.

The images are plain binary PGM (viewable with most image tools, or convert
with e.g. ImageMagick). Frequency runs bottom-up, time left to right, and
the gray scale spans the top 80 dB of the clip's power.

Run:  python demos/spectrogram_render.py
"""

from pathlib import Path

import numpy as np

from audioera import AudioClip, emit_pgm, render_spectrogram

SR = 22050
OUT = Path(__file__).parent / "output"


def chirp(f0, f1, duration_s):
    t = np.arange(int(duration_s * SR)) / SR
    phase = 2 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2 * duration_s))
    return 0.5 * np.sin(phase)


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(0)
    t = np.arange(4 * SR) / SR

    sounds = {
        "steady_tone": 0.5 * np.sin(2 * np.pi * 1000.0 * t),
        "rising_chirp": chirp(200.0, 8000.0, 4.0),
        "noise_bursts": 0.02 * rng.normal(size=len(t))
        + np.where((t % 1.0) < 0.2, 0.4, 0.0) * rng.normal(size=len(t)),
    }
    for name, x in sounds.items():
        clip = AudioClip(samples=np.clip(x, -1, 1), sample_rate=SR)
        image = render_spectrogram(clip)
        path = OUT / f"{name}.pgm"
        path.write_bytes(emit_pgm(image))
        print(f"wrote {path} ({image.shape[1]} x {image.shape[0]})")


if __name__ == "__main__":
    main()
