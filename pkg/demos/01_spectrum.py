"""
Synthesize one exercise recording and look at a window's AR spectrum.

Run: python3 demos/01_spectrum.py
"""

import numpy as np

from ppgtrack import (ar_spectrum, exercise_spec, find_peaks, index_to_bpm,
                      synthesize_recording)
from ppgtrack.tracker import recording_frames

rec, truth = synthesize_recording(exercise_spec(0))
print(f"{rec.id}: {len(rec) / rec.sample_rate_hz:.0f} s, {len(truth)} windows")
for f, amp, mask, onset in exercise_spec(0).artifact_tones:
    print(f"  artifact {f:.2f} Hz  x{amp:.2f}  channels={mask}  from {onset:.1f} s")

# window 30 sits near the HR peak of the ramp, with artifacts active
w = 30
frames = recording_frames(rec)[w]
print(f"\nwindow {w}: true HR {truth.bpm_per_window[w]:.1f} BPM")
for fr in frames:
    spec = ar_spectrum(fr, channel=fr.channel)
    peaks = sorted(find_peaks(spec), key=lambda p: -p.magnitude)[:4]
    listing = "  ".join(f"{index_to_bpm(p.index):6.1f} BPM ({p.magnitude:.2f})" for p in peaks)
    print(f"  ch{fr.channel} top peaks: {listing}")

# the AR peak agrees with the zero-padded periodogram on a clean tone
x = np.sin(2 * np.pi * 1.6 * np.arange(1000) / 125.0)
ar_peak = int(np.argmax(ar_spectrum(x).half))
fft_peak = int(np.argmax(np.abs(np.fft.rfft(x, 2 ** 15))))
print(f"\n1.6 Hz tone: AR index {ar_peak}, periodogram index {fft_peak}")
