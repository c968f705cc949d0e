"""
Autoregressive spectral estimation and spectral peak analysis.

The AR model is fitted with a tapered Burg recursion and evaluated on a
2**15 point grid; downstream code works on its amplitude (square root of
``sigma^2 / |A(e^jw)|^2``) normalized to a maximum of one. Peak prominences and widths follow the usual topographic definitions
(same conventions as ``scipy.signal.peak_prominences``/``peak_widths``), except
that a plateau is reported at its leftmost sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_POINTS = 2 ** 15
AR_ORDER = 500
SEARCH_BAND_HZ = (0.6, 4.0)
NOISE_FLOOR_DB = -60.0


class SpectralFitError(ArithmeticError):
    """The AR recursion cannot be run on the given samples."""


@dataclass(frozen=True, eq=False)
class ArModel:
    """All-pole model ``x[n] + a1 x[n-1] + ... + ap x[n-p] = e[n]``."""

    coefficients: np.ndarray   # leading 1, length order + 1
    noise_variance: float
    reflection: np.ndarray     # length order

    @property
    def order(self):
        return len(self.coefficients) - 1


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    magnitudes: np.ndarray
    rate_hz: float = 125.0
    channel: int = 1

    @property
    def n_points(self):
        return len(self.magnitudes)

    @property
    def half(self):
        """Magnitudes on the non-negative frequency indices ``0..N/2``."""
        return self.magnitudes[:self.n_points // 2 + 1]


@dataclass(frozen=True)
class SpectralPeak:
    index: int
    magnitude: float
    width: float
    prominence: float


def fit_ar(samples, order=AR_ORDER, floor_db=NOISE_FLOOR_DB):
    """
    Tapered Burg estimate of an AR model.

    Each reflection coefficient is the weighted Burg ratio
    ``-2 sum(w f b) / sum(w (f^2 + b^2))`` with a parabolic taper ``w`` over
    the current forward/backward error sequences, which removes most of the
    phase-dependent frequency bias plain Burg shows on sinusoids.

    The denominators are loaded as if white noise ``floor_db`` below the
    frame power were present. Without it, band-passed frames (a stopband many
    tens of dB deep) drive an order-500 polynomial to coefficients of order
    1e9 and ``|A(e^jw)|`` loses all precision near the spectral peaks.

    Parameters
    ----------
    samples : array_like or Frame
        Expected to be band-passed (zero mean); no detrending is applied, since
        a removed mean turns into a DC pole for nearly noiseless input.
    order : int
        Model order; requires ``len(samples) > order``.

    Returns
    -------
    ArModel
        The reflection coefficients satisfy ``|k| < 1``, so the model is
        stable.
    """
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    n = len(x)
    if order < 1:
        raise ValueError("order must be >= 1")
    if n <= order:
        raise SpectralFitError(f"need more than {order} samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise SpectralFitError("non-finite samples")
    scale = np.max(np.abs(x))
    if scale == 0 or np.ptp(x) <= 1e-12 * scale:
        raise SpectralFitError("zero-variance (constant) input")

    energy = np.dot(x, x)
    a = np.zeros(order + 1)
    a[0] = 1.0
    refl = np.zeros(order)
    var = energy / n
    f = x[1:].copy()
    b = x[:-1].copy()
    load = 2.0 * 10.0 ** (floor_db / 10.0) * var
    for m in range(order):
        length = len(f)
        u = (np.arange(length) - (length - 1) / 2) / ((length + 1) / 2)
        w = 1.0 - u * u
        den = np.dot(w, f * f + b * b) + load * w.sum()
        k = -2.0 * np.dot(w, f * b) / den
        k = min(max(k, -1.0 + 1e-12), 1.0 - 1e-12)
        refl[m] = k
        a[1:m + 2] = a[1:m + 2] + k * a[m::-1]
        var *= 1.0 - k * k
        f, b = (f + k * b)[1:], (b + k * f)[:-1]
    return ArModel(a, float(var), refl)


def step_down(coefficients):
    """Reflection coefficients of a monic polynomial (backward Levinson)."""
    a = np.asarray(coefficients, dtype=float)
    if a[0] != 1.0:
        a = a / a[0]
    a = a[1:].copy()
    p = len(a)
    k = np.zeros(p)
    for m in range(p - 1, -1, -1):
        km = a[m]
        k[m] = km
        if m == 0:
            break
        if abs(km) >= 1.0:
            break
        a = (a[:m] - km * a[m - 1::-1]) / (1.0 - km * km)
    return k


def is_stable(model: ArModel):
    refl = model.reflection if model.reflection is not None else step_down(model.coefficients)
    return bool(np.all(np.abs(refl) < 1.0))


def ar_psd(model: ArModel, n_points=N_POINTS, rate_hz=125.0, channel=1, kind="amplitude"):
    """
    Normalized AR spectrum on ``n_points`` bins covering ``[0, rate)``.

    ``kind="amplitude"`` (default) returns ``sqrt(sigma^2 / |A|^2)`` scaled to a
    maximum of one, so peak heights compare like tone amplitudes;
    ``kind="power"`` returns the normalized power spectrum itself.
    """
    if kind not in ("amplitude", "power"):
        raise ValueError("kind must be 'amplitude' or 'power'")
    if not is_stable(model):
        raise SpectralFitError("unstable AR model")
    gain = np.abs(np.fft.rfft(model.coefficients, n_points)) ** 2
    half = model.noise_variance / np.maximum(gain, np.finfo(float).tiny)
    full = np.empty(n_points)
    nh = len(half)
    full[:nh] = half
    full[nh:] = half[1:n_points - nh + 1][::-1]
    full /= full.max()
    if kind == "amplitude":
        np.sqrt(full, out=full)
    return SpectrumEstimate(full, float(rate_hz), channel)


def ar_spectrum(samples, order=AR_ORDER, n_points=N_POINTS, rate_hz=125.0, channel=1):
    """Fit an AR model to ``samples`` and return its normalized spectrum."""
    return ar_psd(fit_ar(samples, order), n_points, rate_hz, channel)


def index_to_bpm(index, n_points=N_POINTS, rate_hz=125.0):
    if np.any(np.asarray(index) < 0) or np.any(np.asarray(index) > n_points / 2):
        raise ValueError(f"index outside [0, {n_points // 2}]")
    return index * rate_hz * 60.0 / n_points


def bpm_to_index(bpm, n_points=N_POINTS, rate_hz=125.0):
    """Real-valued (unrounded) frequency index of ``bpm``."""
    if np.any(np.asarray(bpm) < 0) or np.any(np.asarray(bpm) > 30.0 * rate_hz):
        raise ValueError("bpm outside [0, Nyquist]")
    return bpm * n_points / (60.0 * rate_hz)


def hz_to_index(hz, n_points=N_POINTS, rate_hz=125.0):
    return hz * n_points / rate_hz


# -- peak analysis -----------------------------------------------------------

def _sparse_table(x, op, fill):
    """Row ``j`` holds ``op`` over ``x[i:i + 2**j]`` (padded with ``fill``)."""
    n = len(x)
    levels = max(1, int(n).bit_length())
    table = np.full((levels, n), fill, dtype=float)
    table[0] = x
    for j in range(1, levels):
        h = 1 << (j - 1)
        m = n - (1 << j) + 1
        if m <= 0:
            break
        table[j, :m] = op(table[j - 1, :m], table[j - 1, h:h + m])
    return table


def _range_query(table, op, lo, hi):
    """``op`` over ``x[lo..hi]`` inclusive, vectorized over index arrays."""
    length = hi - lo + 1
    j = np.floor(np.log2(length)).astype(int)
    return op(table[j, lo], table[j, hi - (1 << j) + 1])


def _left_extent(table, pos, accept):
    """Smallest ``s <= pos`` with ``accept(block)`` true for all of ``x[s:pos]``."""
    s = pos.copy()
    for lvl in range(table.shape[0] - 1, -1, -1):
        cand = s - (1 << lvl)
        ok = cand >= 0
        ok[ok] = accept(table[lvl, cand[ok]], ok)
        s[ok] = cand[ok]
    return s


def _right_extent(table, pos, accept):
    """Largest ``e >= pos`` with ``accept`` true for all of ``x[pos+1:e+1]``."""
    n = table.shape[1]
    e = pos.copy()
    for lvl in range(table.shape[0] - 1, -1, -1):
        start = e + 1
        ok = start + (1 << lvl) - 1 <= n - 1
        ok[ok] = accept(table[lvl, start[ok]], ok)
        e[ok] = e[ok] + (1 << lvl)
    return e


def analyze_peaks(x):
    """
    Locate every local maximum of ``x`` with its prominence and width.

    A peak is a sample (or a run of equal samples) strictly higher than both
    neighbours; plateaus are reported at their leftmost sample and the array
    borders never hold a peak. Prominence is the height above the higher of
    the two lowest points reached before meeting a strictly higher sample (or
    the border) on either side. Width is measured at half prominence with
    linear interpolation between samples.

    Returns
    -------
    indices : ndarray of int
    prominences : ndarray
    widths : ndarray
    """
    x = np.asarray(x, dtype=float)
    empty = np.array([], dtype=int), np.array([]), np.array([])
    if len(x) < 3:
        return empty
    # run-length compress so plateaus become single samples
    change = np.flatnonzero(np.diff(x) != 0) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [len(x) - 1]))
    c = x[starts]
    if len(c) < 3:
        return empty
    p = np.flatnonzero((c[1:-1] > c[:-2]) & (c[1:-1] > c[2:])) + 1
    if p.size == 0:
        return empty
    v = c[p]

    tmax = _sparse_table(c, np.maximum, -np.inf)
    tmin = _sparse_table(c, np.minimum, np.inf)

    s = _left_extent(tmax, p, lambda blk, ok: blk <= v[ok])
    e = _right_extent(tmax, p, lambda blk, ok: blk <= v[ok])
    left_min = _range_query(tmin, np.minimum, s, p - 1)
    right_min = _range_query(tmin, np.minimum, p + 1, e)
    prom = v - np.maximum(left_min, right_min)

    h = v - prom / 2
    ql = _left_extent(tmin, p, lambda blk, ok: blk > h[ok]) - 1
    qr = _right_extent(tmin, p, lambda blk, ok: blk > h[ok]) + 1
    jl = ends[ql]
    jr = starts[qr]
    left_ip = jl + (h - x[jl]) / (x[jl + 1] - x[jl])
    right_ip = jr - (h - x[jr]) / (x[jr - 1] - x[jr])
    return starts[p], prom, right_ip - left_ip


def find_peaks(spec: SpectrumEstimate, search_lo_hz=SEARCH_BAND_HZ[0],
               search_hi_hz=SEARCH_BAND_HZ[1]):
    """
    Peaks of the normalized spectrum whose index lies in the search band.

    Prominence and width are computed against the whole non-negative half of
    the spectrum, so a peak near the band edge is not truncated.
    """
    nyq = spec.rate_hz / 2
    if not 0 <= search_lo_hz < search_hi_hz <= nyq:
        raise ValueError(f"invalid search band ({search_lo_hz}, {search_hi_hz}) Hz")
    n = spec.n_points
    lo = int(np.ceil(hz_to_index(search_lo_hz, n, spec.rate_hz)))
    hi = int(np.floor(hz_to_index(search_hi_hz, n, spec.rate_hz)))
    if hi < lo:
        raise ValueError("search band contains no spectral index")
    half = spec.half
    idx, prom, width = analyze_peaks(half)
    keep = (idx >= lo) & (idx <= hi)
    return [SpectralPeak(int(i), float(half[i]), float(w), float(pr))
            for i, pr, w in zip(idx[keep], prom[keep], width[keep])]
