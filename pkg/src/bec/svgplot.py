"""Native SVG 1.1 rendering of edge spectra.

Draws the tracked dispersion bands as polylines over a shaded picture of the
per-momentum bulk regions (energies outside the model's scan window), with
axes, ticks, and a dashed line at the fiducial level.  No plotting library is
used; the output is deterministic for a fixed input.
"""

import numpy as np

_W, _H = 900, 620
_ML, _MR, _MT, _MB = 70, 20, 20, 50
_BAND_COLORS = ("#c0392b", "#2471a3", "#1e8449", "#b7950b", "#884ea0",
                "#17a589", "#a04000", "#2e4053")


def _fmt(x):
    return "%.2f" % x


def _ticks(lo, hi, target=8):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = np.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


class _Frame:
    def __init__(self, klo, khi, llo, lhi):
        self.klo, self.khi = klo, khi
        self.llo, self.lhi = llo, lhi

    def x(self, k):
        return _ML + (k - self.klo) / (self.khi - self.klo) * (_W - _ML - _MR)

    def y(self, lam):
        return (_H - _MB
                - (lam - self.llo) / (self.lhi - self.llo) * (_H - _MT - _MB))


def _polyline(points, color, width=1.6, dash=None):
    pts = " ".join("%s,%s" % (_fmt(x), _fmt(y)) for x, y in points)
    extra = ' stroke-dasharray="6,4"' if dash else ""
    return ('<polyline fill="none" stroke="%s" stroke-width="%s"%s '
            'points="%s"/>' % (color, _fmt(width), extra, pts))


def _bulk_polygons(model, gap, frame, n=240):
    """Grey polygons covering the per-momentum bulk regions."""
    ks = np.linspace(frame.klo, frame.khi, n)
    los, his = [], []
    for k in ks:
        lo, hi = model.scan_window(k, gap)
        los.append(max(lo, frame.llo) if np.isfinite(lo) else frame.llo)
        his.append(min(hi, frame.lhi) if np.isfinite(hi) else frame.lhi)
    parts = []
    top = [(frame.x(ks[0]), frame.y(frame.lhi))]
    top += [(frame.x(k), frame.y(h)) for k, h in zip(ks, his)]
    top += [(frame.x(ks[-1]), frame.y(frame.lhi))]
    bot = [(frame.x(ks[0]), frame.y(frame.llo))]
    bot += [(frame.x(k), frame.y(lo)) for k, lo in zip(ks, los)]
    bot += [(frame.x(ks[-1]), frame.y(frame.llo))]
    for poly in (top, bot):
        pts = " ".join("%s,%s" % (_fmt(x), _fmt(y)) for x, y in poly)
        parts.append('<polygon fill="#d5d8dc" stroke="none" points="%s"/>'
                     % pts)
    return parts


def spectrum_svg(bands, model, gap, k_window, level=0.0):
    """SVG text for a tracked edge spectrum."""
    klo, khi = -float(k_window), float(k_window)
    lams = np.concatenate([b.lams for b in bands]) if bands else np.array([])
    cand = [level]
    if np.isfinite(gap.lo):
        cand.append(gap.lo)
    if np.isfinite(gap.hi):
        cand.append(gap.hi)
    if len(lams):
        cand.extend([lams.min(), lams.max()])
    llo, lhi = min(cand), max(cand)
    pad = 0.15 * (lhi - llo if lhi > llo else 1.0)
    frame = _Frame(klo, khi, llo - pad, lhi + pad)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'width="%d" height="%d" viewBox="0 0 %d %d">' % (_W, _H, _W, _H),
        '<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (_W, _H),
    ]
    parts += _bulk_polygons(model, gap, frame)

    # axes box
    parts.append('<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
                 'stroke="black" stroke-width="1"/>'
                 % (_fmt(_ML), _fmt(_MT), _fmt(_W - _ML - _MR),
                    _fmt(_H - _MT - _MB)))
    for t in _ticks(frame.klo, frame.khi):
        x = frame.x(t)
        parts.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="black"/>'
                     % (_fmt(x), _fmt(_H - _MB), _fmt(x), _fmt(_H - _MB + 6)))
        parts.append('<text x="%s" y="%s" font-size="12" '
                     'text-anchor="middle">%g</text>'
                     % (_fmt(x), _fmt(_H - _MB + 20), t))
    for t in _ticks(frame.llo, frame.lhi):
        y = frame.y(t)
        parts.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="black"/>'
                     % (_fmt(_ML - 6), _fmt(y), _fmt(_ML), _fmt(y)))
        parts.append('<text x="%s" y="%s" font-size="12" '
                     'text-anchor="end">%g</text>'
                     % (_fmt(_ML - 9), _fmt(y + 4), t))
    parts.append('<text x="%s" y="%s" font-size="13" '
                 'text-anchor="middle">k</text>'
                 % (_fmt((_ML + _W - _MR) / 2.0), _fmt(_H - 12)))
    parts.append('<text x="16" y="%s" font-size="13" '
                 'text-anchor="middle">E</text>'
                 % _fmt((_MT + _H - _MB) / 2.0))

    # fiducial level
    parts.append(_polyline([(frame.x(klo), frame.y(level)),
                            (frame.x(khi), frame.y(level))],
                           "#555555", width=1.0, dash=True))

    for i, band in enumerate(bands):
        color = _BAND_COLORS[i % len(_BAND_COLORS)]
        pts = [(frame.x(k), frame.y(lam))
               for k, lam in zip(band.ks, band.lams)
               if frame.llo <= lam <= frame.lhi]
        if len(pts) >= 2:
            parts.append(_polyline(pts, color))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
