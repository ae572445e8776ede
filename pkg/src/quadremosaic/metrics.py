"""Full-reference quality metrics and the M4 composite score."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .cfa import RawImage
from .isp import IspConfig, RgbImage, run_isp

LPIPS_ABSENT = "lpips-absent"
PSNR_CAPPED = "psnr-capped"


@dataclass(frozen=True)
class MetricParams:
    psnr_cap: float = 99.0
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    ssim_k1: float = 0.01
    ssim_k2: float = 0.03
    kld_bins: int = 256
    kld_eps: float = 1e-8

    def __post_init__(self):
        if self.ssim_window < 1 or self.ssim_window % 2 == 0:
            raise ValueError("SSIM window must be a positive odd integer")
        if self.kld_bins < 1 or self.kld_eps <= 0 or self.psnr_cap <= 0:
            raise ValueError("invalid metric parameters")


def _check_pair(ref: RgbImage, test: RgbImage):
    if ref.data.shape != test.data.shape:
        raise ValueError(f"image sizes differ: {ref.data.shape} vs {test.data.shape}")
    if ref.domain != test.domain:
        raise ValueError(f"image domains differ: {ref.domain} vs {test.domain}")


def psnr(ref: RgbImage, test: RgbImage, cap: float = 99.0) -> float:
    """PSNR at peak 1.0 over all pixels and channels, capped for identical inputs."""
    _check_pair(ref, test)
    mse = float(np.mean((ref.data - test.data) ** 2))
    if mse == 0.0:
        return cap
    return min(10.0 * math.log10(1.0 / mse), cap)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is its outer product."""
    x = np.arange(size) - size // 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    return g / g.sum()


def _valid_filter(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    r = len(taps) // 2
    out = correlate1d(correlate1d(img, taps, axis=0, mode="constant"), taps, axis=1, mode="constant")
    return out[r:img.shape[0] - r, r:img.shape[1] - r]


def ssim_channel(x: np.ndarray, y: np.ndarray, params: MetricParams = MetricParams()) -> float:
    taps = gaussian_window(params.ssim_window, params.ssim_sigma)
    c1 = (params.ssim_k1 * 1.0) ** 2
    c2 = (params.ssim_k2 * 1.0) ** 2
    mx, my = _valid_filter(x, taps), _valid_filter(y, taps)
    sxx = _valid_filter(x * x, taps) - mx * mx
    syy = _valid_filter(y * y, taps) - my * my
    sxy = _valid_filter(x * y, taps) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def ssim(ref: RgbImage, test: RgbImage, params: MetricParams = MetricParams()) -> float:
    """Gaussian-window SSIM per channel over valid window positions, averaged over RGB."""
    _check_pair(ref, test)
    if min(ref.height, ref.width) < params.ssim_window:
        raise ValueError(f"image {ref.height}x{ref.width} smaller than the {params.ssim_window}px SSIM window")
    return float(np.mean([ssim_channel(ref.data[..., c], test.data[..., c], params) for c in range(3)]))


def value_histogram(data: np.ndarray, bins: int = 256) -> np.ndarray:
    """Counts over ``bins`` equal bins on [0, 1]; 1.0 lands in the last bin."""
    idx = np.clip(np.floor(np.asarray(data).ravel() * bins).astype(np.intp), 0, bins - 1)
    return np.bincount(idx, minlength=bins).astype(np.float64)


def smoothed_distribution(counts: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    p = counts / counts.sum() + eps
    return p / p.sum()


def kld(ref_bayer: RawImage, test_bayer: RawImage, params: MetricParams = MetricParams()) -> float:
    """KL(ref || test) between pooled pixel-value histograms of two mosaics."""
    if ref_bayer.data.shape != test_bayer.data.shape:
        raise ValueError(f"mosaic sizes differ: {ref_bayer.data.shape} vs {test_bayer.data.shape}")
    if ref_bayer.pattern.is_quad or test_bayer.pattern.is_quad:
        raise ValueError("KLD is evaluated on Bayer mosaics")
    p = smoothed_distribution(value_histogram(ref_bayer.data, params.kld_bins), params.kld_eps)
    q = smoothed_distribution(value_histogram(test_bayer.data, params.kld_bins), params.kld_eps)
    return max(float(np.sum(p * np.log(p / q))), 0.0)


def m4(psnr: float, ssim: float, lpips: float, kld: float) -> float:
    """PSNR * SSIM * 2**(1 - LPIPS - KLD)."""
    return psnr * ssim * 2.0 ** (1.0 - lpips - kld)


@dataclass(frozen=True)
class MetricsRecord:
    scene_id: str
    gain_db: float
    psnr: float
    ssim: float
    lpips: float | None
    kld: float
    m4: float
    flags: tuple[str, ...] = ()

    def recomputed_m4(self) -> float:
        return m4(self.psnr, self.ssim, 0.0 if self.lpips is None else self.lpips, self.kld)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d


def evaluate_scene(pred_bayer: RawImage, gt_bayer: RawImage, isp: IspConfig | None = None,
                   lpips_value: float | None = None, params: MetricParams = MetricParams(),
                   scene_id: str | None = None, gain_db: float | None = None) -> MetricsRecord:
    """KLD on the raw pair; PSNR/SSIM on the ISP renderings; LPIPS supplied externally."""
    isp = isp or IspConfig()
    if pred_bayer.data.shape != gt_bayer.data.shape:
        raise ValueError(f"prediction {pred_bayer.data.shape} and ground truth {gt_bayer.data.shape} differ in size")
    ref_rgb, test_rgb = run_isp(gt_bayer, isp), run_isp(pred_bayer, isp)
    p = psnr(ref_rgb, test_rgb, params.psnr_cap)
    s = ssim(ref_rgb, test_rgb, params)
    k = kld(gt_bayer, pred_bayer, params)
    flags = []
    if lpips_value is None:
        flags.append(LPIPS_ABSENT)
    elif lpips_value < 0:
        raise ValueError("LPIPS values must be non-negative")
    if p >= params.psnr_cap:
        flags.append(PSNR_CAPPED)
    lp = None if lpips_value is None else float(lpips_value)
    return MetricsRecord(
        scene_id=gt_bayer.scene_id if scene_id is None else scene_id,
        gain_db=float(pred_bayer.gain_db if gain_db is None else gain_db),
        psnr=p, ssim=s, lpips=lp, kld=k,
        m4=m4(p, s, 0.0 if lp is None else lp, k),
        flags=tuple(flags),
    )


_FIELDS = ("psnr", "ssim", "lpips", "kld", "m4")


def _means(records) -> dict:
    out = {}
    for name in _FIELDS:
        vals = [getattr(r, name) for r in records if getattr(r, name) is not None]
        out[name] = float(np.mean(vals)) if vals else None
    out["count"] = len(records)
    return out


def config_fingerprint(isp: IspConfig, params: MetricParams, extra: dict | None = None) -> str:
    blob = {"isp": isp.to_dict(), "metrics": asdict(params), **(extra or {})}
    return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class MetricsReport:
    records: tuple[MetricsRecord, ...]
    averages: dict
    per_gain: dict
    fingerprint: str = ""
    config: dict = field(default_factory=dict)

    @property
    def flags(self) -> list[str]:
        flags = {f for r in self.records for f in r.flags}
        if any(r.lpips is None for r in self.records):
            flags.add(LPIPS_ABSENT)
        return sorted(flags)

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "config": self.config,
            "flags": self.flags,
            "averages": self.averages,
            "per_gain": self.per_gain,
            "records": [r.to_dict() for r in self.records],
            "notes": [
                "m4 average is the mean of per-record m4, not m4 of the mean metrics",
                "records flagged lpips-absent use LPIPS = 0 inside m4",
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_table(self) -> str:
        return render_metrics_table(self)


def aggregate(records, fingerprint: str = "", config: dict | None = None) -> MetricsReport:
    """Arithmetic means overall and per gain; records ordered by (scene_id, gain)."""
    records = tuple(sorted(records, key=lambda r: (r.scene_id, r.gain_db)))
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    gains = sorted({r.gain_db for r in records})
    per_gain = {f"{g:g}": _means([r for r in records if r.gain_db == g]) for g in gains}
    return MetricsReport(records, _means(records), per_gain, fingerprint, dict(config or {}))


def _fmt(v, spec):
    return "n/a" if v is None else format(v, spec)


def render_metrics_table(report: MetricsReport, title: str = "") -> str:
    head = f"{'Scene':<24} {'Gain':>6} {'PSNR':>7} {'SSIM':>7} {'LPIPS':>7} {'KLD':>8} {'M4':>7}"
    lines = [title] if title else []
    lines += [head, "-" * len(head)]
    for r in report.records:
        lines.append(f"{r.scene_id:<24} {r.gain_db:>5g}dB {r.psnr:>7.2f} {r.ssim:>7.4f} "
                     f"{_fmt(r.lpips, '7.3f'):>7} {r.kld:>8.4f} {r.m4:>7.2f}")
    lines.append("-" * len(head))
    rows = [(f"mean @ {g}dB", a) for g, a in report.per_gain.items()] + [("mean", report.averages)]
    for label, a in rows:
        lines.append(f"{label:<31} {a['psnr']:>7.2f} {a['ssim']:>7.4f} {_fmt(a['lpips'], '7.3f'):>7} "
                     f"{a['kld']:>8.4f} {a['m4']:>7.2f}")
    if LPIPS_ABSENT in report.flags:
        lines.append("note: lpips-absent; M4 computed with LPIPS = 0 for flagged records")
    if PSNR_CAPPED in report.flags:
        lines.append("note: PSNR capped for identical renderings")
    return "\n".join(lines) + "\n"


def rank_reports(reports: dict[str, MetricsReport]) -> list[tuple[str, float]]:
    """Leaderboard order: highest mean M4 first, ties broken by label."""
    return sorted(((label, rep.averages["m4"]) for label, rep in reports.items()), key=lambda t: (-t[1], t[0]))
