"""Acceptance checks, one test group per criterion; a pass/fail line per criterion is printed at the end."""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadremosaic import io
from quadremosaic.bench import RuntimeStats, extrapolate, extrapolate_seconds, time_algorithm
from quadremosaic.cfa import (
    QUAD, RGGB, GeomTransform, RawImage, apply_transform, canonical_pattern, decompose_planes, quad_swap,
    recompose_planes, swap_quad_units,
)
from quadremosaic.cli import bench_input, main
from quadremosaic.config import RunConfig
from quadremosaic.isp import RgbImage, demosaic
from quadremosaic.metrics import evaluate_scene, kld, m4, psnr, ssim
from quadremosaic.remosaic import REGISTRY, registry_lookup
from quadremosaic.sim import NoiseParams, add_noise, generate_scene, sample_noisy, synthetic_rgb, synthetic_suite

from oracles import kld_oracle, psnr_oracle, ssim_oracle

MANY = settings(max_examples=1000, deadline=None)

# ---------------------------------------------------------------- 1

# (team, psnr, ssim, lpips, kld, printed M4)
LEADERBOARD = [
    ("op-summer-po", 37.93, 0.965, 0.104, 0.019, 68.03),
    ("JHC-SJTU", 37.64, 0.96, 0.1, 0.007, 67.99),
    ("BITSpectral", 37.2, 0.96, 0.11, 0.03, 66.0),
]
EXPECTED_M4 = {"op-summer-po": 67.22, "JHC-SJTU": 67.10, "BITSpectral": 64.82}


@pytest.mark.acceptance(1, "M4 formula fidelity")
def test_m4_doubles_psnr():
    for p in (0.0, 12.5, 37.0, 99.0):
        assert m4(p, 1.0, 0.0, 0.0) == 2 * p


@pytest.mark.acceptance(1, "M4 formula fidelity")
@pytest.mark.parametrize("row", LEADERBOARD, ids=[r[0] for r in LEADERBOARD])
def test_m4_leaderboard_rows(row, acceptance_note):
    team, p, s, lp, k, printed = row
    value = m4(p, s, lp, k)
    assert value == pytest.approx(EXPECTED_M4[team], abs=0.01)
    gap = printed - value
    acceptance_note(f"M4 {team}: recomputed {value:.3f}, printed {printed:.2f}, gap {gap:+.2f}")
    assert 0.7 <= gap <= 1.25


@pytest.mark.acceptance(1, "M4 formula fidelity")
def test_m4_fast():
    start = time.perf_counter()
    for _ in range(1000):
        m4(37.93, 0.965, 0.104, 0.019)
    assert (time.perf_counter() - start) / 1000 < 1e-3


# ---------------------------------------------------------------- 2


def measured(seconds):
    return RuntimeStats("x", 1800, 1200, 3, seconds, seconds, 0.0, 1)


@pytest.mark.acceptance(2, "runtime extrapolation to 64 MP")
def test_extrapolation_rule(acceptance_note):
    one = extrapolate(measured(1.0), 64)
    assert 29.5 <= one <= 29.7
    a, b = extrapolate(measured(6.1), 64), extrapolate(measured(4.4), 64)
    assert round(a) == pytest.approx(180, abs=1) and a == pytest.approx(180.7, abs=0.05)
    assert round(b, -1) == 130 and b == pytest.approx(130.4, abs=0.05)
    assert extrapolate_seconds(1.0, 1200 * 1800, 64) == one
    acceptance_note(f"extrapolation: 1s -> {one:.2f}s, 6.1s -> {a:.2f}s, 4.4s -> {b:.2f}s")


# ---------------------------------------------------------------- 3

PAIRS = 100


def random_pairs(n=PAIRS, seed=2024):
    r = np.random.default_rng(seed)
    for _ in range(n):
        # mix in correlated pairs so SSIM is not always near zero
        a = r.random((32, 32, 3))
        b = np.clip(a + r.normal(0, r.uniform(0.01, 0.3), a.shape), 0, 1) if r.random() < 0.5 else r.random(a.shape)
        yield a, b


@pytest.mark.acceptance(3, "metric oracle equivalence")
def test_psnr_oracle():
    for a, b in random_pairs():
        assert abs(psnr(RgbImage(a), RgbImage(b)) - psnr_oracle(a, b)) <= 1e-12


@pytest.mark.acceptance(3, "metric oracle equivalence")
def test_ssim_oracle():
    for a, b in random_pairs():
        assert abs(ssim(RgbImage(a), RgbImage(b)) - ssim_oracle(a, b)) <= 1e-9


@pytest.mark.acceptance(3, "metric oracle equivalence")
def test_kld_oracle():
    for a, b in random_pairs():
        x, y = a[..., 0], b[..., 1] ** 1.5
        assert abs(kld(RawImage(x, RGGB), RawImage(y, RGGB)) - kld_oracle(x, y)) <= 1e-12


# ---------------------------------------------------------------- 4

seeds = st.integers(0, 2**32 - 1)
blocks = st.integers(1, 6)


@pytest.mark.acceptance(4, "structural invariants")
@MANY
@given(blocks, blocks, seeds)
def test_swap_involution(hb, wb, seed):
    data = np.random.default_rng(seed).random((4 * hb, 4 * wb))
    assert np.array_equal(swap_quad_units(swap_quad_units(data)), data)


@pytest.mark.acceptance(4, "structural invariants")
@MANY
@given(blocks, blocks, seeds, st.sampled_from([QUAD, RGGB]))
def test_plane_round_trip(hb, wb, seed, pattern):
    raw = RawImage(np.random.default_rng(seed).random((4 * hb, 4 * wb)), pattern)
    assert recompose_planes(decompose_planes(raw)).equals(raw)


@pytest.mark.acceptance(4, "structural invariants")
@MANY
@given(blocks, blocks, seeds)
def test_swap_gives_rggb_layout(hb, wb, seed):
    h, w = 4 * hb, 4 * wb
    colors = QUAD.color_map(h, w).astype(float) / 2  # channel index encoded as a value
    noise = np.random.default_rng(seed).random((h, w)) * 0.01
    out = quad_swap(RawImage(colors * 0.9 + noise, QUAD))
    assert out.pattern == RGGB
    assert np.array_equal(np.floor(out.data / 0.45).astype(int), RGGB.color_map(h, w))


@pytest.mark.acceptance(4, "structural invariants")
@MANY
@given(st.integers(1, 8), st.integers(1, 8), seeds, st.sampled_from(["bilinear", "malvar"]))
def test_demosaic_keeps_samples(hb, wb, seed, method):
    raw = RawImage(np.random.default_rng(seed).random((2 * hb, 2 * wb)), RGGB)
    out = demosaic(raw, method).data
    picked = np.take_along_axis(out, RGGB.color_map(raw.height, raw.width)[..., None], axis=2)[..., 0]
    assert np.array_equal(picked, raw.data)


@st.composite
def transforms(draw, h, w):
    kind = draw(st.sampled_from(["crop", "flip_h", "flip_v", "transpose"]))
    if kind != "crop":
        return GeomTransform(kind)
    top, left = draw(st.integers(0, h - 5)), draw(st.integers(0, w - 5))
    ch, cw = draw(st.integers(4, h - top)), draw(st.integers(4, w - left))
    return GeomTransform("crop", (top, left, ch, cw))


@pytest.mark.acceptance(4, "structural invariants")
@MANY
@given(st.data(), st.integers(2, 5), st.integers(2, 5), st.sampled_from([QUAD, RGGB]))
def test_transform_canonical_phase(data, hb, wb, pattern):
    h, w = 4 * hb, 4 * wb
    raw = RawImage(pattern.color_map(h, w).astype(float) / 2, pattern)
    t = data.draw(transforms(h, w))
    try:
        out = apply_transform(raw, t)
    except ValueError:
        # crops that cannot hold one aligned period after re-phasing
        assert t.kind == "crop"
        return
    assert out.pattern == canonical_pattern(pattern.period)
    assert out.height % pattern.period == 0 and out.width % pattern.period == 0
    # pixel values encode the colour, so they must agree with the canonical layout
    assert np.array_equal((out.data * 2).astype(int), out.pattern.color_map(out.height, out.width))


# ---------------------------------------------------------------- 5

CONSTANTS = [(0.21, 0.55, 0.83), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.5, 0.25, 0.125), (0.9, 0.1, 0.4)]


@pytest.mark.acceptance(5, "exactness on constant scenes")
@pytest.mark.parametrize("rgb", CONSTANTS)
@pytest.mark.parametrize("algo", sorted(REGISTRY))
def test_constant_scenes(rgb, algo):
    img = RgbImage(np.broadcast_to(np.array(rgb, dtype=float), (32, 32, 3)))
    pair = generate_scene(img, [0], scene_id="const")[0]
    opts = {"strength": 0} if algo == "joint" else {}
    out = registry_lookup(algo).run(pair.input_quad, **opts)
    assert np.array_equal(out.data, pair.gt_bayer.data)
    rec = evaluate_scene(out, pair.gt_bayer)
    assert rec.ssim == 1.0 and rec.kld == 0.0 and rec.psnr == 99.0


# ---------------------------------------------------------------- 6

# regression-locked margins on synthetic_suite(10), seed 1
PSNR_MARGIN_0DB = 3.5071
M4_MARGIN_42DB = 20.7532


@pytest.fixture(scope="module")
def suite_scores():
    scores = {}
    for name, rgb in synthetic_suite(10):
        for pair in generate_scene(rgb, [0, 42], seed=1, scene_id=name):
            for algo in ("swap", "interp", "joint"):
                rec = evaluate_scene(registry_lookup(algo).run(pair.input_quad), pair.gt_bayer)
                scores.setdefault((algo, pair.gain_db), []).append(rec)
    return {k: {"psnr": np.mean([r.psnr for r in v]), "m4": np.mean([r.m4 for r in v])} for k, v in scores.items()}


@pytest.mark.acceptance(6, "algorithm ordering on the synthetic suite")
def test_interp_beats_swap_clean(suite_scores, acceptance_note):
    margin = suite_scores[("interp", 0.0)]["psnr"] - suite_scores[("swap", 0.0)]["psnr"]
    acceptance_note(f"PSNR(interp) - PSNR(swap) at 0 dB = {margin:.4f} dB")
    assert margin > 0
    assert margin == pytest.approx(PSNR_MARGIN_0DB, abs=0.01)


@pytest.mark.acceptance(6, "algorithm ordering on the synthetic suite")
def test_joint_beats_interp_noisy(suite_scores, acceptance_note):
    margin = suite_scores[("joint", 42.0)]["m4"] - suite_scores[("interp", 42.0)]["m4"]
    acceptance_note(f"M4(joint) - M4(interp) at 42 dB = {margin:.4f}")
    assert margin > 0
    assert margin == pytest.approx(M4_MARGIN_42DB, abs=0.01)


# ---------------------------------------------------------------- 7


@pytest.mark.acceptance(7, "noise calibration")
def test_noise_variance_24db(acceptance_note):
    params = NoiseParams(24.0, seed=0)
    raw = RawImage(np.full((512, 512), 0.5), QUAD, scene_id="patch")
    eps = sample_noisy(raw, params) - 0.5
    g = 10 ** (24 / 20)
    expected = 2.5e-4 * g * 0.5 + (1e-3 * g) ** 2
    acceptance_note(f"24 dB variance: empirical {eps.var():.4e}, model {expected:.4e}")
    assert eps.var() == pytest.approx(expected, rel=0.02)


@pytest.mark.acceptance(7, "noise calibration")
def test_zero_gain_identity():
    raw = RawImage(np.random.default_rng(3).random((512, 512)), QUAD)
    out = add_noise(raw, NoiseParams(0.0, seed=123))
    assert np.array_equal(out.data, raw.data) and out.gain_db == 0.0


# ---------------------------------------------------------------- 8


def run_pipeline(root, rgb_dir):
    assert main(["--seed", "7", "simulate", str(rgb_dir), str(root / "sim")]) == 0
    for algo in ("interp", "joint"):
        assert main(["remosaic", str(root / "sim" / "input"), str(root / algo), "--algo", algo]) == 0
    assert main(["evaluate", str(root / "interp"), str(root / "joint"), "--gt", str(root / "sim" / "gt"),
                 "--report", str(root / "report.json")]) == 0


def tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.acceptance(8, "end-to-end reproducibility and speed")
def test_pipeline_reproducible(tmp_path, acceptance_note):
    rgb_dir = tmp_path / "rgb"
    rgb_dir.mkdir()
    for i, kind in enumerate(("blobs", "grating", "edge")):
        io.write_png16(synthetic_rgb(kind, 256, 256, seed=i), rgb_dir / f"scene{i}_{kind}.png")
    start = time.perf_counter()
    run_pipeline(tmp_path / "a", rgb_dir)
    elapsed = time.perf_counter() - start
    run_pipeline(tmp_path / "b", rgb_dir)
    a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    # 9 inputs + 3 gt, 9 outputs per algorithm, each json+raw; two reports and a ranking, each json+txt
    assert len(a) == (9 + 3 + 9 + 9) * 2 + 3 * 2
    assert a == b
    acceptance_note(f"3-scene pipeline: {elapsed:.2f}s")
    assert elapsed < 60


@pytest.mark.acceptance(8, "end-to-end reproducibility and speed")
def test_interp_bench_budget(acceptance_note):
    quad = bench_input(1200, 1800, RunConfig())
    stats = time_algorithm(registry_lookup("interp"), quad, reps=5)
    acceptance_note(f"interp at 1200x1800: median {stats.median_seconds * 1e3:.1f} ms")
    assert stats.median_seconds < 0.25
