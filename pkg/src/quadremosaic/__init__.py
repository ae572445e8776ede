"""Quad-Bayer remosaic toolkit: simulation, classical remosaic, reference ISP and scoring."""

from .cfa import BGGR, GBRG, GRBG, QUAD, RGGB, CfaPattern, ColorPlaneSet, GeomTransform, RawImage
from .isp import IspConfig, RgbImage, run_isp
from .metrics import MetricsRecord, MetricsReport, aggregate, evaluate_scene, kld, m4, psnr, ssim
from .remosaic import DenoiseConfig, registry_lookup
from .sim import NoiseParams, ScenePair, generate_scene

__version__ = "0.1.0"
