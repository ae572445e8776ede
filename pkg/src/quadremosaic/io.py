"""On-disk formats: raw containers (JSON header + uint16 payload), 16-bit PNG, LPIPS sidecars.

A container named ``scene.json`` stores its payload next to it as ``scene.raw``:
little-endian unsigned 16-bit DN, row-major, no padding.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import cv2
import numpy as np

from .cfa import QUAD, RGGB, RawImage
from .isp import RgbImage

CFA_NAMES = {"quad4": QUAD, "rggb": RGGB}
HEADER_KEYS = ("width", "height", "cfa", "bit_depth", "black_level", "white_level", "gain_db", "scene_id")


class ContainerError(ValueError):
    pass


def atomic_write_bytes(path: Path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def payload_path(header_path: Path) -> Path:
    return Path(header_path).with_suffix(".raw")


def container_header(raw: RawImage) -> dict:
    if raw.pattern.name not in CFA_NAMES:
        raise ContainerError(f"only canonical quad4/rggb mosaics can be stored, got {raw.pattern.name}")
    return {
        "width": raw.width,
        "height": raw.height,
        "cfa": raw.pattern.name,
        "bit_depth": max(1, math.ceil(math.log2(raw.white_level + 1))),
        "black_level": int(raw.black_level),
        "white_level": int(raw.white_level),
        "gain_db": float(raw.gain_db),
        "scene_id": raw.scene_id,
    }


def save_container(raw: RawImage, path: Path) -> Path:
    """Write header + payload; returns the header path."""
    path = Path(path).with_suffix(".json")
    header = container_header(raw)
    if header["bit_depth"] > 16:
        raise ContainerError("white_level does not fit in 16 bits")
    dn = raw.to_dn()
    atomic_write_bytes(payload_path(path), dn.astype("<u2").tobytes())
    atomic_write_bytes(path, (json.dumps(header, indent=2, sort_keys=True) + "\n").encode())
    return path


def load_container(path: Path) -> RawImage:
    path = Path(path).with_suffix(".json")
    try:
        header = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: unreadable header ({exc})") from exc
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ContainerError(f"{path}: header lacks {', '.join(missing)}")
    if header["cfa"] not in CFA_NAMES:
        raise ContainerError(f"{path}: unknown cfa {header['cfa']!r}; expected one of {sorted(CFA_NAMES)}")
    w, h = int(header["width"]), int(header["height"])
    blob_path = payload_path(path)
    try:
        blob = blob_path.read_bytes()
    except OSError as exc:
        raise ContainerError(f"{blob_path}: missing payload ({exc})") from exc
    expected = w * h * 2
    if len(blob) != expected:
        raise ContainerError(f"{blob_path}: payload is {len(blob)} bytes, expected {expected} ({w}x{h}x2)")
    dn = np.frombuffer(blob, dtype="<u2").reshape(h, w)
    black, white = int(header["black_level"]), int(header["white_level"])
    if dn.max(initial=0) > white or dn.min(initial=white) < black:
        raise ContainerError(f"{blob_path}: DN values outside [{black}, {white}]")
    try:
        return RawImage.from_dn(dn, CFA_NAMES[header["cfa"]], black, white,
                                gain_db=float(header["gain_db"]), scene_id=str(header["scene_id"]))
    except ValueError as exc:
        raise ContainerError(f"{path}: {exc}") from exc


def list_containers(directory: Path) -> list[Path]:
    return sorted(p for p in Path(directory).glob("*.json") if payload_path(p).exists())


def read_png(path: Path) -> RgbImage:
    """8- or 16-bit RGB PNG as linear [0, 1] floats (values taken as-is)."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"cannot read image {path}")
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    if img.shape[2] == 4:
        img = img[..., :3]
    scale = 65535.0 if img.dtype == np.uint16 else 255.0
    return RgbImage(img[..., ::-1].astype(np.float64) / scale, "linear")


def encode_png16(rgb: RgbImage) -> bytes:
    dn = np.rint(np.clip(rgb.data, 0.0, 1.0) * 65535.0).astype(np.uint16)
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(dn[..., ::-1]))
    if not ok:
        raise OSError("PNG encoding failed")
    return buf.tobytes()


def write_png16(rgb: RgbImage, path: Path):
    atomic_write_bytes(Path(path), encode_png16(rgb))


def load_lpips_sidecar(path: Path | None) -> dict[str, float]:
    """``{key: lpips}``; keys may be scene ids or prediction file stems."""
    if path is None:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path}: LPIPS sidecar must be a JSON object")
    out = {}
    for key, value in data.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
            raise ValueError(f"{path}: LPIPS value for {key!r} must be a non-negative number")
        out[str(key)] = float(value)
    return out
