"""Anomaly mask generation from shape and size priors.

Eight mask families are supported (seven local shapes drawn at three size
classes, plus the whole-object foreground mask). Masks are H x W uint8 grids
with values {0, 1}. For every local shape except Perlin noise a mask contains
at most two 8-connected regions and each region's pixel area, as a fraction
of the full grid, falls inside the requested size-class window. Perlin masks
bound the total area instead and may fragment freely.

Generation is a pure function of (shape, size, resolution, foreground, seed):
identical inputs produce bit-identical masks.
"""

from __future__ import annotations

import enum
import math

import cv2
import numpy as np
from PIL import Image
from scipy import ndimage as ndi

from .errors import EmptyMaskError, InvalidResolutionError
from .validation import check_binary_mask, check_image

_EIGHT_CONN = np.ones((3, 3), dtype=bool)

# Redraws with derived seeds before giving up on a valid mask.
RETRY_BUDGET = 8

_MASK_SALT = 0x6D61736B  # keeps mask streams decoupled from other seeded draws


class MaskShape(str, enum.Enum):
    RECTANGLE = "rectangle"
    LINE = "line"
    POLYGON = "polygon"
    ELLIPSE = "ellipse"
    HOLLOW_ELLIPSE = "hollow_ellipse"
    RANDOM_BRUSH = "random_brush"
    PERLIN_NOISE = "perlin_noise"
    FOREGROUND_MASK = "foreground_mask"


class SizeClass(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


#: Local shapes, i.e. everything that is not the whole-object foreground mask.
LOCAL_SHAPES: tuple[MaskShape, ...] = tuple(
    s for s in MaskShape if s is not MaskShape.FOREGROUND_MASK
)

#: Area-fraction window per connected region (total area for Perlin noise).
#: Small/medium are half-open [lo, hi); large includes its upper bound.
SIZE_RANGES: dict[SizeClass, tuple[float, float]] = {
    SizeClass.SMALL: (0.001, 0.01),
    SizeClass.MEDIUM: (0.01, 0.05),
    SizeClass.LARGE: (0.05, 0.20),
}


def area_fraction_in_range(frac: float, size: SizeClass) -> bool:
    lo, hi = SIZE_RANGES[size]
    if size is SizeClass.LARGE:
        return lo <= frac <= hi
    return lo <= frac < hi


def connected_regions(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected labeling; returns (labels, count)."""
    labels, count = ndi.label(np.asarray(mask) > 0, structure=_EIGHT_CONN)
    return labels, int(count)


# ---------------------------------------------------------------------------
# shape primitives
#
# Each drawer returns a tight boolean bitmap whose pixel count lies inside the
# requested area window. Drawers correct their own scale against the rasterized
# pixel count, so integer rounding cannot push a region outside the window.
# ---------------------------------------------------------------------------


def _trim(bitmap: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(bitmap)
    return bitmap[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]


def _sample_target(rng: np.random.Generator, lo_px: float, hi_px: float) -> float:
    # interior of the window, leaving rounding slack on both sides
    pad = 0.12 * (hi_px - lo_px)
    return float(rng.uniform(lo_px + pad, hi_px - pad))


def _in_window(count: int, lo_px: float, hi_px: float) -> bool:
    return lo_px <= count < hi_px


def _draw_rectangle(rng, target, max_extent):
    aspect = math.exp(rng.uniform(math.log(0.33), math.log(3.0)))
    w = math.sqrt(target * aspect)
    w = min(max(1.0, w), max_extent, target)
    h = min(max(1.0, target / w), max_extent)
    wi, hi_ = max(1, round(w)), max(1, round(h))
    return np.ones((hi_, wi), dtype=bool)


def _raster_ellipse(a, b, theta, hollow_frac=None):
    ext = int(math.ceil(max(a, b))) + 2
    yy, xx = np.mgrid[-ext : ext + 1, -ext : ext + 1]
    ct, st = math.cos(theta), math.sin(theta)
    u = xx * ct + yy * st
    v = -xx * st + yy * ct
    outer = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    if hollow_frac is None:
        return outer
    t = hollow_frac * min(a, b)
    ai, bi = max(a - t, 0.6), max(b - t, 0.6)
    inner = (u / ai) ** 2 + (v / bi) ** 2 <= 1.0
    return outer & ~inner


def _draw_ellipse(rng, target, max_extent):
    ratio = rng.uniform(0.35, 1.0)
    theta = rng.uniform(0.0, math.pi)
    a = math.sqrt(target / (math.pi * ratio))
    a = min(a, (max_extent - 2) / 2.0)
    b = max(ratio * a, 0.7)
    for _ in range(6):
        bitmap = _raster_ellipse(a, b, theta)
        count = int(bitmap.sum())
        if count == 0:
            a, b = a + 0.5, b + 0.5
            continue
        scale = math.sqrt(target / count)
        if abs(1.0 - scale) < 0.02:
            break
        a = min(a * scale, (max_extent - 2) / 2.0)
        b = max(b * scale, 0.7)
    return _trim(bitmap)


def _draw_hollow_ellipse(rng, target, max_extent):
    ratio = rng.uniform(0.5, 1.0)
    theta = rng.uniform(0.0, math.pi)
    u = rng.uniform(0.08, 0.2)  # ring thickness as fraction of minor axis
    a = math.sqrt(target / (math.pi * u * ratio * (1.0 + ratio)))
    cap = (max_extent - 2) / 2.0
    if a > cap:
        a = cap
        u = min(0.45, target / (math.pi * ratio * a * a * (1.0 + ratio)))
    for _ in range(6):
        b = max(ratio * a, 1.6)
        bitmap = _raster_ellipse(a, b, theta, hollow_frac=u)
        count = int(bitmap.sum())
        if count == 0:
            a += 1.0
            continue
        scale = math.sqrt(target / count)
        if abs(1.0 - scale) < 0.02:
            break
        a = min(a * scale, cap)
        if a >= cap:
            u = min(0.45, u * (target / count))
    return _trim(bitmap)


def _draw_polygon(rng, target, max_extent):
    k = int(rng.integers(3, 9))
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=k))
    radii = rng.uniform(0.45, 1.0, size=k)
    r = math.sqrt(target / (math.pi * 0.5))
    r = min(r, (max_extent - 2) / 2.0)
    bitmap = None
    for _ in range(6):
        ext = int(math.ceil(r)) + 2
        pts = np.stack(
            [ext + radii * r * np.cos(angles), ext + radii * r * np.sin(angles)], axis=1
        )
        canvas = np.zeros((2 * ext + 1, 2 * ext + 1), dtype=np.uint8)
        cv2.fillPoly(canvas, [np.round(pts).astype(np.int32)], 1)
        count = int(canvas.sum())
        if count == 0:
            r += 1.0
            continue
        bitmap = canvas.astype(bool)
        scale = math.sqrt(target / count)
        if abs(1.0 - scale) < 0.02:
            break
        r = min(r * scale, (max_extent - 2) / 2.0)
    return _trim(bitmap)


def _draw_line(rng, target, max_extent):
    max_ratio = max(2.0, 0.8 * max_extent * max_extent / target)
    ratio = rng.uniform(min(4.0, max_ratio), min(16.0, max_ratio))
    length = math.sqrt(target * ratio)
    thickness = max(1, round(length / ratio))
    theta = rng.uniform(0.0, math.pi)
    bitmap = None
    for _ in range(6):
        length = min(length, max_extent - thickness - 2)
        ext = int(math.ceil(length / 2 + thickness)) + 1
        canvas = np.zeros((2 * ext + 1, 2 * ext + 1), dtype=np.uint8)
        dx, dy = math.cos(theta) * length / 2, math.sin(theta) * length / 2
        p0 = (int(round(ext - dx)), int(round(ext - dy)))
        p1 = (int(round(ext + dx)), int(round(ext + dy)))
        cv2.line(canvas, p0, p1, 1, thickness=thickness)
        count = int(canvas.sum())
        if count == 0:
            length += 2.0
            continue
        bitmap = canvas.astype(bool)
        scale = target / count
        if abs(1.0 - scale) < 0.02:
            break
        if length * scale > max_extent - thickness - 2 and thickness >= 1:
            thickness = max(1, round(thickness * scale))
        else:
            length *= scale
    return _trim(bitmap)


def _disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    keep = yy * yy + xx * xx <= radius * radius
    return yy[keep], xx[keep]


def _draw_brush(rng, target, max_extent):
    base_r = max(1, round(math.sqrt(target / 30.0)))
    side = min(int(math.ceil(4.0 * math.sqrt(target))) + 2 * base_r, max_extent)
    canvas = np.zeros((side, side), dtype=bool)
    y = rng.uniform(0.3, 0.7) * side
    x = rng.uniform(0.3, 0.7) * side
    heading = rng.uniform(0.0, 2.0 * math.pi)
    max_stamps = int(30 * target / max(1.0, math.pi * base_r * base_r)) + 40
    for _ in range(max_stamps):
        r = max(1, round(base_r * rng.uniform(0.7, 1.3)))
        oy, ox = _disk_offsets(r)
        py = np.clip(oy + int(round(y)), 0, side - 1)
        px = np.clip(ox + int(round(x)), 0, side - 1)
        canvas[py, px] = True
        if canvas.sum() >= target:
            break
        heading += rng.uniform(-0.9, 0.9)
        step = r * rng.uniform(0.8, 1.6)
        y = min(max(y + step * math.sin(heading), r), side - 1 - r)
        x = min(max(x + step * math.cos(heading), r), side - 1 - r)
    return _trim(canvas)


_DRAWERS = {
    MaskShape.RECTANGLE: _draw_rectangle,
    MaskShape.ELLIPSE: _draw_ellipse,
    MaskShape.HOLLOW_ELLIPSE: _draw_hollow_ellipse,
    MaskShape.POLYGON: _draw_polygon,
    MaskShape.LINE: _draw_line,
    MaskShape.RANDOM_BRUSH: _draw_brush,
}


# ---------------------------------------------------------------------------
# Perlin noise
# ---------------------------------------------------------------------------


def perlin_noise(shape: tuple[int, int], res: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Single-octave gradient noise on an arbitrary grid (lattice res x res)."""
    h, w = shape
    ry, rx = res
    cell_h, cell_w = math.ceil(h / ry), math.ceil(w / rx)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=(ry + 1, rx + 1))
    grad = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    ys = np.arange(h) / cell_h
    xs = np.arange(w) / cell_w
    yi = np.minimum(ys.astype(int), ry - 1)
    xi = np.minimum(xs.astype(int), rx - 1)
    fy = (ys - yi)[:, None]
    fx = (xs - xi)[None, :]

    def dot(dy, dx):
        g = grad[yi[:, None] + dy, xi[None, :] + dx]
        return g[..., 0] * (fx - dx) + g[..., 1] * (fy - dy)

    def fade(t):
        return ((6 * t - 15) * t + 10) * t * t * t

    wy, wx = fade(fy), fade(fx)
    top = dot(0, 0) * (1 - wx) + dot(0, 1) * wx
    bot = dot(1, 0) * (1 - wx) + dot(1, 1) * wx
    return math.sqrt(2.0) * (top * (1 - wy) + bot * wy)


def _draw_perlin_mask(rng, hw, lo_px, hi_px):
    h, w = hw
    res = (max(2, h // 32), max(2, w // 32))
    field = perlin_noise(hw, res, rng) + 0.5 * perlin_noise(hw, (res[0] * 2, res[1] * 2), rng)
    k = max(1, int(round(_sample_target(rng, lo_px, hi_px))))
    flat = field.ravel()
    top = np.argpartition(flat, flat.size - k)[flat.size - k :]
    mask = np.zeros(flat.size, dtype=np.uint8)
    mask[top] = 1
    return mask.reshape(h, w)


# ---------------------------------------------------------------------------
# placement and the public generator
# ---------------------------------------------------------------------------


def _place(bitmap, hw, rng, foreground, occupied_boxes):
    """Pick a top-left for the bitmap; returns (top, left) or None.

    Placement must keep the bitmap fully on-grid, fully inside the foreground
    when one is given, and at least one pixel away from previously placed
    regions (so two regions never merge under 8-connectivity).
    """
    h, w = hw
    bh, bw = bitmap.shape
    if bh > h or bw > w:
        return None
    if foreground is not None:
        ys, xs = np.nonzero(foreground)
        if ys.size == 0:
            return None
    for _ in range(20):
        if foreground is not None:
            i = int(rng.integers(0, ys.size))
            top = int(np.clip(ys[i] - bh // 2, 0, h - bh))
            left = int(np.clip(xs[i] - bw // 2, 0, w - bw))
        else:
            top = int(rng.integers(0, h - bh + 1))
            left = int(rng.integers(0, w - bw + 1))
        box = (top - 1, left - 1, top + bh + 1, left + bw + 1)
        overlap = any(
            box[0] < b[2] and b[0] < box[2] and box[1] < b[3] and b[1] < box[3]
            for b in occupied_boxes
        )
        if overlap:
            continue
        if foreground is not None:
            window = foreground[top : top + bh, left : left + bw]
            if not window[bitmap].all():
                continue
        return top, left
    return None


def _valid(mask, shape, size, hw):
    total = int(mask.sum())
    if total == 0:
        return False
    npix = hw[0] * hw[1]
    if shape is MaskShape.PERLIN_NOISE:
        return size is None or area_fraction_in_range(total / npix, size)
    labels, count = connected_regions(mask)
    if count > 2:
        return False
    if size is None:
        return True
    areas = np.bincount(labels.ravel())[1:]
    return all(area_fraction_in_range(a / npix, size) for a in areas)


def generate_mask(
    shape: MaskShape,
    size: SizeClass | None,
    resolution: tuple[int, int],
    foreground: np.ndarray | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Generate one anomaly mask. Deterministic per (arguments, seed).

    ``size=None`` means "any": a size class is sampled for local shapes and
    ignored for the foreground mask. When a foreground map is supplied the
    mask is constrained to it; if the constraint keeps destroying the size or
    region-count guarantees, the last non-empty intersected mask is returned,
    and only full annihilation raises ``EmptyMaskError``.
    """
    h, w = int(resolution[0]), int(resolution[1])
    if h < 32 or w < 32:
        raise InvalidResolutionError(f"resolution must be at least 32x32, got {h}x{w}")
    if shape is MaskShape.FOREGROUND_MASK:
        if foreground is None:
            raise EmptyMaskError("foreground mask requested without a foreground map")
        fg = check_binary_mask(foreground, "foreground")
        if fg.shape != (h, w):
            raise InvalidResolutionError(
                f"foreground shape {fg.shape} does not match resolution {(h, w)}"
            )
        if fg.sum() == 0:
            raise EmptyMaskError("foreground map is empty")
        return fg.copy()

    fg = None
    if foreground is not None:
        fg = check_binary_mask(foreground, "foreground") > 0
        if fg.shape != (h, w):
            raise InvalidResolutionError(
                f"foreground shape {fg.shape} does not match resolution {(h, w)}"
            )

    npix = h * w
    fallback = None
    for attempt in range(RETRY_BUDGET + 1):
        rng = np.random.default_rng([_MASK_SALT, seed, attempt])
        size_cls = size if size is not None else SizeClass(rng.choice([s.value for s in SizeClass]))
        lo, hi = SIZE_RANGES[size_cls]
        lo_px, hi_px = lo * npix, hi * npix

        if shape is MaskShape.PERLIN_NOISE:
            mask = _draw_perlin_mask(rng, (h, w), lo_px, hi_px)
            if fg is not None:
                mask &= fg.astype(np.uint8)
        else:
            n_regions = int(rng.integers(1, 3))
            mask = np.zeros((h, w), dtype=np.uint8)
            boxes: list[tuple[int, int, int, int]] = []
            for _ in range(n_regions):
                target = _sample_target(rng, lo_px, hi_px)
                bitmap = _DRAWERS[shape](rng, target, min(h, w) - 2)
                if bitmap is None or not _in_window(int(bitmap.sum()), lo_px, hi_px):
                    continue
                pos = _place(bitmap, (h, w), rng, fg, boxes)
                if pos is None:
                    continue
                top, left = pos
                mask[top : top + bitmap.shape[0], left : left + bitmap.shape[1]] |= bitmap
                boxes.append((top, left, top + bitmap.shape[0], left + bitmap.shape[1]))
            if fg is not None:
                mask &= fg.astype(np.uint8)

        if _valid(mask, shape, size, (h, w)):
            return mask
        if fg is not None and mask.sum() > 0 and fallback is None:
            fallback = mask

    if fallback is not None:
        return fallback
    raise EmptyMaskError(
        f"could not generate a valid {shape.value} mask at {h}x{w} within "
        f"{RETRY_BUDGET} redraws"
    )


def mask_menu(prior) -> list[tuple[MaskShape, SizeClass | None]]:
    """Candidate (shape, size) entries for a category's prior.

    Explicit shape/size lists cross-multiply; a fully unconstrained prior
    yields the full menu of 7 local shapes x 3 sizes plus the foreground mask
    (22 entries). The foreground mask never takes a size.
    """
    shapes = list(prior.shapes) if prior.shapes else list(LOCAL_SHAPES)
    sizes = list(prior.sizes) if prior.sizes else list(SizeClass)
    menu: list[tuple[MaskShape, SizeClass | None]] = []
    for s in shapes:
        if s is MaskShape.FOREGROUND_MASK:
            menu.append((s, None))
            continue
        for z in sizes:
            menu.append((s, z))
    if not prior.shapes and not prior.sizes:
        menu.append((MaskShape.FOREGROUND_MASK, None))
    return menu


# ---------------------------------------------------------------------------
# foreground estimation (reference substitute for an external segmenter)
# ---------------------------------------------------------------------------


def _otsu_threshold(values: np.ndarray) -> float:
    hist, edges = np.histogram(values, bins=256)
    centers = (edges[:-1] + edges[1:]) / 2.0
    weight = hist.astype(np.float64)
    total = weight.sum()
    w0 = np.cumsum(weight)
    w1 = total - w0
    m = np.cumsum(weight * centers)
    mu0 = np.divide(m, w0, out=np.zeros_like(m), where=w0 > 0)
    mu1 = np.divide(m[-1] - m, w1, out=np.zeros_like(m), where=w1 > 0)
    var_between = w0 * w1 * (mu0 - mu1) ** 2
    return float(centers[int(np.argmax(var_between))])


def foreground_estimate(image) -> np.ndarray:
    """Otsu-thresholded luminance, largest 8-connected component, hole-filled.

    A (near-)uniform image has no separable background and maps to all-ones.
    Deployments with a real segmenter inject their own map instead.
    """
    img = check_image(image)
    if img.shape[2] >= 3:
        lum = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    else:
        lum = img[..., 0]
    if float(lum.max() - lum.min()) < 1e-8:
        return np.ones(lum.shape, dtype=np.uint8)
    fg = lum > _otsu_threshold(lum)
    if not fg.any() or fg.all():
        return np.ones(lum.shape, dtype=np.uint8)
    labels, count = connected_regions(fg.astype(np.uint8))
    areas = np.bincount(labels.ravel())[1:]
    fg = labels == (1 + int(np.argmax(areas)))
    fg = ndi.binary_fill_holes(fg)
    return fg.astype(np.uint8)


# ---------------------------------------------------------------------------
# mask serialization: single-channel 8-bit, 0 = normal, 255 = anomalous
# ---------------------------------------------------------------------------


def save_mask(path, mask: np.ndarray) -> None:
    arr = (check_binary_mask(mask) * 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def load_mask(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    return (arr > 127).astype(np.uint8)
