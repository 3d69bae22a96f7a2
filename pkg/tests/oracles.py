"""Independent brute-force oracles used to freeze expected values in tests.

Everything here is deliberately naive (python loops, BFS) and shares no code
with the library implementations it checks.
"""

from __future__ import annotations

import math
from collections import deque


def bfs_regions(mask) -> list[list[tuple[int, int]]]:
    """8-connected components of a 0/1 grid via BFS; list of pixel lists."""
    h = len(mask)
    w = len(mask[0]) if h else 0
    seen = [[False] * w for _ in range(h)]
    regions = []
    for i in range(h):
        for j in range(w):
            if mask[i][j] and not seen[i][j]:
                queue = deque([(i, j)])
                seen[i][j] = True
                pixels = []
                while queue:
                    y, x = queue.popleft()
                    pixels.append((y, x))
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = y + dy, x + dx
                            if 0 <= ny < h and 0 <= nx < w and mask[ny][nx] and not seen[ny][nx]:
                                seen[ny][nx] = True
                                queue.append((ny, nx))
                regions.append(pixels)
    return regions


def pairwise_auroc(scores, labels) -> float:
    """AUROC by exhaustive positive/negative pair comparison, ties count 1/2."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def naive_pixel_auroc(score_maps, gt_masks) -> float:
    scores, labels = [], []
    for smap, gmap in zip(score_maps, gt_masks):
        for srow, grow in zip(smap, gmap):
            scores.extend(srow)
            labels.extend(grow)
    return pairwise_auroc(scores, [int(v) for v in labels])


def naive_pro(score_maps, gt_masks, fpr_limit=0.3) -> float:
    """PRO by literal threshold sweep over every unique pooled score.

    Curve starts at (fpr=0, pro=0) for the empty prediction, adds one point
    per unique threshold (descending, prediction = score >= t), then the
    piecewise-linear curve is integrated over fpr in [0, fpr_limit] and
    normalized by fpr_limit.
    """
    all_scores = sorted({v for smap in score_maps for row in smap for v in row}, reverse=True)
    regions_per_image = [bfs_regions(g) for g in gt_masks]
    n_regions = sum(len(r) for r in regions_per_image)
    if n_regions == 0:
        raise ValueError("no ground-truth regions")
    normal_total = sum(
        1 for g in gt_masks for row in g for v in row if v == 0
    )
    points = [(0.0, 0.0)]
    for t in all_scores:
        overlaps = []
        fp = 0
        for smap, gmap, regions in zip(score_maps, gt_masks, regions_per_image):
            for pixels in regions:
                hit = sum(1 for (y, x) in pixels if smap[y][x] >= t)
                overlaps.append(hit / len(pixels))
            for y in range(len(gmap)):
                for x in range(len(gmap[0])):
                    if gmap[y][x] == 0 and smap[y][x] >= t:
                        fp += 1
        points.append((fp / normal_total, sum(overlaps) / len(overlaps)))

    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x1 <= fpr_limit:
            area += (x1 - x0) * (y0 + y1) / 2.0
        elif x0 < fpr_limit:
            # clip the last segment at the limit
            yl = y0 + (y1 - y0) * (fpr_limit - x0) / (x1 - x0)
            area += (fpr_limit - x0) * (y0 + yl) / 2.0
            break
        else:
            break
    return area / fpr_limit


def naive_miou(pred_maps, gt_maps, category_ids) -> float:
    ious = []
    for y in category_ids:
        inter = union = 0
        present = False
        for pred, gt in zip(pred_maps, gt_maps):
            for prow, grow in zip(pred, gt):
                for p, g in zip(prow, grow):
                    if g == y:
                        present = True
                    if p == y and g == y:
                        inter += 1
                    if p == y or g == y:
                        union += 1
        if present:
            ious.append(inter / union if union else 0.0)
    if not ious:
        raise ValueError("no categories present")
    return sum(ious) / len(ious)


def naive_derive(maps, tau):
    """Pixel/image classification from per-category score maps, by scanning.

    maps: list over categories y=1..Y of HxW nested lists.
    Returns (detect_map, image_score, class_map, image_label).
    """
    y_count = len(maps)
    h, w = len(maps[0]), len(maps[0][0])
    detect = [[sum(maps[y][i][j] for y in range(y_count)) / y_count for j in range(w)] for i in range(h)]
    image_score = max(v for row in detect for v in row)
    class_map = [[0] * w for _ in range(h)]
    for i in range(h):
        for j in range(w):
            if detect[i][j] >= tau:
                best_y, best_v = 1, maps[0][i][j]
                for y in range(1, y_count):
                    if maps[y][i][j] > best_v:
                        best_y, best_v = y + 1, maps[y][i][j]
                class_map[i][j] = best_y
    counts = {}
    for row in class_map:
        for v in row:
            if v > 0:
                counts[v] = counts.get(v, 0) + 1
    if not counts:
        image_label = 0
    else:
        biggest = max(counts.values())
        image_label = min(y for y, c in counts.items() if c == biggest)
    return detect, image_score, class_map, image_label


def gaussian_ssim(a, b, sigma=1.5, win=11, k1=0.01, k2=0.03, data_range=1.0):
    """Reference SSIM on a single-channel float image, python loops.

    Gaussian-weighted local stats with an exact win x win kernel, border
    handled by cropping (win-1)//2 pixels before averaging the SSIM map.
    """
    h, w = len(a), len(a[0])
    r = (win - 1) // 2
    kern = [
        [math.exp(-((dy * dy + dx * dx) / (2 * sigma * sigma))) for dx in range(-r, r + 1)]
        for dy in range(-r, r + 1)
    ]
    ksum = sum(sum(row) for row in kern)
    kern = [[v / ksum for v in row] for row in kern]
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    vals = []
    for i in range(r, h - r):
        for j in range(r, w - r):
            mx = my = mxx = myy = mxy = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    kv = kern[dy + r][dx + r]
                    av = a[i + dy][j + dx]
                    bv = b[i + dy][j + dx]
                    mx += kv * av
                    my += kv * bv
                    mxx += kv * av * av
                    myy += kv * bv * bv
                    mxy += kv * av * bv
            vx = mxx - mx * mx
            vy = myy - my * my
            cxy = mxy - mx * my
            vals.append(
                ((2 * mx * my + c1) * (2 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
            )
    return sum(vals) / len(vals)
