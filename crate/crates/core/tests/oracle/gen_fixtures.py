"""Independent numpy oracle for the 8x8 loss fixtures.

Regenerate with:  python3 gen_fixtures.py > ../data/loss_fixtures.json
Pixel values are multiples of 1/64 so they print as exact decimals.
"""
import json
import math
import sys

import numpy as np

H = W = 8
N_FIXTURES = 20

ROAD, SKY, VEG, TL, SL = 0, 10, 8, 6, 19
SOC = [6, 7, 17]

LAMBDA_SL1, LAMBDA_SGA, THETA_TEM, THETA_SIM, TAU = 10.0, 0.5, 0.25, 0.8, 0.05
EDGE_HIGH = 0.3
RED = [(0.0, 1 / 18), (17 / 18, 1.0)]
GREEN = [(2 / 9, 4 / 9)]
MIN_S = MIN_V = 0.3


def gauss1d(size, sigma):
    x = np.arange(size) - size // 2
    k = np.exp(-(x ** 2) / (2 * sigma ** 2))
    return k / k.sum()


def window_mean(p, kernel2d):
    """Weighted local mean with the window truncated at the border and
    renormalized over the pixels it still covers."""
    h, w = p.shape
    r = kernel2d.shape[0] // 2
    out = np.empty_like(p)
    for i in range(h):
        for j in range(w):
            i0, i1 = max(0, i - r), min(h, i + r + 1)
            j0, j1 = max(0, j - r), min(w, j + r + 1)
            k = kernel2d[i0 - i + r:i1 - i + r, j0 - j + r:j1 - j + r]
            out[i, j] = (k * p[i0:i1, j0:j1]).sum() / k.sum()
    return out


def ssim(a, b):
    g = gauss1d(11, 1.5)
    k2 = np.outer(g, g)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    vals = []
    for c in range(a.shape[2]):
        x, y = a[:, :, c], b[:, :, c]
        mx, my = window_mean(x, k2), window_mean(y, k2)
        vx = window_mean(x * x, k2) - mx ** 2
        vy = window_mean(y * y, k2) - my ** 2
        cov = window_mean(x * y, k2) - mx * my
        vals.append(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


def ssim_loss(a, b):
    return min(max(1.0 - ssim(a, b), 0.0), 2.0)


def smooth_l1(a, b):
    d = np.abs(a - b)
    return float(np.where(d < 1, 0.5 * d * d, d - 0.5).mean())


def midf(mask, rec, ori):
    m = mask[:, :, None].astype(float)
    return ssim_loss(rec * m, ori * m) + LAMBDA_SL1 * smooth_l1(rec * m, ori * m)


def gray(img):
    if img.shape[2] == 1:
        return img[:, :, 0]
    return np.clip(0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2], 0, 1)


def sobel_raw(p):
    q = np.pad(p, 1, mode="edge")
    s = lambda dr, dc: q[1 + dr:1 + dr + p.shape[0], 1 + dc:1 + dc + p.shape[1]]
    gx = (s(-1, 1) + 2 * s(0, 1) + s(1, 1)) - (s(-1, -1) + 2 * s(0, -1) + s(1, -1))
    gy = (s(1, -1) + 2 * s(1, 0) + s(1, 1)) - (s(-1, -1) + 2 * s(-1, 0) + s(-1, 1))
    return gx, gy


def norm_mag(gx, gy):
    m = np.hypot(gx, gy)
    return m / m.max() if m.max() > 0 else m


def sobel(p):
    return norm_mag(*sobel_raw(p))


def canny(p, low, high):
    k = np.outer(gauss1d(5, 1.4), gauss1d(5, 1.4))
    q = np.pad(p, 2, mode="edge")
    h, w = p.shape
    sm = np.array([[(k * q[i:i + 5, j:j + 5]).sum() for j in range(w)] for i in range(h)])
    sm = np.clip(sm, 0, 1)
    gx, gy = sobel_raw(sm)
    mag = norm_mag(gx, gy)
    padded = np.pad(mag, 1)
    thin = np.zeros_like(mag)
    for i in range(h):
        for j in range(w):
            m = mag[i, j]
            if m <= 0:
                continue
            ang = math.degrees(math.atan2(-gy[i, j], gx[i, j])) % 180.0
            if ang < 22.5 or ang >= 157.5:
                d = (0, 1)
            elif ang < 67.5:
                d = (-1, 1)
            elif ang < 112.5:
                d = (1, 0)
            else:
                d = (-1, -1)
            a = padded[1 + i + d[0], 1 + j + d[1]]
            b = padded[1 + i - d[0], 1 + j - d[1]]
            if m >= a and m >= b:
                thin[i, j] = m
    strong = (thin > 0) & (thin >= high)
    weak = (thin > 0) & (thin >= low)
    edges = strong.copy()
    while True:
        grown = np.pad(edges, 1)
        nb = np.zeros_like(edges)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nb |= grown[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        new = edges | (nb & weak)
        if (new == edges).all():
            return edges
        edges = new


def components(mask):
    """8-connected components by repeated dilation from unvisited seeds."""
    h, w = mask.shape
    seen = np.zeros_like(mask)
    out = []
    for i in range(h):
        for j in range(w):
            if mask[i, j] and not seen[i, j]:
                comp = np.zeros_like(mask)
                comp[i, j] = True
                while True:
                    g = np.pad(comp, 1)
                    nb = np.zeros_like(comp)
                    for dr in (-1, 0, 1):
                        for dc in (-1, 0, 1):
                            nb |= g[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
                    new = comp | (nb & mask)
                    if (new == comp).all():
                        break
                    comp = new
                seen |= comp
                out.append(comp)
    return out


def upper_lower(mask):
    up = np.zeros_like(mask)
    for comp in components(mask):
        rows = np.where(comp.any(axis=1))[0]
        top, height = rows[0], rows[-1] - rows[0] + 1
        rr = np.arange(mask.shape[0])[:, None]
        up |= comp & (rr - top < (height - 1) / 2)
    return up, mask & ~up


def hsv(img):
    r, g, b = img[:, :, 0], img[:, :, 1], img[:, :, 2]
    mx, mn = img.max(axis=2), img.min(axis=2)
    d = mx - mn
    s = np.where(mx > 0, d / np.where(mx > 0, mx, 1), 0)
    h = np.zeros_like(mx)
    with np.errstate(divide="ignore", invalid="ignore"):
        hr = ((g - b) / d) % 6
        hg = (b - r) / d + 2
        hb = (r - g) / d + 4
    h = np.where(mx == r, hr, np.where(mx == g, hg, hb)) / 6
    h = np.where(d == 0, 0, h)
    return np.where(h >= 1, 0, h), s, mx


def in_ranges(h, ranges):
    return np.any([(h >= a) & (h < b) for a, b in ranges], axis=0)


def color_bright(x_ra, tl):
    h, s, v = hsv(x_ra)
    lit = (s >= MIN_S) & (v >= MIN_V)
    return tl & lit & (in_ranges(h, RED) | in_ranges(h, GREEN))


def thermal_bright(x_rb, tl):
    mu = x_rb[:, :, 0][tl].mean()
    return tl & (x_rb[:, :, 0] >= mu)


def feat(img, m):
    return img[m].mean(axis=0) if m.any() else None


def dist(a, b):
    return None if a is None or b is None else float(np.sqrt(((a - b) ** 2).sum()))


def losses(f):
    x_ra, x_rb, x_fa, x_fb = f["x_ra"], f["x_rb"], f["x_fa"], f["x_fb"]
    la, lb = f["labels_a"], f["labels_b"]
    out = {}
    soc = np.isin(la, SOC)
    out["ssim"] = ssim(f["x_rec_a"], x_ra)
    out["ssim_loss"] = ssim_loss(f["x_rec_a"], x_ra)
    out["smooth_l1"] = smooth_l1(f["x_rec_a"], x_ra)
    out["global_reconstruction"] = midf(np.ones((H, W), bool), f["x_rec_a"], x_ra)

    g_ra = gray(x_ra)
    sl, tl_a, veg = la == SL, la == TL, la == VEG
    sl_bright = sl & (g_ra >= g_ra[sl].mean())
    fb = x_fb[:, :, 0]
    out["sla"] = max(fb[veg].mean() - fb[sl_bright].min() + THETA_TEM, 0.0)
    va = np.where(tl_a, g_ra - g_ra[tl_a].mean(), 0).ravel()
    vb = np.where(tl_a, fb - fb[tl_a].mean(), 0).ravel()
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    cos = 0.0 if na == 0 or nb == 0 else float(np.clip(va @ vb / (na * nb), -1, 1))
    out["tla_cos"] = max(THETA_SIM - cos, 0.0)
    lights = sl | tl_a
    grad = np.where(lights, sobel(fb), 0)
    edges = (canny(g_ra, 0.4 * EDGE_HIGH, EDGE_HIGH) & lights).astype(float)
    out["sga"] = float(np.abs(grad - edges).mean())
    out["abc"] = out["sla"] + out["tla_cos"] + LAMBDA_SGA * out["sga"]

    out["cbc"] = midf(soc, f["x_rec_a"], x_ra)
    out["ac_a"] = midf(f["q_ao"], f["x_ab_mix"], x_rb)
    q_con = ~(f["q_bo"] | f["q_bf"])
    mc = q_con[:, :, None].astype(float)
    cgr = smooth_l1(sobel(gray(f["x_ba_mix"] * mc))[:, :, None], sobel(gray(x_rb * mc))[:, :, None])
    out["cgr"] = cgr
    out["ac_b"] = midf(f["q_bo"], f["x_ba_mix"], x_ra) + cgr

    tl_b = lb == TL
    br_b = thermal_bright(x_rb, tl_b)
    dr_b = tl_b & ~br_b
    g_fa = gray(x_fa)
    delta = g_fa[br_b].min()
    out["tll"] = max(g_fa[dr_b].mean() - delta, 0.0) / max(delta, 1e-6)

    br_a = color_bright(x_ra, tl_a)
    up_a, lo_a = upper_lower(tl_a)
    up_b, lo_b = upper_lower(tl_b)
    ub_ra, lb_ra = feat(x_ra, up_a & br_a), feat(x_ra, lo_a & br_a)
    ub_fa, lb_fa = feat(x_fa, up_b & br_b), feat(x_fa, lo_b & br_b)
    d_uu, d_ll, d_lu = dist(ub_fa, ub_ra), dist(lb_fa, lb_ra), dist(lb_fa, ub_ra)
    upper = d_uu or 0.0
    if d_ll is None:
        lower = 0.0
    elif d_lu is None:
        lower = d_ll / (d_ll + TAU)
    else:
        lower = d_ll / (min(d_ll, d_lu) + TAU)
    out["tlc"] = upper + lower
    out["d_uu"], out["d_ll"], out["d_lu"] = d_uu, d_ll, d_lu
    out["total_partial"] = out["abc"] + out["cbc"] + out["ac_a"] + out["ac_b"] + out["tll"] + out["tlc"]
    return out


def q64(rng, shape, lo=0, hi=64):
    return rng.integers(lo, hi + 1, size=shape) / 64.0


def block(mask, top, left, h, w):
    mask[top:top + h, left:left + w] = True


def scene(rng):
    """Label map with vegetation, a streetlight, a traffic light (4x2) and a
    small sign, over road and sky."""
    lab = np.full((H, W), SKY, dtype=np.uint8)
    lab[5:, :] = ROAD
    lab[0:3, 0:3] = VEG
    tl_top, tl_left = int(rng.integers(0, 3)), int(rng.integers(4, 7))
    lab[tl_top:tl_top + 4, tl_left:tl_left + 2] = TL
    lab[3:5, 0:2] = SL
    lab[6:8, 3] = 7
    return lab, (tl_top, tl_left)


def fixture(seed):
    rng = np.random.default_rng(seed)
    la, (tt, tl) = scene(rng)
    lb, _ = scene(rng)
    x_ra = q64(rng, (H, W, 3))
    # Lit lamps in the color frame: the upper lamp always lit, the lower lamp
    # lit in half the fixtures, so both color-loss branches are exercised.
    lamps = [(1.0, 0.125, 0.125), (0.125, 1.0, 0.25)]
    upper = lamps[seed % 2]
    x_ra[tt:tt + 2, tl:tl + 2] = upper
    x_ra[tt + 2:tt + 4, tl:tl + 2] = lamps[1 - seed % 2] if seed % 4 < 2 else (0.125, 0.125, 0.125)
    f = {
        "labels_a": la,
        "labels_b": lb,
        "x_ra": x_ra,
        "x_rb": q64(rng, (H, W, 1), 4, 64),
        "x_fa": q64(rng, (H, W, 3)),
        "x_fb": q64(rng, (H, W, 1)),
        "x_rec_a": q64(rng, (H, W, 3)),
        "x_ab_mix": q64(rng, (H, W, 1)),
        "x_ba_mix": q64(rng, (H, W, 3)),
    }
    for name in ("q_ao", "q_bo", "q_bf"):
        m = np.zeros((H, W), bool)
        block(m, int(rng.integers(0, 6)), int(rng.integers(0, 6)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        f[name] = m
    return f


def encode(v):
    if isinstance(v, np.ndarray):
        if v.dtype == bool:
            return v.astype(int).tolist()
        if v.dtype == np.uint8:
            return v.astype(int).tolist()
        return v.tolist()
    return v


def main():
    out = {"height": H, "width": W, "fixtures": []}
    for seed in range(N_FIXTURES):
        f = fixture(seed)
        out["fixtures"].append({"seed": seed, **{k: encode(v) for k, v in f.items()}, "expected": losses(f)})
    json.dump(out, sys.stdout, indent=None, separators=(",", ":"))
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
