# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see ``_pure.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, atan2, sqrt, floor, fmod, M_PI

cnp.import_array()


def nonmax_suppress(mag_in, gx_in, gy_in):
    cdef double[:, ::1] mag = np.ascontiguousarray(mag_in, dtype=np.float64)
    cdef double[:, ::1] gx = np.ascontiguousarray(gx_in, dtype=np.float64)
    cdef double[:, ::1] gy = np.ascontiguousarray(gy_in, dtype=np.float64)
    cdef Py_ssize_t rows = mag.shape[0], cols = mag.shape[1], r, c
    out_arr = np.zeros((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int sr, sc
    cdef double v, ax, ay, w, fwd, bwd
    if rows < 3 or cols < 3:
        return out_arr
    for r in range(1, rows - 1):
        for c in range(1, cols - 1):
            v = mag[r, c]
            if v <= 0.0:
                continue
            sr = -1 if gy[r, c] < 0 else 1
            sc = -1 if gx[r, c] < 0 else 1
            ax = gx[r, c] if gx[r, c] >= 0 else -gx[r, c]
            ay = gy[r, c] if gy[r, c] >= 0 else -gy[r, c]
            if ax >= ay:
                w = ay / ax if ax > 0 else ay / 1.0
                fwd = (1.0 - w) * mag[r, c + sc] + w * mag[r + sr, c + sc]
                bwd = (1.0 - w) * mag[r, c - sc] + w * mag[r - sr, c - sc]
            else:
                w = ax / ay if ay > 0 else ax / 1.0
                fwd = (1.0 - w) * mag[r + sr, c] + w * mag[r + sr, c + sc]
                bwd = (1.0 - w) * mag[r - sr, c] + w * mag[r - sr, c - sc]
            if v > bwd and v >= fwd:
                out[r, c] = v
    return out_arr


def hysteresis(strong_in, weak_in):
    cdef cnp.uint8_t[:, ::1] strong = np.ascontiguousarray(strong_in, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] weak = np.ascontiguousarray(weak_in, dtype=np.uint8)
    cdef Py_ssize_t rows = strong.shape[0], cols = strong.shape[1]
    out_arr = np.zeros((rows, cols), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    stack_arr = np.empty(rows * cols, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top, r, c, rr, cc, p
    cdef int dr, dc
    for r in range(rows):
        for c in range(cols):
            if not strong[r, c] or out[r, c]:
                continue
            out[r, c] = 1
            top = 0
            stack[top] = r * cols + c
            top += 1
            while top > 0:
                top -= 1
                p = stack[top]
                rr = p // cols
                cc = p - rr * cols
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        if rr + dr < 0 or rr + dr >= rows or cc + dc < 0 or cc + dc >= cols:
                            continue
                        if out[rr + dr, cc + dc]:
                            continue
                        if weak[rr + dr, cc + dc] or strong[rr + dr, cc + dc]:
                            out[rr + dr, cc + dc] = 1
                            stack[top] = (rr + dr) * cols + cc + dc
                            top += 1
    return out_arr.astype(bool)


def zhang_suen(img_in):
    src = np.ascontiguousarray(img_in, dtype=np.uint8)
    cdef Py_ssize_t rows = src.shape[0], cols = src.shape[1]
    # zero border so neighbours never need bounds checks
    pad_arr = np.zeros((rows + 2, cols + 2), dtype=np.uint8)
    pad_arr[1:-1, 1:-1] = src != 0
    cdef cnp.uint8_t[:, ::1] pad = pad_arr
    cdef cnp.uint8_t* img = &pad[0, 0]
    cdef Py_ssize_t w = cols + 2, i, j, q, ndel, non
    # only on-pixels are revisited; the list is compacted after each sub-iteration
    on_arr = np.flatnonzero(pad_arr.ravel()).astype(np.intp)
    cdef Py_ssize_t[::1] on = on_arr
    dele_arr = np.empty(max(on_arr.size, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] dele = dele_arr
    cdef int p[9]
    cdef int count, trans, step, k
    cdef bint changed = True, c3, c4
    non = on_arr.size
    while changed:
        changed = False
        for step in range(2):
            ndel = 0
            for i in range(non):
                q = on[i]
                p[0] = img[q - w]
                p[1] = img[q - w + 1]
                p[2] = img[q + 1]
                p[3] = img[q + w + 1]
                p[4] = img[q + w]
                p[5] = img[q + w - 1]
                p[6] = img[q - 1]
                p[7] = img[q - w - 1]
                p[8] = p[0]
                count = 0
                trans = 0
                for k in range(8):
                    count += p[k]
                    if p[k] == 0 and p[k + 1] == 1:
                        trans += 1
                if count < 2 or count > 6 or trans != 1:
                    continue
                if step == 0:
                    c3 = p[0] * p[2] * p[4] == 0
                    c4 = p[2] * p[4] * p[6] == 0
                else:
                    c3 = p[0] * p[2] * p[6] == 0
                    c4 = p[0] * p[4] * p[6] == 0
                if c3 and c4:
                    dele[ndel] = q
                    ndel += 1
            if ndel:
                changed = True
                for i in range(ndel):
                    img[dele[i]] = 0
                j = 0
                for i in range(non):
                    if img[on[i]]:
                        on[j] = on[i]
                        j += 1
                non = j
    return pad_arr[1:-1, 1:-1].astype(bool)


def dog_extrema(dog_in, double threshold, int border):
    cdef double[:, :, ::1] dog = np.ascontiguousarray(dog_in, dtype=np.float64)
    cdef Py_ssize_t S = dog.shape[0], R = dog.shape[1], C = dog.shape[2], s, r, c
    cdef int ds, dr, dc
    cdef double v, w
    cdef bint is_max, is_min
    cdef Py_ssize_t b = border if border > 1 else 1
    found = []
    for s in range(1, S - 1):
        for r in range(b, R - b):
            for c in range(b, C - b):
                v = dog[s, r, c]
                if v > threshold:
                    is_max = True
                    for ds in range(-1, 2):
                        for dr in range(-1, 2):
                            for dc in range(-1, 2):
                                if dog[s + ds, r + dr, c + dc] > v:
                                    is_max = False
                    if is_max:
                        found.append((s, r, c))
                elif v < -threshold:
                    is_min = True
                    for ds in range(-1, 2):
                        for dr in range(-1, 2):
                            for dc in range(-1, 2):
                                if dog[s + ds, r + dr, c + dc] < v:
                                    is_min = False
                    if is_min:
                        found.append((s, r, c))
    if not found:
        return np.zeros((0, 3), dtype=np.intp)
    return np.asarray(found, dtype=np.intp)


def sift_descriptor(img_in, Py_ssize_t row, Py_ssize_t col, double angle, double hist_width,
                    int radius, int d=4, int n=8):
    cdef double[:, ::1] img = np.ascontiguousarray(img_in, dtype=np.float64)
    cdef Py_ssize_t R = img.shape[0], C = img.shape[1], rr, cc
    hist_arr = np.zeros((d + 2, d + 2, n + 2), dtype=np.float64)
    cdef double[:, :, ::1] hist = hist_arr
    cdef double cos_t = cos(angle) / hist_width, sin_t = sin(angle) / hist_width
    cdef double two_pi = 2.0 * M_PI
    cdef double c_rot, r_rot, rbin, cbin, dx, dy, mag, ori, obin, fr, fc, fo, wr, wc, wo
    cdef int i, j, r0, c0, o0, a, bb, e
    for i in range(-radius, radius + 1):
        for j in range(-radius, radius + 1):
            c_rot = j * cos_t + i * sin_t
            r_rot = i * cos_t - j * sin_t
            rbin = r_rot + 0.5 * d - 0.5
            cbin = c_rot + 0.5 * d - 0.5
            rr = row + i
            cc = col + j
            if not (rbin > -1 and rbin < d and cbin > -1 and cbin < d and rr > 0 and rr < R - 1 and cc > 0 and cc < C - 1):
                continue
            dx = img[rr, cc + 1] - img[rr, cc - 1]
            dy = img[rr + 1, cc] - img[rr - 1, cc]
            mag = sqrt(dx * dx + dy * dy) * exp(-(r_rot * r_rot + c_rot * c_rot) / (0.5 * d * d))
            ori = fmod(atan2(dy, dx) - angle, two_pi)
            if ori < 0:
                ori += two_pi
            if ori >= two_pi:
                ori -= two_pi
            obin = ori * (n / two_pi)
            r0 = <int>floor(rbin)
            c0 = <int>floor(cbin)
            o0 = <int>floor(obin)
            fr = rbin - r0
            fc = cbin - c0
            fo = obin - o0
            o0 = o0 % n
            if o0 < 0:
                o0 += n
            for a in range(2):
                wr = fr if a else 1.0 - fr
                for bb in range(2):
                    wc = fc if bb else 1.0 - fc
                    for e in range(2):
                        wo = fo if e else 1.0 - fo
                        hist[r0 + 1 + a, c0 + 1 + bb, o0 + e] += mag * wr * wc * wo
    for i in range(d + 2):
        for j in range(d + 2):
            hist[i, j, 0] += hist[i, j, n]
    return hist_arr[1:d + 1, 1:d + 1, :n].ravel().copy()
