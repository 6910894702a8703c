"""Dense state kernels and the depth-first branch driver.

``(P v)[i] = i^ny * (-1)^popcount((i ^ x) & z) * v[i ^ x]`` for the Pauli
with X-part mask ``x``, Z-part mask ``z`` and ``ny`` Y letters.

Two implementations share one interface: scalar loops compiled with numba,
and vectorized numpy used when numba is switched off.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit
from .program import K_CNOT, K_PAULI, K_PEXP, K_PREP, K_U1, REMOVE_X, REMOVE_Z, Program

SQRT2 = math.sqrt(2.0)

# --- numba loops ------------------------------------------------------------


@njit(cache=True)
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit(cache=True)
def _ipow(ny):
    r = ny & 3
    if r == 0:
        return 1.0 + 0.0j
    if r == 1:
        return 0.0 + 1.0j
    if r == 2:
        return -1.0 + 0.0j
    return 0.0 - 1.0j


@njit(cache=True)
def _phase(i, xm, zm, base):
    if _parity((i ^ xm) & zm):
        return -base
    return base


@njit(cache=True)
def nb_apply(v, kind, xm, zm, ny, b0, b1, angle, mat, nb):
    size = 1 << nb
    if kind == K_U1:
        step = 1 << b0
        m00, m01, m10, m11 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
        for i in range(size):
            if i & step == 0:
                a = v[i]
                b = v[i | step]
                v[i] = m00 * a + m01 * b
                v[i | step] = m10 * a + m11 * b
    elif kind == K_CNOT:
        cm = 1 << b0
        tm = 1 << b1
        for i in range(size):
            if (i & cm) != 0 and (i & tm) == 0:
                a = v[i]
                v[i] = v[i | tm]
                v[i | tm] = a
    elif kind == K_PEXP or kind == K_PAULI:
        base = _ipow(ny)
        if kind == K_PEXP:
            c = math.cos(angle) + 0.0j
            s = 1j * math.sin(angle)
        else:
            c = 0.0j
            s = 1.0 + 0.0j
        for i in range(size):
            j = i ^ xm
            if xm == 0:
                v[i] = (c + s * _phase(i, xm, zm, base)) * v[i]
            elif i < j:
                a = v[i]
                b = v[j]
                v[i] = c * a + s * _phase(i, xm, zm, base) * b
                v[j] = c * b + s * _phase(j, xm, zm, base) * a
    elif kind == K_PREP:
        a0 = mat[0, 0]
        a1 = mat[1, 0]
        for i in range(size):
            v[i + size] = a1 * v[i]
            v[i] = a0 * v[i]
        return nb + 1
    return nb


@njit(cache=True)
def nb_project(src, dst, nb, xm, zm, ny, s):
    size = 1 << nb
    norm = 0.0
    if xm == 0:
        # diagonal: keep the rows with the right parity
        for i in range(size):
            if _parity(i & zm) == s:
                val = src[i]
                dst[i] = val
                norm += val.real * val.real + val.imag * val.imag
            else:
                dst[i] = 0.0
        return norm
    sg = 1.0 - 2.0 * s
    if zm == 0:
        # pure X string: the pair values differ only by the sign
        for i in range(size):
            j = i ^ xm
            if i < j:
                vi = 0.5 * (src[i] + sg * src[j])
                dst[i] = vi
                dst[j] = sg * vi
                norm += 2.0 * (vi.real * vi.real + vi.imag * vi.imag)
        return norm
    base = _ipow(ny)
    for i in range(size):
        j = i ^ xm
        if i < j:
            a = src[i]
            b = src[j]
            vi = 0.5 * (a + sg * _phase(i, xm, zm, base) * b)
            vj = 0.5 * (b + sg * _phase(j, xm, zm, base) * a)
            dst[i] = vi
            dst[j] = vj
            norm += vi.real * vi.real + vi.imag * vi.imag + vj.real * vj.real + vj.imag * vj.imag
    return norm


@njit(cache=True)
def nb_remove(v, nb, bit, mode, s):
    low = (1 << bit) - 1
    half = 1 << (nb - 1)
    for j in range(half):
        i = ((j & ~low) << 1) | (j & low)
        if mode == REMOVE_Z:
            v[j] = v[i | (s << bit)]
        else:
            v[j] = SQRT2 * v[i]
    return nb - 1


@njit(cache=True)
def nb_measure_out(src, dst, nb, bit, mode, s):
    """Project a single-qubit Z or X measurement and drop its bit in one pass."""
    low = (1 << bit) - 1
    half = 1 << (nb - 1)
    sg = 1.0 - 2.0 * s
    norm = 0.0
    for j in range(half):
        i = ((j & ~low) << 1) | (j & low)
        if mode == REMOVE_Z:
            val = src[i | (s << bit)]
        else:
            val = (src[i] + sg * src[i | (1 << bit)]) / SQRT2
        dst[j] = val
        norm += val.real * val.real + val.imag * val.imag
    return norm


@njit(cache=True)
def nb_pauli_into(src, dst, nb, xm, zm, ny):
    size = 1 << nb
    base = _ipow(ny)
    for i in range(size):
        dst[i] = _phase(i, xm, zm, base) * src[i ^ xm]


@njit(cache=True)
def _fires(outcomes, k, cond_ptr, cond_len, cond_const, cond_idx):
    par = cond_const[k]
    for t in range(cond_len[k]):
        par ^= outcomes[cond_idx[cond_ptr[k] + t]]
    return par


@njit(cache=True)
def nb_corrections(v, nb, outcomes, start, kind, xm, zm, ny, b0, b1, angle, mat, cond_ptr, cond_len, cond_const, cond_idx):
    for k in range(start, len(kind)):
        if _fires(outcomes, k, cond_ptr, cond_len, cond_const, cond_idx):
            nb_apply(v, kind[k], xm[k], zm[k], ny[k], b0[k], b1[k], angle[k], mat[k], nb)


@njit(cache=True)
def nb_compare(v, nb, n, target):
    size = 1 << nb
    norm = 0.0
    best = -1.0
    kbest = 0
    for i in range(size):
        m = v[i].real * v[i].real + v[i].imag * v[i].imag
        norm += m
        if m > best:
            best = m
            kbest = i
    p = norm / (1 << n)
    scale = 1.0 / math.sqrt(p)
    t = target[kbest]
    if abs(t) < 1e-300:
        phase = 1.0 + 0.0j
    else:
        r = v[kbest] * scale / t
        phase = r / abs(r)
    dev = 0.0
    for i in range(size):
        d = v[i] * scale - phase * target[i]
        dev += d.real * d.real + d.imag * d.imag
    return p, math.sqrt(dev)


@njit(cache=True)
def nb_leaf_compare(v, nb, n, target, xp, zp, rc, rs, xq, zq, nyq):
    """Compare ``R X^xp Z^zp v`` with ``target`` without materializing it.

    ``R = rc + rs * Q`` is an optional trailing rotation; ``rs == 0`` skips it.
    The element formula is spelled out in each loop; a helper call here
    costs several times the loop body.
    """
    size = 1 << nb
    rot = rs != 0
    rs = rs * _ipow(nyq)
    norm = 0.0
    best = -1.0
    kbest = 0
    top = 0.0j
    for i in range(size):
        val = v[i ^ xp]
        if _parity(i & zp):
            val = -val
        if rot:
            j = i ^ xq
            w = v[j ^ xp]
            if _parity(j & zp) ^ _parity(j & zq):
                w = -w
            val = rc * val + rs * w
        m = val.real * val.real + val.imag * val.imag
        norm += m
        if m > best:
            best = m
            kbest = i
            top = val
    p = norm / (1 << n)
    scale = 1.0 / math.sqrt(p)
    t = target[kbest]
    phase = 1.0 + 0.0j
    if abs(t) >= 1e-300:
        r = top * scale / t
        phase = r / abs(r)
    dev = 0.0
    for i in range(size):
        val = v[i ^ xp]
        if _parity(i & zp):
            val = -val
        if rot:
            j = i ^ xq
            w = v[j ^ xp]
            if _parity(j & zp) ^ _parity(j & zq):
                w = -w
            val = rc * val + rs * w
        d = val * scale - phase * target[i]
        dev += d.real * d.real + d.imag * d.imag
    return p, math.sqrt(dev)


@njit(cache=True)
def nb_check(kind, xm, zm, ny, b0, b1, cbit, remove, angle, mat, cond_ptr, cond_len, cond_const, cond_idx,
             body_len, pauli_run, meas_ops, n, nb0, bufs, target, tol, prune, num_cbits):
    """Depth-first walk over all outcome strings; compares every leaf to ``target``.

    ``bufs[0]`` holds the state before the first measurement, with ``nb0`` bits.
    ``bufs[depth + 1]`` is scratch for the corrected leaf.  The leading run of
    Pauli corrections is merged into one Pauli (its phase is global).
    """
    depth = len(meas_ops)
    outcomes = np.zeros(max(num_cbits, 1), dtype=np.int64)
    fail_out = np.zeros(max(num_cbits, 1), dtype=np.int64)
    worst_out = np.zeros(max(num_cbits, 1), dtype=np.int64)
    choice = np.zeros(depth + 1, dtype=np.int64)
    nbs = np.zeros(depth + 1, dtype=np.int64)
    nbs[0] = nb0
    branches = 0
    worst = 0.0
    total_p = 0.0
    failed = False
    d = 0
    while d >= 0:
        if d == depth:
            nb = nbs[d]
            xt = 0
            zt = 0
            for k in range(body_len, pauli_run):
                if _fires(outcomes, k, cond_ptr, cond_len, cond_const, cond_idx):
                    xt ^= xm[k]
                    zt ^= zm[k]
            if pauli_run == len(kind) or (pauli_run == len(kind) - 1 and kind[pauli_run] == K_PEXP):
                rc = 1.0 + 0.0j
                rs = 0.0j
                last = len(kind) - 1
                if pauli_run == last and _fires(outcomes, last, cond_ptr, cond_len, cond_const, cond_idx):
                    rc = math.cos(angle[last]) + 0.0j
                    rs = 1j * math.sin(angle[last])
                p, dev = nb_leaf_compare(bufs[d], nb, n, target, xt, zt, rc, rs, xm[last], zm[last], ny[last])
            else:
                leaf = bufs[depth + 1]
                nb_pauli_into(bufs[d], leaf, nb, xt, zt, 0)
                nb_corrections(leaf, nb, outcomes, pauli_run, kind, xm, zm, ny, b0, b1, angle, mat,
                               cond_ptr, cond_len, cond_const, cond_idx)
                p, dev = nb_compare(leaf, nb, n, target)
            branches += 1
            total_p += p
            if dev > worst or branches == 1:
                worst = dev
                worst_out[:] = outcomes
            if dev > tol and not failed:
                failed = True
                fail_out[:] = outcomes
            d -= 1
            if d >= 0:
                choice[d] += 1
            continue
        if choice[d] == 2:
            d -= 1
            if d >= 0:
                choice[d] += 1
            continue
        s = choice[d]
        k = meas_ops[d]
        nb = nbs[d]
        fused = remove[k] != 0 and ny[k] == 0 and (xm[k] | zm[k]) == (1 << b0[k])
        if fused:
            norm = nb_measure_out(bufs[d], bufs[d + 1], nb, b0[k], remove[k], s)
        else:
            norm = nb_project(bufs[d], bufs[d + 1], nb, xm[k], zm[k], ny[k], s)
        if norm < prune:
            choice[d] += 1
            continue
        outcomes[cbit[k]] = s
        if fused:
            nb -= 1
        elif remove[k] != 0:
            nb = nb_remove(bufs[d + 1], nb, b0[k], remove[k], s)
        end = meas_ops[d + 1] if d + 1 < depth else body_len
        for op in range(k + 1, end):
            nb = nb_apply(bufs[d + 1], kind[op], xm[op], zm[op], ny[op], b0[op], b1[op], angle[op], mat[op], nb)
        d += 1
        nbs[d] = nb
        choice[d] = 0
    return branches, worst, total_p, failed, fail_out, worst_out


# --- numpy versions ---------------------------------------------------------


def _np_pauli(v: np.ndarray, xm: int, zm: int, ny: int) -> np.ndarray:
    idx = np.arange(len(v), dtype=np.int64)
    src = idx ^ xm
    sign = 1 - 2 * (np.bitwise_count(src & zm) & 1).astype(np.int64)
    return (1j**ny) * sign * v[src]


def np_apply(v: np.ndarray, kind: int, xm: int, zm: int, ny: int, b0: int, b1: int, angle: float, mat: np.ndarray) -> np.ndarray:
    if kind == K_U1:
        w = v.reshape(-1, 2, 1 << b0)
        return np.einsum("ij,ajb->aib", mat, w).reshape(-1)
    if kind == K_CNOT:
        idx = np.arange(len(v), dtype=np.int64)
        flip = ((idx >> b0) & 1) << b1
        return v[idx ^ flip]
    if kind == K_PEXP:
        return math.cos(angle) * v + 1j * math.sin(angle) * _np_pauli(v, xm, zm, ny)
    if kind == K_PAULI:
        return _np_pauli(v, xm, zm, ny)
    if kind == K_PREP:
        return np.concatenate([mat[0, 0] * v, mat[1, 0] * v])
    raise ValueError(f"unknown kernel op {kind}")


def np_project(v: np.ndarray, xm: int, zm: int, ny: int, s: int) -> np.ndarray:
    return 0.5 * (v + (1 - 2 * s) * _np_pauli(v, xm, zm, ny))


def np_remove(v: np.ndarray, bit: int, mode: int, s: int) -> np.ndarray:
    w = v.reshape(-1, 2, 1 << bit)
    if mode == REMOVE_Z:
        return w[:, s, :].reshape(-1).copy()
    return SQRT2 * w[:, 0, :].reshape(-1)


def np_corrections(prog: Program, v: np.ndarray, outcomes: np.ndarray) -> tuple[np.ndarray, list[int]]:
    fired = []
    for k in range(prog.body_len, len(prog.kind)):
        par = int(prog.cond_const[k])
        ptr, ln = prog.cond_ptr[k], prog.cond_len[k]
        for t in prog.cond_idx[ptr:ptr + ln]:
            par ^= int(outcomes[t])
        if par:
            fired.append(k)
            v = np_apply(v, prog.kind[k], prog.xm[k], prog.zm[k], prog.ny[k], prog.b0[k], prog.b1[k], prog.angle[k], prog.mat[k])
    return v, fired


def np_run_segment(prog: Program, v: np.ndarray, lo: int, hi: int) -> np.ndarray:
    for k in range(lo, hi):
        v = np_apply(v, prog.kind[k], prog.xm[k], prog.zm[k], prog.ny[k], prog.b0[k], prog.b1[k], prog.angle[k], prog.mat[k])
    return v


def np_branches(prog: Program, v0: np.ndarray, prune: float, fixed: dict[int, int] | None = None):
    """Yield ``(outcomes, leaf_vector_before_corrections)`` depth first.

    ``fixed`` pins outcomes of some cbits; other branches are skipped.
    """
    meas = [int(k) for k in prog.meas_ops]
    depth = len(meas)
    first = meas[0] if depth else prog.body_len
    v = np_run_segment(prog, v0, 0, first)
    outcomes = np.zeros(max(prog.num_cbits, 1), dtype=np.int64)

    def walk(d: int, v: np.ndarray):
        if d == depth:
            yield outcomes.copy(), v
            return
        k = meas[d]
        cb = int(prog.cbit[k])
        for s in (0, 1):
            if fixed is not None and cb in fixed and fixed[cb] != s:
                continue
            w = np_project(v, prog.xm[k], prog.zm[k], prog.ny[k], s)
            if float(np.vdot(w, w).real) < prune:
                continue
            outcomes[cb] = s
            if prog.remove[k]:
                w = np_remove(w, int(prog.b0[k]), int(prog.remove[k]), s)
            end = meas[d + 1] if d + 1 < depth else prog.body_len
            w = np_run_segment(prog, w, k + 1, end)
            yield from walk(d + 1, w)

    yield from walk(0, v)


def np_compare(v: np.ndarray, n: int, target: np.ndarray) -> tuple[float, float]:
    p = float(np.vdot(v, v).real) / (1 << n)
    u = v / math.sqrt(p)
    k = int(np.argmax(np.abs(u)))
    t = target[k]
    phase = 1.0 if abs(t) < 1e-300 else (u[k] / t) / abs(u[k] / t)
    return p, float(np.linalg.norm(u - phase * target))


def run_check(prog: Program, target: np.ndarray, tol: float, prune: float):
    """Full branch walk; returns ``(branches, worst, total_p, failed, fail_out, worst_out)``."""
    size = 1 << prog.max_nb
    v0 = np.zeros(size, dtype=np.complex128)
    idx = np.arange(1 << prog.n)
    v0[idx | (idx << prog.n)] = 1.0
    if USE_NUMBA:
        depth = prog.num_measurements
        bufs = np.zeros((depth + 2, size), dtype=np.complex128)
        nb = prog.n + prog.n
        first = int(prog.meas_ops[0]) if depth else prog.body_len
        for k in range(first):
            nb = nb_apply(v0, prog.kind[k], prog.xm[k], prog.zm[k], prog.ny[k], prog.b0[k], prog.b1[k], prog.angle[k], prog.mat[k], nb)
        bufs[0] = v0
        return nb_check(
            prog.kind, prog.xm, prog.zm, prog.ny, prog.b0, prog.b1, prog.cbit, prog.remove, prog.angle, prog.mat,
            prog.cond_ptr, prog.cond_len, prog.cond_const, prog.cond_idx, prog.body_len, prog.pauli_run, prog.meas_ops,
            prog.n, nb, bufs, target, tol, prune, prog.num_cbits,
        )
    v0 = v0[: 1 << (2 * prog.n)]
    branches = 0
    worst = 0.0
    total_p = 0.0
    failed = False
    fail_out = worst_out = np.zeros(max(prog.num_cbits, 1), dtype=np.int64)
    for outcomes, v in np_branches(prog, v0, prune):
        v, _ = np_corrections(prog, v, outcomes)
        p, dev = np_compare(v, prog.n, target)
        branches += 1
        total_p += p
        if dev > worst or branches == 1:
            worst, worst_out = dev, outcomes
        if dev > tol and not failed:
            failed, fail_out = True, outcomes
    return branches, worst, total_p, failed, fail_out, worst_out
