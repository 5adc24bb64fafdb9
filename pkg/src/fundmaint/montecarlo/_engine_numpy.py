"""Pure-numpy path-stepping lane.

Fallback used when the compiled extension is unavailable, and the reference
for its output.  Both lanes follow the same stream protocol:

* path ``p`` draws from ``Philox(key=[seed, p])``;
* draws happen in chunks of ``min(CHUNK, steps_remaining)``: one block of
  standard normals, then (bridge mode only) one block of uniforms;
* a path absorbed mid-chunk discards the rest of that chunk;
* regenerated runs never stop early, so they consume whole chunks.

The update arithmetic mirrors the compiled lane expression for expression,
so the two lanes produce identical output arrays for identical inputs.
"""

import math

import numpy as np

COMPILED = False
CHUNK = 4096
_BATCH = 1024

KIND_CONSTANT = 0
KIND_AFFINE = 1
KIND_GENERIC = 2


def _generator(seed, path):
    return np.random.Generator(np.random.Philox(key=np.array([seed, path], dtype=np.uint64)))


def _step(kind, c0, c1, mu_dt, sig_sqdt, dt, drift_fn, diffsq_fn, x, z):
    if kind == KIND_CONSTANT:
        return x + (mu_dt + sig_sqdt * z)
    if kind == KIND_AFFINE:
        return x + ((c0 + c1 * x) * dt + sig_sqdt * z)
    return x + (drift_fn(x) * dt + np.sqrt(diffsq_fn(x) * dt) * z)


def run_fpt(kind, c0, c1, sig2, drift_fn, diffsq_fn,
            x_start, dt, max_steps, bridge, seed, lo, hi,
            steps_out, hit_out):
    """Single-passage run for paths ``lo .. hi-1`` of the master stream."""
    mu_dt = c0 * dt
    sig_sqdt = math.sqrt(sig2 * dt)
    neg_s2h = -((sig2 * dt) * 0.5)
    n = hi - lo

    for b0 in range(0, n, _BATCH):
        b1 = min(n, b0 + _BATCH)
        bs = b1 - b0
        gens = [_generator(seed, lo + b0 + i) for i in range(bs)]
        x = np.full(bs, x_start, dtype=np.float64)
        idx = np.arange(bs)
        steps = np.full(bs, max_steps, dtype=np.int64)
        hits = np.zeros(bs, dtype=np.uint8)
        Z = np.empty((bs, CHUNK))
        U = np.empty((bs, CHUNK)) if bridge else None
        done = 0
        while done < max_steps and idx.size:
            m = int(min(CHUNK, max_steps - done))
            na = idx.size
            for row, p in enumerate(idx):
                gens[p].standard_normal(m, out=Z[row, :m])
                if bridge:
                    gens[p].random(m, out=U[row, :m])
            if bridge:
                thr = np.log(U[:na, :m])
                thr *= neg_s2h
            xa = x[idx]
            live = np.ones(na, dtype=bool)
            for k in range(m):
                z = Z[:na, k]
                xn = _step(kind, c0, c1, mu_dt, sig_sqdt, dt, drift_fn, diffsq_fn, xa, z)
                crossed = xn <= 0.0
                if bridge:
                    crossed |= thr[:, k] > xa * xn
                newly = live & crossed
                if newly.any():
                    steps[idx[newly]] = done + k + 1
                    hits[idx[newly]] = 1
                    live &= ~crossed
                # Dead rows are pinned at 0 so generic coefficients are never
                # evaluated outside the state space.
                xa = np.where(live, xn, 0.0)
            x[idx] = xa
            idx = idx[live]
            done += m
        steps_out[b0:b1] = steps
        hit_out[b0:b1] = hits


def run_regen(kind, c0, c1, sig2, drift_fn, diffsq_fn,
              start, theta, dt, r, n_steps, bridge, seed, lo, hi,
              grid_steps, grid_out, total_out, nhits_out,
              record, rec_steps):
    """Regenerated runs for paths ``lo .. hi-1``.

    Returns the number of recorded hit steps (contiguous per path, in path
    order) or -1 when the recording buffer overflowed.
    """
    mu_dt = c0 * dt
    sig_sqdt = math.sqrt(sig2 * dt)
    neg_s2h = -((sig2 * dt) * 0.5)
    off = 0.5 if bridge else 0.0
    n = hi - lo
    n_grid = len(grid_steps)
    rec_base = 0
    overflow = False

    for b0 in range(0, n, _BATCH):
        b1 = min(n, b0 + _BATCH)
        bs = b1 - b0
        gens = [_generator(seed, lo + b0 + i) for i in range(bs)]
        x = np.full(bs, start, dtype=np.float64)
        run = np.zeros(bs)
        nh = np.zeros(bs, dtype=np.int64)
        Z = np.empty((bs, CHUNK))
        U = np.empty((bs, CHUNK)) if bridge else None
        rec_pairs = [] if record else None
        done = 0
        j = 0
        while done < n_steps:
            m = int(min(CHUNK, n_steps - done))
            for row in range(bs):
                gens[row].standard_normal(m, out=Z[row, :m])
                if bridge:
                    gens[row].random(m, out=U[row, :m])
            if bridge:
                thr = np.log(U[:, :m])
                thr *= neg_s2h
            for k in range(m):
                sg = done + k + 1
                z = Z[:, k]
                xn = _step(kind, c0, c1, mu_dt, sig_sqdt, dt, drift_fn, diffsq_fn, x, z)
                crossed = xn <= 0.0
                if bridge:
                    crossed |= thr[:, k] > x * xn
                if crossed.any():
                    d = math.exp(-(r * ((sg - off) * dt)))
                    run += d * crossed
                    nh += crossed
                    if record:
                        rec_pairs.append((np.nonzero(crossed)[0], sg))
                    xn = np.where(crossed, theta, xn)
                x = xn
                while j < n_grid and grid_steps[j] == sg:
                    grid_out[b0:b1, j] = run
                    j += 1
            done += m
        total_out[b0:b1] = run
        nhits_out[b0:b1] = nh
        if record:
            total_hits = int(nh.sum())
            if rec_base + total_hits > len(rec_steps):
                overflow = True
            else:
                rows = np.concatenate([p for p, _ in rec_pairs]) if rec_pairs else np.empty(0, np.int64)
                sgs = np.concatenate([np.full(len(p), s, dtype=np.int64) for p, s in rec_pairs]) \
                    if rec_pairs else np.empty(0, np.int64)
                order = np.argsort(rows, kind="stable")
                rec_steps[rec_base:rec_base + total_hits] = sgs[order]
                rec_base += total_hits
    if overflow:
        return -1
    return rec_base


def run_alm_direct(A0, drift_dt, sig2, dt, r, etheta, etheta_m1, n_steps,
                   seed, lo, hi, liabilities, grid_steps, grid_out,
                   total_out, nhits_out, record, rec_steps):
    """Direct asset-vs-liability runs for paths ``lo .. hi-1``."""
    sig_sqdt = math.sqrt(sig2 * dt)
    n = hi - lo
    n_grid = len(grid_steps)
    rec_base = 0
    overflow = False

    for b0 in range(0, n, _BATCH):
        b1 = min(n, b0 + _BATCH)
        bs = b1 - b0
        gens = [_generator(seed, lo + b0 + i) for i in range(bs)]
        A = np.full(bs, A0, dtype=np.float64)
        run = np.zeros(bs)
        nh = np.zeros(bs, dtype=np.int64)
        Z = np.empty((bs, CHUNK))
        rec_pairs = [] if record else None
        done = 0
        j = 0
        while done < n_steps:
            m = int(min(CHUNK, n_steps - done))
            for row in range(bs):
                gens[row].standard_normal(m, out=Z[row, :m])
            for k in range(m):
                sg = done + k + 1
                An = A * np.exp(drift_dt + sig_sqdt * Z[:, k])
                crossed = An <= liabilities[sg]
                if crossed.any():
                    contrib = (etheta_m1 * liabilities[sg]) * math.exp(-(r * (sg * dt)))
                    run += contrib * crossed
                    nh += crossed
                    if record:
                        rec_pairs.append((np.nonzero(crossed)[0], sg))
                    An = np.where(crossed, liabilities[sg] * etheta, An)
                A = An
                while j < n_grid and grid_steps[j] == sg:
                    grid_out[b0:b1, j] = run
                    j += 1
            done += m
        total_out[b0:b1] = run
        nhits_out[b0:b1] = nh
        if record:
            total_hits = int(nh.sum())
            if rec_base + total_hits > len(rec_steps):
                overflow = True
            else:
                rows = np.concatenate([p for p, _ in rec_pairs]) if rec_pairs else np.empty(0, np.int64)
                sgs = np.concatenate([np.full(len(p), s, dtype=np.int64) for p, s in rec_pairs]) \
                    if rec_pairs else np.empty(0, np.int64)
                order = np.argsort(rows, kind="stable")
                rec_steps[rec_base:rec_base + total_hits] = sgs[order]
                rec_base += total_hits
    if overflow:
        return -1
    return rec_base
