# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path-stepping kernels for the Monte Carlo engine.

The stream protocol (per-path Philox generator keyed by ``[seed, path]``,
draws in chunks of ``min(CHUNK, steps_remaining)``, normals first and then
bridge uniforms) is shared with :mod:`fundmaint.montecarlo._engine_numpy`;
arithmetic is arranged expression-for-expression so both lanes produce the
same output arrays.  The extension is compiled with ``-ffp-contract=off``
to keep that true.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp as c_exp, log as c_log, sqrt as c_sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal_fill,
    random_standard_uniform_fill,
)

from numpy.random import Philox

COMPILED = True
CHUNK = 4096  # must match the literal buffer sizes below and the numpy lane

cdef enum:
    _CONST = 0
    _AFFINE = 1

# Coefficient descriptor codes (shared with the dispatcher).
KIND_CONSTANT = 0
KIND_AFFINE = 1


cdef inline bitgen_t *_state(object bit_generator) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


cdef long long _fpt_path(bitgen_t *rng, int kind, double c0, double c1,
                         double mu_dt, double sig_sqdt, double dt,
                         long long max_steps, bint bridge, double neg_s2h,
                         double x, unsigned char *hit) noexcept nogil:
    """March one path until absorption at 0 or ``max_steps``.

    Returns the 1-based index of the absorbing step (``max_steps`` when
    censored, with ``hit[0] = 0``).
    """
    cdef double zbuf[4096]
    cdef double ubuf[4096]
    cdef double xn, thr
    cdef long long done = 0, k, m
    cdef bint crossed

    while done < max_steps:
        m = max_steps - done
        if m > 4096:
            m = 4096
        random_standard_normal_fill(rng, m, zbuf)
        if bridge:
            random_standard_uniform_fill(rng, m, ubuf)
        for k in range(m):
            if kind == _CONST:
                xn = x + (mu_dt + sig_sqdt * zbuf[k])
            else:
                xn = x + ((c0 + c1 * x) * dt + sig_sqdt * zbuf[k])
            crossed = xn <= 0.0
            if bridge and not crossed:
                thr = neg_s2h * c_log(ubuf[k])
                crossed = thr > x * xn
            if crossed:
                hit[0] = 1
                return done + k + 1
            x = xn
        done += m
    hit[0] = 0
    return max_steps


def run_fpt(int kind, double c0, double c1, double sig2,
            object drift_fn, object diffsq_fn,
            double x_start, double dt, long long max_steps, bint bridge,
            object seed, long long lo, long long hi,
            long long[::1] steps_out, unsigned char[::1] hit_out):
    """Single-passage run for paths ``lo .. hi-1`` of the master stream."""
    if kind not in (KIND_CONSTANT, KIND_AFFINE):
        raise NotImplementedError("compiled lane handles constant/affine coefficients only")
    cdef double mu_dt = c0 * dt
    cdef double sig_sqdt = c_sqrt(sig2 * dt)
    cdef double neg_s2h = -((sig2 * dt) * 0.5)
    cdef long long n = hi - lo, i
    cdef bitgen_t *rng
    cdef unsigned char h = 0

    key = np.empty(2, dtype=np.uint64)
    key[0] = np.uint64(seed)
    for i in range(n):
        key[1] = np.uint64(lo + i)
        ph = Philox(key=key)
        rng = _state(ph)
        with nogil:
            steps_out[i] = _fpt_path(rng, kind, c0, c1, mu_dt, sig_sqdt, dt,
                                     max_steps, bridge, neg_s2h, x_start, &h)
        hit_out[i] = h


cdef void _regen_path(bitgen_t *rng, int kind, double c0, double c1,
                      double mu_dt, double sig_sqdt, double dt, double r,
                      long long n_steps, bint bridge, double neg_s2h,
                      double off, double start, double theta,
                      const long long *grid, long long n_grid,
                      double *grid_row, double *total, long long *nhits,
                      bint record, long long *rec_steps, long long rec_cap,
                      long long *rec_len, bint *overflow) noexcept nogil:
    """Regenerated run: restart at ``theta`` on every hit, accumulate the
    discounted unit-injection stream, snapshot it at the grid steps."""
    cdef double zbuf[4096]
    cdef double ubuf[4096]
    cdef double x = start, xn, thr, run = 0.0, t
    cdef long long done = 0, k, m, sg, j = 0, nh = 0
    cdef bint crossed

    while done < n_steps:
        m = n_steps - done
        if m > 4096:
            m = 4096
        random_standard_normal_fill(rng, m, zbuf)
        if bridge:
            random_standard_uniform_fill(rng, m, ubuf)
        for k in range(m):
            sg = done + k + 1
            if kind == _CONST:
                xn = x + (mu_dt + sig_sqdt * zbuf[k])
            else:
                xn = x + ((c0 + c1 * x) * dt + sig_sqdt * zbuf[k])
            crossed = xn <= 0.0
            if bridge and not crossed:
                thr = neg_s2h * c_log(ubuf[k])
                crossed = thr > x * xn
            if crossed:
                t = (<double> sg - off) * dt
                run += c_exp(-(r * t))
                nh += 1
                if record:
                    if rec_len[0] < rec_cap:
                        rec_steps[rec_len[0]] = sg
                        rec_len[0] += 1
                    else:
                        overflow[0] = 1
                xn = theta
            x = xn
            while j < n_grid and grid[j] == sg:
                grid_row[j] = run
                j += 1
        done += m
    total[0] = run
    nhits[0] = nh


def run_regen(int kind, double c0, double c1, double sig2,
              object drift_fn, object diffsq_fn,
              double start, double theta, double dt, double r,
              long long n_steps, bint bridge,
              object seed, long long lo, long long hi,
              long long[::1] grid_steps,
              double[:, ::1] grid_out,
              double[::1] total_out,
              long long[::1] nhits_out,
              bint record, long long[::1] rec_steps):
    """Regenerated runs for paths ``lo .. hi-1``.

    Returns the number of recorded hit steps, or -1 when the recording
    buffer overflowed (the caller retries with a larger buffer).
    Recorded steps are laid out contiguously per path, in path order.
    """
    if kind not in (KIND_CONSTANT, KIND_AFFINE):
        raise NotImplementedError("compiled lane handles constant/affine coefficients only")
    cdef double mu_dt = c0 * dt
    cdef double sig_sqdt = c_sqrt(sig2 * dt)
    cdef double neg_s2h = -((sig2 * dt) * 0.5)
    cdef double off = 0.5 if bridge else 0.0
    cdef long long n = hi - lo, i
    cdef long long n_grid = grid_steps.shape[0]
    cdef const long long *grid = NULL
    cdef double *grid_row = NULL
    cdef long long rec_cap = rec_steps.shape[0] if record else 0
    cdef long long rec_len = 0
    cdef long long *rec_ptr = NULL
    cdef bint overflow = 0
    cdef bitgen_t *rng

    if n_grid > 0:
        grid = &grid_steps[0]
    if record and rec_cap > 0:
        rec_ptr = &rec_steps[0]

    key = np.empty(2, dtype=np.uint64)
    key[0] = np.uint64(seed)
    for i in range(n):
        key[1] = np.uint64(lo + i)
        ph = Philox(key=key)
        rng = _state(ph)
        if n_grid > 0:
            grid_row = &grid_out[i, 0]
        with nogil:
            _regen_path(rng, kind, c0, c1, mu_dt, sig_sqdt, dt, r, n_steps,
                        bridge, neg_s2h, off, start, theta, grid, n_grid,
                        grid_row, &total_out[i], &nhits_out[i],
                        record, rec_ptr, rec_cap, &rec_len, &overflow)
    if overflow:
        return -1
    return rec_len


cdef void _alm_path(bitgen_t *rng, double A0, double drift_dt, double sig_sqdt,
                    double dt, double r, double etheta, double etheta_m1,
                    long long n_steps, const double *L,
                    const long long *grid, long long n_grid,
                    double *grid_row, double *total, long long *nhits,
                    bint record, long long *rec_steps, long long rec_cap,
                    long long *rec_len, bint *overflow) noexcept nogil:
    """Direct asset-path run against the moving liability barrier.

    Grid-time absorption only (no bridge correction); hits restore the
    asset level to ``L * e^theta`` and the discounted injection value
    ``(e^theta - 1) * L * e^{-r t}`` is accumulated.
    """
    cdef double zbuf[4096]
    cdef double A = A0, An, run = 0.0, t
    cdef long long done = 0, k, m, sg, j = 0, nh = 0

    while done < n_steps:
        m = n_steps - done
        if m > 4096:
            m = 4096
        random_standard_normal_fill(rng, m, zbuf)
        for k in range(m):
            sg = done + k + 1
            An = A * c_exp(drift_dt + sig_sqdt * zbuf[k])
            if An <= L[sg]:
                t = <double> sg * dt
                run += (etheta_m1 * L[sg]) * c_exp(-(r * t))
                nh += 1
                if record:
                    if rec_len[0] < rec_cap:
                        rec_steps[rec_len[0]] = sg
                        rec_len[0] += 1
                    else:
                        overflow[0] = 1
                An = L[sg] * etheta
            A = An
            while j < n_grid and grid[j] == sg:
                grid_row[j] = run
                j += 1
        done += m
    total[0] = run
    nhits[0] = nh


def run_alm_direct(double A0, double drift_dt, double sig2, double dt, double r,
                   double etheta, double etheta_m1, long long n_steps,
                   object seed, long long lo, long long hi,
                   double[::1] liabilities,
                   long long[::1] grid_steps,
                   double[:, ::1] grid_out,
                   double[::1] total_out,
                   long long[::1] nhits_out,
                   bint record, long long[::1] rec_steps):
    """Direct asset-vs-liability runs for paths ``lo .. hi-1``."""
    # Same volatility-step expression as the reserve kernels so that the
    # reduced log-ratio run sees identical noise increments.
    cdef double sig_sqdt = c_sqrt(sig2 * dt)
    cdef long long n = hi - lo, i
    cdef long long n_grid = grid_steps.shape[0]
    cdef const long long *grid = NULL
    cdef double *grid_row = NULL
    cdef long long rec_cap = rec_steps.shape[0] if record else 0
    cdef long long rec_len = 0
    cdef long long *rec_ptr = NULL
    cdef bint overflow = 0
    cdef bitgen_t *rng

    if n_grid > 0:
        grid = &grid_steps[0]
    if record and rec_cap > 0:
        rec_ptr = &rec_steps[0]

    key = np.empty(2, dtype=np.uint64)
    key[0] = np.uint64(seed)
    for i in range(n):
        key[1] = np.uint64(lo + i)
        ph = Philox(key=key)
        rng = _state(ph)
        if n_grid > 0:
            grid_row = &grid_out[i, 0]
        with nogil:
            _alm_path(rng, A0, drift_dt, sig_sqdt, dt, r, etheta, etheta_m1,
                      n_steps, &liabilities[0], grid, n_grid, grid_row,
                      &total_out[i], &nhits_out[i],
                      record, rec_ptr, rec_cap, &rec_len, &overflow)
    if overflow:
        return -1
    return rec_len
