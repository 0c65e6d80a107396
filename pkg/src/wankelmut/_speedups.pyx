# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled episode kernels for the hot simulation loops.

Must stay bitwise-equivalent to ``_pure``: same operations, same order,
same saturation guards.  Episodes for ANN and CTRNN controllers run
entirely in C; the caller passes preallocated output buffers and receives
aggregate rewards plus the final controller state.
"""

from libc.math cimport exp, isfinite


cdef inline double steep_sigmoid(double x) noexcept nogil:
    cdef double z = 20.0 * x
    if z <= -709.0:
        return -0.5
    if z >= 709.0:
        return 0.5
    return 1.0 / (1.0 + exp(-z)) - 0.5


cdef inline double logistic(double x) noexcept nogil:
    if x <= -709.0:
        return 0.0
    if x >= 709.0:
        return 1.0
    return 1.0 / (1.0 + exp(-x))


def ann_episode(
    const double[::1] w,      # 30 connection weights
    const double[::1] b,      # 11 biases
    double[::1] acts,         # 11-slot activation state, updated in place
    const double[::1] quality,
    int T,
    int start,
    bint always_move,
    double rest_band,
    double theta_max,
    double theta_min,
    int[::1] positions,       # T+1
    signed char[::1] modes,   # T+1
    signed char[::1] deltas,  # T
    int[::1] switch_times,    # capacity T
):
    """Run one episode of the 11-neuron ANN. Returns
    (n_switches, r_cum, r_ins, fail_step)."""
    cdef int n = quality.shape[0]
    cdef int p = start
    cdef int mode = 1
    cdef int n_switch = 0
    cdef int t, delta
    cdef double s_l, s_r, out, r_cum
    cdef double p5, p6, p7, h1_0, h1_1, h1_2, h2_0, h2_1, h2_2, h3_0, h3_1

    positions[0] = p
    modes[0] = <signed char> mode
    r_cum = quality[p] * mode

    for t in range(T):
        s_l = quality[p - 1] if p > 0 else quality[p]
        s_r = quality[p + 1] if p < n - 1 else quality[p]

        p5 = acts[5]
        p6 = acts[6]
        p7 = acts[7]
        h1_0 = steep_sigmoid(w[0] * s_l + w[1] * s_r + b[2])
        h1_1 = steep_sigmoid(w[2] * s_l + w[3] * s_r + b[3])
        h1_2 = steep_sigmoid(w[4] * s_l + w[5] * s_r + b[4])
        h2_0 = steep_sigmoid(
            w[6] * h1_0 + w[7] * h1_1 + w[8] * h1_2 + w[15] * p5 + w[18] * p6 + b[5]
        )
        h2_1 = steep_sigmoid(
            w[9] * h1_0 + w[10] * h1_1 + w[11] * h1_2
            + w[16] * p6 + w[19] * p5 + w[20] * p7 + b[6]
        )
        h2_2 = steep_sigmoid(
            w[12] * h1_0 + w[13] * h1_1 + w[14] * h1_2
            + w[17] * p7 + w[21] * p6 + b[7]
        )
        h3_0 = steep_sigmoid(w[22] * h2_0 + w[23] * h2_1 + w[24] * h2_2 + b[8])
        h3_1 = steep_sigmoid(w[25] * h2_0 + w[26] * h2_1 + w[27] * h2_2 + b[9])
        out = steep_sigmoid(w[28] * h3_0 + w[29] * h3_1 + b[10])

        acts[0] = s_l
        acts[1] = s_r
        acts[2] = h1_0
        acts[3] = h1_1
        acts[4] = h1_2
        acts[5] = h2_0
        acts[6] = h2_1
        acts[7] = h2_2
        acts[8] = h3_0
        acts[9] = h3_1
        acts[10] = out

        if not isfinite(out):
            return n_switch, r_cum, quality[p] * mode, t

        if always_move:
            delta = -1 if out > 0.0 else 1
        else:
            delta = -1 if out > rest_band else (1 if out < -rest_band else 0)
        deltas[t] = <signed char> delta
        p = p + delta
        if p < 0:
            p = 0
        elif p > n - 1:
            p = n - 1
        if mode == 1 and quality[p] >= theta_max:
            mode = -1
            switch_times[n_switch] = t + 1
            n_switch += 1
        elif mode == -1 and quality[p] <= theta_min:
            mode = 1
            switch_times[n_switch] = t + 1
            n_switch += 1
        positions[t + 1] = p
        modes[t + 1] = <signed char> mode
        r_cum += quality[p] * mode

    return n_switch, r_cum, quality[p] * mode, -1


def ctrnn_episode(
    const double[:, ::1] weights,  # weights[j, i] = link from node j to node i
    const double[::1] theta,
    const double[::1] tau,
    const double[::1] gain,
    double[::1] y,            # node state, updated in place
    double[::1] sig,          # scratch, same length as y
    double h,
    int inner_steps,
    const double[::1] quality,
    int T,
    int start,
    bint always_move,
    double rest_band,
    double theta_max,
    double theta_min,
    int[::1] positions,
    signed char[::1] modes,
    signed char[::1] deltas,
    int[::1] switch_times,
):
    """Run one episode of the CTRNN. Returns
    (n_switches, r_cum, r_ins, fail_step)."""
    cdef int n = quality.shape[0]
    cdef int nodes = y.shape[0]
    cdef int last = nodes - 1
    cdef int p = start
    cdef int mode = 1
    cdef int n_switch = 0
    cdef int t, k, i, j, delta
    cdef double s_l, s_r, out, r_cum, s

    positions[0] = p
    modes[0] = <signed char> mode
    r_cum = quality[p] * mode

    for t in range(T):
        s_l = quality[p - 1] if p > 0 else quality[p]
        s_r = quality[p + 1] if p < n - 1 else quality[p]

        for k in range(inner_steps):
            for j in range(nodes):
                sig[j] = logistic(gain[j] * (y[j] + theta[j]))
            for i in range(nodes):
                s = 0.0
                for j in range(nodes):
                    s += weights[j, i] * sig[j]
                if i == 0:
                    s += s_l
                elif i == 1:
                    s += s_r
                y[i] = y[i] + (h / tau[i]) * (-y[i] + s)
        out = 2.0 * logistic(gain[last] * (y[last] + theta[last])) - 1.0

        if not isfinite(out):
            return n_switch, r_cum, quality[p] * mode, t

        if always_move:
            delta = -1 if out > 0.0 else 1
        else:
            delta = -1 if out > rest_band else (1 if out < -rest_band else 0)
        deltas[t] = <signed char> delta
        p = p + delta
        if p < 0:
            p = 0
        elif p > n - 1:
            p = n - 1
        if mode == 1 and quality[p] >= theta_max:
            mode = -1
            switch_times[n_switch] = t + 1
            n_switch += 1
        elif mode == -1 and quality[p] <= theta_min:
            mode = 1
            switch_times[n_switch] = t + 1
            n_switch += 1
        positions[t + 1] = p
        modes[t + 1] = <signed char> mode
        r_cum += quality[p] * mode

    return n_switch, r_cum, quality[p] * mode, -1
