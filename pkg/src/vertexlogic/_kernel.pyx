# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernel; same contract as ``_kernel_py.run``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

DEF BLOWUP_VOLTAGE = 1.0

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_OVERFLOW = 2


cdef void _derivative(
    const double[::1] v, const long[::1] phase,
    const double[::1] cap, const double[::1] r_leak,
    const double[::1] src_dep, const double[::1] src_rep,
    const long[::1] ei, const long[::1] ej, const double[::1] r_edge,
    const long[::1] inj_node, const long[::1] inj_k0, const long[::1] inj_k1,
    const double[::1] inj_amp, long k, double v_rest,
    double[::1] flow, double[::1] out,
) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], m = ei.shape[0], i, e, s
    for i in range(n):
        out[i] = (v_rest - v[i]) / r_leak[i]
    for e in range(m):
        flow[e] = (v[ej[e]] - v[ei[e]]) / r_edge[e]
    for e in range(m):
        out[ei[e]] += flow[e]
    for e in range(m):
        out[ej[e]] += -flow[e]
    for i in range(n):
        if phase[i] == 1:
            out[i] = out[i] + src_dep[i]
        elif phase[i] == 2:
            out[i] = out[i] + src_rep[i]
        else:
            out[i] = out[i] + 0.0
    for s in range(inj_node.shape[0]):
        if inj_k0[s] <= k and k < inj_k1[s]:
            out[inj_node[s]] += inj_amp[s]
    for i in range(n):
        out[i] = out[i] / cap[i]


def run(
    double[::1] cap, double[::1] r_leak, double[::1] src_dep, double[::1] src_rep,
    na_en_arr,
    long[::1] ei, long[::1] ej, double[::1] r_edge,
    long[::1] inj_node, long[::1] inj_k0, long[::1] inj_k1, double[::1] inj_amp,
    long[::1] force_node, long[::1] force_k,
    double v_rest, double v_trig, double v_max, double v_min, double v_rearm,
    double dt, long nsteps, long stride, bint rk4,
    long ev_capacity=4096,
):
    cdef Py_ssize_t n = cap.shape[0], m = ei.shape[0], i, f
    cdef long k
    cdef cnp.uint8_t[::1] na_en = np.ascontiguousarray(na_en_arr, dtype=np.uint8)
    cdef double[::1] v = np.full(n, v_rest)
    cdef double[::1] v_new = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] d1 = np.empty(n)
    cdef double[::1] d2 = np.empty(n)
    cdef double[::1] d3 = np.empty(n)
    cdef double[::1] d4 = np.empty(n)
    cdef double[::1] flow = np.empty(max(m, 1))
    cdef long[::1] phase = np.zeros(n, dtype=np.int_)
    cdef long[::1] new_phase = np.zeros(n, dtype=np.int_)
    rec_arr = np.empty((nsteps // stride + 1, n))
    cdef double[:, ::1] rec = rec_arr
    ev_node_arr = np.empty(ev_capacity, dtype=np.int_)
    ev_step_arr = np.empty(ev_capacity, dtype=np.int_)
    ev_phase_arr = np.empty(ev_capacity, dtype=np.int_)
    cdef long[::1] ev_node = ev_node_arr, ev_step = ev_step_arr, ev_phase = ev_phase_arr
    cdef long n_ev = 0
    cdef int status = 0
    cdef long bad_node = -1, bad_step = -1
    cdef double half = dt * 0.5, sixth = dt / 6.0
    cdef long p
    cdef double vi, vn

    for i in range(n):
        rec[0, i] = v[i]

    with nogil:
        for k in range(nsteps):
            for f in range(force_node.shape[0]):
                i = force_node[f]
                if force_k[f] == k and phase[i] == 0 and na_en[i]:
                    phase[i] = 1
                    if n_ev == ev_capacity:
                        status = 2
                        break
                    ev_node[n_ev] = i
                    ev_step[n_ev] = k
                    ev_phase[n_ev] = 1
                    n_ev += 1
            if status != 0:
                break

            _derivative(v, phase, cap, r_leak, src_dep, src_rep, ei, ej, r_edge,
                        inj_node, inj_k0, inj_k1, inj_amp, k, v_rest, flow, d1)
            if rk4:
                for i in range(n):
                    tmp[i] = v[i] + half * d1[i]
                _derivative(tmp, phase, cap, r_leak, src_dep, src_rep, ei, ej, r_edge,
                            inj_node, inj_k0, inj_k1, inj_amp, k, v_rest, flow, d2)
                for i in range(n):
                    tmp[i] = v[i] + half * d2[i]
                _derivative(tmp, phase, cap, r_leak, src_dep, src_rep, ei, ej, r_edge,
                            inj_node, inj_k0, inj_k1, inj_amp, k, v_rest, flow, d3)
                for i in range(n):
                    tmp[i] = v[i] + dt * d3[i]
                _derivative(tmp, phase, cap, r_leak, src_dep, src_rep, ei, ej, r_edge,
                            inj_node, inj_k0, inj_k1, inj_amp, k, v_rest, flow, d4)
                for i in range(n):
                    v_new[i] = v[i] + sixth * (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i])
            else:
                for i in range(n):
                    v_new[i] = v[i] + dt * d1[i]

            for i in range(n):
                if not (fabs(v_new[i]) <= BLOWUP_VOLTAGE):
                    status = 1
                    bad_node = i
                    bad_step = k + 1
                    break
            if status != 0:
                break

            for i in range(n):
                p = phase[i]
                vi = v[i]
                vn = v_new[i]
                if p == 0:
                    if na_en[i] and vi < v_trig and vn >= v_trig:
                        p = 1
                elif p == 1:
                    if vn >= v_max:
                        p = 2
                elif p == 2:
                    if vn <= v_min:
                        p = 3
                elif p == 3:
                    if vn >= v_rearm:
                        p = 0
                new_phase[i] = p
            for i in range(n):
                if new_phase[i] != phase[i]:
                    if n_ev == ev_capacity:
                        status = 2
                        break
                    ev_node[n_ev] = i
                    ev_step[n_ev] = k + 1
                    ev_phase[n_ev] = new_phase[i]
                    n_ev += 1
                phase[i] = new_phase[i]
            if status != 0:
                break
            for i in range(n):
                v[i] = v_new[i]
            if (k + 1) % stride == 0:
                for i in range(n):
                    rec[(k + 1) // stride, i] = v[i]

    return (rec_arr, ev_node_arr[:n_ev].copy(), ev_step_arr[:n_ev].copy(),
            ev_phase_arr[:n_ev].copy(), status, bad_node, bad_step)
