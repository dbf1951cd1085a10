"""Pure numpy stepping kernel (fallback for the compiled ``_kernel``).

The operation order matches ``_kernel.pyx`` exactly so that both backends
produce bit-identical waveforms.
"""

import numpy as np

STATUS_OK = 0
STATUS_BLOWUP = 1
BLOWUP_VOLTAGE = 1.0


def _derivative(v, phase, cap, r_leak, src_dep, src_rep, ei, ej, r_edge, inj_node, inj_amp, active, v_rest):
    cur = (v_rest - v) / r_leak
    flow = (v[ej] - v[ei]) / r_edge
    np.add.at(cur, ei, flow)
    np.add.at(cur, ej, -flow)
    cur = cur + np.where(phase == 1, src_dep, np.where(phase == 2, src_rep, 0.0))
    for s in np.flatnonzero(active):
        cur[inj_node[s]] += inj_amp[s]
    return cur / cap


def run(
    cap, r_leak, src_dep, src_rep, na_en,
    ei, ej, r_edge,
    inj_node, inj_k0, inj_k1, inj_amp,
    force_node, force_k,
    v_rest, v_trig, v_max, v_min, v_rearm,
    dt, nsteps, stride, rk4,
):
    """Integrate the network; see ``engine.simulate`` for the model.

    Returns ``(rec, ev_node, ev_step, ev_phase, status, bad_node, bad_step)``;
    an event at step ``k`` happened at time ``k * dt``.
    """
    n = cap.shape[0]
    na_en = na_en.astype(bool)
    v = np.full(n, v_rest, dtype=np.float64)
    phase = np.zeros(n, dtype=np.int64)
    rec = np.empty((nsteps // stride + 1, n), dtype=np.float64)
    rec[0] = v
    ev_node, ev_step, ev_phase = [], [], []
    half = dt * 0.5
    sixth = dt / 6.0
    args = (cap, r_leak, src_dep, src_rep, ei, ej, r_edge, inj_node, inj_amp)

    for k in range(nsteps):
        for f in range(force_node.shape[0]):
            i = force_node[f]
            if force_k[f] == k and phase[i] == 0 and na_en[i]:
                phase[i] = 1
                ev_node.append(i)
                ev_step.append(k)
                ev_phase.append(1)

        active = (inj_k0 <= k) & (k < inj_k1)
        d1 = _derivative(v, phase, *args, active, v_rest)
        if rk4:
            d2 = _derivative(v + half * d1, phase, *args, active, v_rest)
            d3 = _derivative(v + half * d2, phase, *args, active, v_rest)
            d4 = _derivative(v + dt * d3, phase, *args, active, v_rest)
            v_new = v + sixth * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        else:
            v_new = v + dt * d1

        bad = ~(np.abs(v_new) <= BLOWUP_VOLTAGE)
        if bad.any():
            return (rec, np.array(ev_node, np.int64), np.array(ev_step, np.int64),
                    np.array(ev_phase, np.int64), STATUS_BLOWUP,
                    int(np.flatnonzero(bad)[0]), k + 1)

        new_phase = phase.copy()
        new_phase[(phase == 0) & na_en & (v < v_trig) & (v_new >= v_trig)] = 1
        new_phase[(phase == 1) & (v_new >= v_max)] = 2
        new_phase[(phase == 2) & (v_new <= v_min)] = 3
        new_phase[(phase == 3) & (v_new >= v_rearm)] = 0
        for i in np.flatnonzero(new_phase != phase):
            ev_node.append(int(i))
            ev_step.append(k + 1)
            ev_phase.append(int(new_phase[i]))
        phase = new_phase
        v = v_new
        if (k + 1) % stride == 0:
            rec[(k + 1) // stride] = v

    return (rec, np.array(ev_node, np.int64), np.array(ev_step, np.int64),
            np.array(ev_phase, np.int64), STATUS_OK, -1, -1)
