"""Scalar trajectory kernels (hard-wall event stepping, smooth integration).

These functions are written in the numba-compatible subset of Python and
are compiled on import when the numba backend is active.  Status codes
shared by all kernels:

    0  reached the requested end time
    1  corner hit (arc length at impact below the corner tolerance)
    2  escape (crossed a wall line beyond the sheet end, or left the
       domain in smooth mode)
    3  event buffer full (caller extends the buffer and resumes)
"""

from __future__ import annotations

import math

import numpy as np

from .backend import maybe_jit

STATUS_OK = 0
STATUS_CORNER = 1
STATUS_ESCAPE = 2
STATUS_BUFFER_FULL = 3

_INF = math.inf


@maybe_jit
def _wall_hit_time(d0, vn, half_g_sin):
    """First positive crossing time of d(t) = d0 + vn*t - half_g_sin*t^2.

    d0 >= 0 on entry.  With gravity the downward pull guarantees a
    crossing; the plus-branch root is the physical one (it skips the
    t=0 root left behind right after a reflection).
    """
    if half_g_sin > 0.0:
        disc = vn * vn + 4.0 * half_g_sin * d0
        if disc < 0.0:
            return _INF
        root = (vn + math.sqrt(disc)) / (2.0 * half_g_sin)
        if root <= 0.0:
            return _INF
        return root
    if vn < 0.0:
        return d0 / (-vn)
    return _INF


@maybe_jit
def hard_advance(x, z, vx, vz, t, t_end, sin_a, cos_a, g_eff,
                 sheet_length, corner_tol,
                 ev_t, ev_side, ev_data, n0):
    """Advance one hard-wall trajectory to t_end, logging bounce events.

    ev_data rows hold (x, z, vin_x, vin_z, vout_x, vout_z, s) at impact.
    Returns (n_events, status, x, z, vx, vz, t).
    """
    n = n0
    cap = ev_t.shape[0]
    half_g_sin = 0.5 * g_eff * sin_a
    while True:
        if n >= cap:
            # caller extends the buffers and resumes from this state
            return n, STATUS_BUFFER_FULL, x, z, vx, vz, t
        d_r = z * sin_a - x * cos_a
        d_l = z * sin_a + x * cos_a
        vn_r = vz * sin_a - vx * cos_a
        vn_l = vz * sin_a + vx * cos_a
        t_r = _wall_hit_time(d_r, vn_r, half_g_sin)
        t_l = _wall_hit_time(d_l, vn_l, half_g_sin)
        if t_r <= t_l:
            dt_hit = t_r
            side = 1
        else:
            dt_hit = t_l
            side = -1

        if t + dt_hit > t_end or dt_hit == _INF:
            # free flight to the requested end time
            dt = t_end - t
            x = x + vx * dt
            z = z + vz * dt - 0.5 * g_eff * dt * dt
            vz = vz - g_eff * dt
            return n, STATUS_OK, x, z, vx, vz, t_end

        x = x + vx * dt_hit
        z = z + vz * dt_hit - 0.5 * g_eff * dt_hit * dt_hit
        vz = vz - g_eff * dt_hit
        t = t + dt_hit

        s = side * x * sin_a + z * cos_a  # arc length from the vertex
        if s < corner_tol:
            return n, STATUS_CORNER, x, z, vx, vz, t
        if s > sheet_length:
            return n, STATUS_ESCAPE, x, z, vx, vz, t

        # specular reflection about the wall plane
        nx = -side * cos_a
        nz = sin_a
        vn = vx * nx + vz * nz
        vox = vx - 2.0 * vn * nx
        voz = vz - 2.0 * vn * nz

        ev_t[n] = t
        ev_side[n] = side
        ev_data[n, 0] = x
        ev_data[n, 1] = z
        ev_data[n, 2] = vx
        ev_data[n, 3] = vz
        ev_data[n, 4] = vox
        ev_data[n, 5] = voz
        ev_data[n, 6] = s
        n += 1
        vx = vox
        vz = voz


@maybe_jit
def hard_first_hits(states, t_horizon, sin_a, cos_a, g_eff,
                    sheet_length, corner_tol, out_t, out_status):
    """First wall-hit time for each row of `states` (x, z, vx, vz).

    out_t[i] is the first bounce time or +inf if none occurs before
    t_horizon (escapes and corner hits also count as wall encounters).
    """
    ev_t = np.empty(1, dtype=np.float64)
    ev_side = np.empty(1, dtype=np.int64)
    ev_data = np.empty((1, 7), dtype=np.float64)
    for i in range(states.shape[0]):
        n, status, _, _, _, _, t_fin = hard_advance(
            states[i, 0], states[i, 1], states[i, 2], states[i, 3],
            0.0, t_horizon, sin_a, cos_a, g_eff, sheet_length, corner_tol,
            ev_t, ev_side, ev_data, 0,
        )
        if n > 0:
            out_t[i] = ev_t[0]
            out_status[i] = STATUS_OK
        elif status == STATUS_CORNER or status == STATUS_ESCAPE:
            # corner hits and sheet-end escapes still reach a wall line
            out_t[i] = t_fin
            out_status[i] = status
        else:
            out_t[i] = _INF
            out_status[i] = status


@maybe_jit
def _sheet_force_and_v(x, z, sin_a, cos_a, w2, v0, sheet_length):
    """Dipole potential of both sheets (summed, capped) and its force.

    Returns (v_d, fx, fz).  Inside the capped plateau the force is zero.
    """
    v_sum = 0.0
    fx = 0.0
    fz = 0.0
    for k in range(2):
        side = 1.0 if k == 0 else -1.0
        d = z * sin_a - side * x * cos_a
        u = side * x * sin_a + z * cos_a
        if u < 0.0:
            r2 = x * x + z * z
            v_s = v0 * math.exp(-2.0 * r2 / w2)
            fx += (4.0 / w2) * v_s * x
            fz += (4.0 / w2) * v_s * z
        elif u > sheet_length:
            ex = side * sheet_length * sin_a
            ez = sheet_length * cos_a
            rx = x - ex
            rz = z - ez
            v_s = v0 * math.exp(-2.0 * (rx * rx + rz * rz) / w2)
            fx += (4.0 / w2) * v_s * rx
            fz += (4.0 / w2) * v_s * rz
        else:
            v_s = v0 * math.exp(-2.0 * d * d / w2)
            nx = -side * cos_a
            nz = sin_a
            fx += (4.0 / w2) * v_s * d * nx
            fz += (4.0 / w2) * v_s * d * nz
        v_sum += v_s
    if v_sum >= v0:
        return v0, 0.0, 0.0
    return v_sum, fx, fz


@maybe_jit
def smooth_advance(x, z, vx, vz, t, t_end, dt, sin_a, cos_a, w, v0,
                   sheet_length, g_eff, mass, dip_scale, bounce_thr,
                   ev_t, ev_side, ev_data, n0):
    """Velocity-Verlet integration in the smooth sheet potential.

    A bounce is logged when the dipole potential crosses bounce_thr
    from below (entry event), with the event time linearly interpolated
    between steps.  dip_scale rescales the dipole part (branch factor).
    Returns (n_events, status, x, z, vx, vz, t).
    """
    n = n0
    cap = ev_t.shape[0]
    w2 = w * w
    v_d, fx, fz = _sheet_force_and_v(x, z, sin_a, cos_a, w2, v0, sheet_length)
    v_prev = dip_scale * v_d
    ax = dip_scale * fx / mass
    az = dip_scale * fz / mass - g_eff
    while t < t_end:
        if n >= cap:
            return n, STATUS_BUFFER_FULL, x, z, vx, vz, t
        step = dt if t + dt <= t_end else t_end - t
        vx_h = vx + 0.5 * step * ax
        vz_h = vz + 0.5 * step * az
        x = x + step * vx_h
        z = z + step * vz_h
        v_d, fx, fz = _sheet_force_and_v(x, z, sin_a, cos_a, w2, v0, sheet_length)
        ax = dip_scale * fx / mass
        az = dip_scale * fz / mass - g_eff
        vx = vx_h + 0.5 * step * ax
        vz = vz_h + 0.5 * step * az
        t = t + step

        v_now = dip_scale * v_d
        if v_prev < bounce_thr and v_now >= bounce_thr:
            frac = (bounce_thr - v_prev) / (v_now - v_prev)
            d_r = z * sin_a - x * cos_a
            d_l = z * sin_a + x * cos_a
            side = 1 if d_r <= d_l else -1
            ev_t[n] = t - step + frac * step
            ev_side[n] = side
            ev_data[n, 0] = x
            ev_data[n, 1] = z
            ev_data[n, 2] = vx
            ev_data[n, 3] = vz
            ev_data[n, 4] = vx
            ev_data[n, 5] = vz
            ev_data[n, 6] = side * x * sin_a + z * cos_a
            n += 1
        v_prev = v_now

        d_r = z * sin_a - x * cos_a
        d_l = z * sin_a + x * cos_a
        if d_r < -3.0 * w or d_l < -3.0 * w:
            return n, STATUS_ESCAPE, x, z, vx, vz, t
    return n, STATUS_OK, x, z, vx, vz, t


@maybe_jit
def smooth_first_crossings(states, t_horizon, dt, sin_a, cos_a, w, v0,
                           sheet_length, g_eff, mass, dip_scale, bounce_thr,
                           out_t, out_status):
    """First bounce-threshold crossing per trajectory in smooth mode."""
    ev_t = np.empty(1, dtype=np.float64)
    ev_side = np.empty(1, dtype=np.int64)
    ev_data = np.empty((1, 7), dtype=np.float64)
    for i in range(states.shape[0]):
        n, status, _, _, _, _, t_fin = smooth_advance(
            states[i, 0], states[i, 1], states[i, 2], states[i, 3],
            0.0, t_horizon, dt, sin_a, cos_a, w, v0, sheet_length,
            g_eff, mass, dip_scale, bounce_thr,
            ev_t, ev_side, ev_data, 0,
        )
        if n > 0:
            out_t[i] = ev_t[0]
            out_status[i] = STATUS_OK
        elif status == STATUS_ESCAPE:
            out_t[i] = t_fin
            out_status[i] = STATUS_ESCAPE
        else:
            out_t[i] = _INF
            out_status[i] = status


@maybe_jit
def harmonic_advance(x, z, vx, vz, t, t_end, dt, omega, mass):
    """Velocity-Verlet in the isotropic harmonic fixture. Returns state."""
    k = omega * omega
    ax = -k * x
    az = -k * z
    while t < t_end:
        step = dt if t + dt <= t_end else t_end - t
        vx_h = vx + 0.5 * step * ax
        vz_h = vz + 0.5 * step * az
        x = x + step * vx_h
        z = z + step * vz_h
        ax = -k * x
        az = -k * z
        vx = vx_h + 0.5 * step * ax
        vz = vz_h + 0.5 * step * az
        t = t + step
    return x, z, vx, vz, t


@maybe_jit
def hard_bounce_count_to(x, z, vx, vz, t, n_bounces, sin_a, cos_a, g_eff,
                         sheet_length, corner_tol):
    """Advance a hard-wall trajectory across exactly n_bounces bounces.

    Returns (status, x, z, vx, vz, t) with t at the n-th bounce (post
    reflection).  Used by the separation-growth estimator where only
    bounce-indexed checkpoints matter.
    """
    half_g_sin = 0.5 * g_eff * sin_a
    for _ in range(n_bounces):
        d_r = z * sin_a - x * cos_a
        d_l = z * sin_a + x * cos_a
        vn_r = vz * sin_a - vx * cos_a
        vn_l = vz * sin_a + vx * cos_a
        t_r = _wall_hit_time(d_r, vn_r, half_g_sin)
        t_l = _wall_hit_time(d_l, vn_l, half_g_sin)
        if t_r <= t_l:
            dt_hit = t_r
            side = 1
        else:
            dt_hit = t_l
            side = -1
        if dt_hit == _INF:
            return STATUS_ESCAPE, x, z, vx, vz, t
        x = x + vx * dt_hit
        z = z + vz * dt_hit - 0.5 * g_eff * dt_hit * dt_hit
        vz = vz - g_eff * dt_hit
        t = t + dt_hit
        s = side * x * sin_a + z * cos_a
        if s < corner_tol:
            return STATUS_CORNER, x, z, vx, vz, t
        if s > sheet_length:
            return STATUS_ESCAPE, x, z, vx, vz, t
        nx = -side * cos_a
        nz = sin_a
        vn = vx * nx + vz * nz
        vx = vx - 2.0 * vn * nx
        vz = vz - 2.0 * vn * nz
    return STATUS_OK, x, z, vx, vz, t
