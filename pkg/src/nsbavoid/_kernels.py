"""Hot numeric kernels, shared by the object layer and the simulator.

Everything in here operates on packed float64/int64 arrays and is compatible
with numba's nopython mode; ``maybe_jit`` compiles each module-level name
unless the fallback is requested (see ``_accel``). Array layouts:

chain:    kinds (n,) int64 [0 revolute / 1 prismatic], theta0/d0/alpha/a (n,),
          base_rot (3, 3), base_pos (3,)
scene:    obs_kind (m,) int64 [0 sphere / 1 box / 2 cylinder],
          obs_center (m, 3), obs_rot (m, 3, 3), obs_size (m, 3)
          [sphere: size0 = radius; box: half extents; cylinder: size0 = radius,
          size1 = half height, axis = third column of obs_rot],
          waypoint motion as wp (sum K, 3) + wp_off (m + 1,) + wp_speed (m,)
          [zero waypoints = static, one = pinned at that point]
mounts:   m_frame (N,) int64 [1-based DH frame], m_off (N, 3),
          m_fs / m_rk / m_f (N,) field of view, rest length, threshold
suppress: sup_sensor / sup_obs (S,) int64, sup_dist (S,)
"""

import numpy as np

from ._accel import maybe_jit

REVOLUTE = 0
PRISMATIC = 1

SPHERE = 0
BOX = 1
CYLINDER = 2

SUP_ARCTAN = 0
SUP_PIECEWISE = 1
SUP_CRISP = 2

CTRL_NSB = 0
CTRL_APF = 1

# trajectory.csv columns: t, q (n), x (3), x_d (3), sigma, lambda, d_min,
# qdot (n), per-sensor d_k (N)
def log_width(n, nsensors):
    return 2 * n + 10 + nsensors


def _fk_frames(kinds, theta0, d0, alpha, a, base_rot, base_pos, q):
    """Cumulative DH frames: origins (n+1, 3) and rotations (n+1, 3, 3).

    Row 0 is the fixed base alignment; row i is the frame after joint i.
    """
    n = kinds.shape[0]
    origins = np.empty((n + 1, 3))
    rots = np.empty((n + 1, 3, 3))
    for i in range(3):
        origins[0, i] = base_pos[i]
        for c in range(3):
            rots[0, i, c] = base_rot[i, c]
    for j in range(n):
        theta = theta0[j]
        d = d0[j]
        if kinds[j] == REVOLUTE:
            theta = theta + q[j]
        else:
            d = d + q[j]
        ct = np.cos(theta)
        st = np.sin(theta)
        ca = np.cos(alpha[j])
        sa = np.sin(alpha[j])
        # local transform: Rz(theta) Tz(d) Tx(a) Rx(alpha)
        r00 = ct
        r01 = -st * ca
        r02 = st * sa
        r10 = st
        r11 = ct * ca
        r12 = -ct * sa
        r21 = sa
        r22 = ca
        px = a[j] * ct
        py = a[j] * st
        pz = d
        for i in range(3):
            R0 = rots[j, i, 0]
            R1 = rots[j, i, 1]
            R2 = rots[j, i, 2]
            origins[j + 1, i] = origins[j, i] + R0 * px + R1 * py + R2 * pz
            rots[j + 1, i, 0] = R0 * r00 + R1 * r10
            rots[j + 1, i, 1] = R0 * r01 + R1 * r11 + R2 * r21
            rots[j + 1, i, 2] = R0 * r02 + R1 * r12 + R2 * r22
    return origins, rots


fk_frames = maybe_jit(_fk_frames)


def _point_on_frame(origins, rots, frame, offset):
    p = np.empty(3)
    for i in range(3):
        p[i] = (
            origins[frame, i]
            + rots[frame, i, 0] * offset[0]
            + rots[frame, i, 1] * offset[1]
            + rots[frame, i, 2] * offset[2]
        )
    return p


point_on_frame = maybe_jit(_point_on_frame)


def _point_jacobian(kinds, origins, rots, frame, point):
    """Position Jacobian (3, n) of a world point rigid to DH frame ``frame``."""
    n = kinds.shape[0]
    J = np.zeros((3, n))
    for j in range(frame):
        zx = rots[j, 0, 2]
        zy = rots[j, 1, 2]
        zz = rots[j, 2, 2]
        if kinds[j] == PRISMATIC:
            J[0, j] = zx
            J[1, j] = zy
            J[2, j] = zz
        else:
            rx = point[0] - origins[j, 0]
            ry = point[1] - origins[j, 1]
            rz = point[2] - origins[j, 2]
            J[0, j] = zy * rz - zz * ry
            J[1, j] = zz * rx - zx * rz
            J[2, j] = zx * ry - zy * rx
    return J


point_jacobian = maybe_jit(_point_jacobian)


def _obstacle_center_at(obs_center, i, wp, wp_off, wp_speed, t):
    """Centre of obstacle i at time t (piecewise-linear waypoint motion)."""
    c = np.empty(3)
    lo = wp_off[i]
    hi = wp_off[i + 1]
    k = hi - lo
    if k == 0:
        for d in range(3):
            c[d] = obs_center[i, d]
        return c
    if k == 1 or wp_speed[i] <= 0.0:
        for d in range(3):
            c[d] = wp[lo, d]
        return c
    s = wp_speed[i] * t
    for seg in range(lo, hi - 1):
        dx = wp[seg + 1, 0] - wp[seg, 0]
        dy = wp[seg + 1, 1] - wp[seg, 1]
        dz = wp[seg + 1, 2] - wp[seg, 2]
        L = np.sqrt(dx * dx + dy * dy + dz * dz)
        if s <= L:
            u = 0.0 if L <= 0.0 else s / L
            c[0] = wp[seg, 0] + u * dx
            c[1] = wp[seg, 1] + u * dy
            c[2] = wp[seg, 2] + u * dz
            return c
        s -= L
    for d in range(3):
        c[d] = wp[hi - 1, d]
    return c


obstacle_center_at = maybe_jit(_obstacle_center_at)


def _shape_closest(kind, center, rot, size, query):
    """Closest surface point of one primitive.

    Returns (px, py, pz, distance, penetrating); distance clamps to 0 for
    queries on or inside the surface.
    """
    if kind == SPHERE:
        dx = query[0] - center[0]
        dy = query[1] - center[1]
        dz = query[2] - center[2]
        dc = np.sqrt(dx * dx + dy * dy + dz * dz)
        r = size[0]
        if dc <= 1e-12:
            return center[0] + r, center[1], center[2], 0.0, True
        s = r / dc
        px = center[0] + dx * s
        py = center[1] + dy * s
        pz = center[2] + dz * s
        if dc >= r:
            return px, py, pz, dc - r, False
        return px, py, pz, 0.0, True

    # box and cylinder work in the local frame: u = R^T (query - c)
    qx = query[0] - center[0]
    qy = query[1] - center[1]
    qz = query[2] - center[2]
    u0 = rot[0, 0] * qx + rot[1, 0] * qy + rot[2, 0] * qz
    u1 = rot[0, 1] * qx + rot[1, 1] * qy + rot[2, 1] * qz
    u2 = rot[0, 2] * qx + rot[1, 2] * qy + rot[2, 2] * qz

    if kind == BOX:
        h0 = size[0]
        h1 = size[1]
        h2 = size[2]
        v0 = min(max(u0, -h0), h0)
        v1 = min(max(u1, -h1), h1)
        v2 = min(max(u2, -h2), h2)
        inside = abs(u0) < h0 and abs(u1) < h1 and abs(u2) < h2
        if inside:
            # push out through the nearest face
            m0 = h0 - abs(u0)
            m1 = h1 - abs(u1)
            m2 = h2 - abs(u2)
            if m0 <= m1 and m0 <= m2:
                v0 = h0 if u0 >= 0.0 else -h0
            elif m1 <= m2:
                v1 = h1 if u1 >= 0.0 else -h1
            else:
                v2 = h2 if u2 >= 0.0 else -h2
            dist = 0.0
        else:
            e0 = u0 - v0
            e1 = u1 - v1
            e2 = u2 - v2
            dist = np.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    else:  # CYLINDER, axis along local z
        r = size[0]
        hh = size[1]
        rho = np.sqrt(u0 * u0 + u1 * u1)
        inside = rho < r and abs(u2) < hh
        if not inside:
            if rho > r:
                s = r / rho
                v0 = u0 * s
                v1 = u1 * s
            else:
                v0 = u0
                v1 = u1
            v2 = min(max(u2, -hh), hh)
            e0 = u0 - v0
            e1 = u1 - v1
            e2 = u2 - v2
            dist = np.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
        else:
            d_side = r - rho
            d_cap = hh - abs(u2)
            if d_side <= d_cap:
                if rho <= 1e-12:
                    v0 = r
                    v1 = 0.0
                else:
                    s = r / rho
                    v0 = u0 * s
                    v1 = u1 * s
                v2 = u2
            else:
                v0 = u0
                v1 = u1
                v2 = hh if u2 >= 0.0 else -hh
            dist = 0.0

    px = center[0] + rot[0, 0] * v0 + rot[0, 1] * v1 + rot[0, 2] * v2
    py = center[1] + rot[1, 0] * v0 + rot[1, 1] * v1 + rot[1, 2] * v2
    pz = center[2] + rot[2, 0] * v0 + rot[2, 1] * v1 + rot[2, 2] * v2
    return px, py, pz, dist, inside


shape_closest = maybe_jit(_shape_closest)


def _scene_nearest_idx(obs_kind, obs_sensed, centers_t, obs_rot, obs_size, query):
    """Nearest sensed obstacle index and hit for a query point; idx -1 when
    nothing is sensed. Ties keep the lowest index (deterministic replay).
    """
    m = obs_kind.shape[0]
    best = -1
    bd = np.inf
    bx = 0.0
    by = 0.0
    bz = 0.0
    bpen = False
    for i in range(m):
        if obs_sensed[i] == 0:
            continue
        px, py, pz, d, pen = shape_closest(
            obs_kind[i], centers_t[i], obs_rot[i], obs_size[i], query
        )
        if d < bd:
            best = i
            bd = d
            bx = px
            by = py
            bz = pz
            bpen = pen
    return best, bd, bx, by, bz, bpen


scene_nearest_idx = maybe_jit(_scene_nearest_idx)


def _moving_centers(obs_center, wp, wp_off, wp_speed, t):
    m = obs_center.shape[0]
    centers_t = np.empty((m, 3))
    for i in range(m):
        c = obstacle_center_at(obs_center, i, wp, wp_off, wp_speed, t)
        for d in range(3):
            centers_t[i, d] = c[d]
    return centers_t


moving_centers = maybe_jit(_moving_centers)


def _sense_arrays(
    origins,
    rots,
    obs_kind,
    obs_sensed,
    centers_t,
    obs_rot,
    obs_size,
    m_frame,
    m_off,
    m_fs,
    sup_sensor,
    sup_obs,
    sup_dist,
):
    """Per-sensor proximity readings against a scene at fixed time.

    Returns sensor positions (N, 3), distances d_k (N,) with inf for no
    reading, hit obstacle indices (N,), hit points (N, 3) and penetration
    flags (N,). A suppression rule turns its sensor off while the sensor is
    within the rule distance of the rule's target object surface (the target
    need not itself be a sensed obstacle).
    """
    N = m_frame.shape[0]
    m = obs_kind.shape[0]
    spos = np.empty((N, 3))
    dk = np.empty(N)
    hidx = np.empty(N, np.int64)
    hpt = np.empty((N, 3))
    hpen = np.zeros(N, np.int64)
    for k in range(N):
        p = point_on_frame(origins, rots, m_frame[k], m_off[k])
        for d in range(3):
            spos[k, d] = p[d]
        dk[k] = np.inf
        hidx[k] = -1
        if m == 0:
            continue
        idx, dist, px, py, pz, pen = scene_nearest_idx(
            obs_kind, obs_sensed, centers_t, obs_rot, obs_size, p
        )
        if idx < 0 or dist > m_fs[k]:
            continue
        suppressed = False
        for s in range(sup_sensor.shape[0]):
            if sup_sensor[s] != k:
                continue
            j = sup_obs[s]
            _, _, _, dsup, _ = shape_closest(
                obs_kind[j], centers_t[j], obs_rot[j], obs_size[j], p
            )
            if dsup < sup_dist[s]:
                suppressed = True
        if suppressed:
            continue
        dk[k] = dist
        hidx[k] = idx
        hpt[k, 0] = px
        hpt[k, 1] = py
        hpt[k, 2] = pz
        hpen[k] = 1 if pen else 0
    return spos, dk, hidx, hpt, hpen


sense_arrays = maybe_jit(_sense_arrays)


def _lambda_value(sup_kind, d, f, param):
    if sup_kind == SUP_ARCTAN:
        return np.arctan(-param * (d - f)) / np.pi + 0.5
    if sup_kind == SUP_PIECEWISE:
        if d < f - param:
            return 1.0
        if d > f + param:
            return 0.0
        return -(d - f - param) / (2.0 * param)
    return 1.0 if d <= f else 0.0


lambda_value = maybe_jit(_lambda_value)


def _goal_qdot(Jg, x, x_d, xd_dot, gamma_g, damping):
    """Damped CLIK reference: Jg^T (Jg Jg^T + damping^2 I)^{-1} (xd_dot + gamma (x_d - x))."""
    A = Jg @ Jg.T
    for i in range(3):
        A[i, i] += damping * damping
    rhs = np.empty(3)
    for i in range(3):
        rhs[i] = xd_dot[i] + gamma_g * (x_d[i] - x[i])
    w = np.linalg.solve(A, rhs)
    return Jg.T @ w


goal_qdot = maybe_jit(_goal_qdot)


def _nsb_step(
    kinds,
    theta0,
    d0,
    alpha,
    a,
    base_rot,
    base_pos,
    q,
    obs_kind,
    obs_sensed,
    obs_center,
    obs_rot,
    obs_size,
    wp,
    wp_off,
    wp_speed,
    t,
    m_frame,
    m_off,
    m_fs,
    m_rk,
    m_f,
    sup_sensor,
    sup_obs,
    sup_dist,
    task_frame,
    task_off,
    x_d,
    xd_dot,
    gamma_o,
    gamma_g,
    damping,
    sup_kind,
    sup_param,
    qdot_cap,
):
    """One tick of the avoidance/goal composition.

    Returns (qdot, qdot_goal, qdot_avoid, sigma, lam, d_min, f_sel, x, dk).
    """
    n = kinds.shape[0]
    N = m_frame.shape[0]
    origins, rots = fk_frames(kinds, theta0, d0, alpha, a, base_rot, base_pos, q)
    x = point_on_frame(origins, rots, task_frame, task_off)
    Jg = point_jacobian(kinds, origins, rots, task_frame, x)
    centers_t = moving_centers(obs_center, wp, wp_off, wp_speed, t)
    spos, dk, hidx, hpt, hpen = sense_arrays(
        origins,
        rots,
        obs_kind,
        obs_sensed,
        centers_t,
        obs_rot,
        obs_size,
        m_frame,
        m_off,
        m_fs,
        sup_sensor,
        sup_obs,
        sup_dist,
    )

    dmin = np.inf
    ksel = -1
    for k in range(N):
        if dk[k] < dmin:
            dmin = dk[k]
            ksel = k
    f_sel = m_f[ksel] if ksel >= 0 else np.inf
    lam = lambda_value(sup_kind, dmin, f_sel, sup_param) if ksel >= 0 else 0.0

    # pseudo-energy and its configuration gradient over the active sensors
    sig = 0.0
    jo = np.zeros(n)
    for k in range(N):
        d = dk[k]
        if d > m_rk[k]:
            continue
        e = d - m_rk[k]
        sig += 0.5 * e * e
        vx = hpt[k, 0] - spos[k, 0]
        vy = hpt[k, 1] - spos[k, 1]
        vz = hpt[k, 2] - spos[k, 2]
        vn = np.sqrt(vx * vx + vy * vy + vz * vz)
        if vn <= 1e-12:
            continue
        # unit vector along decreasing distance: toward the obstacle outside,
        # ejecting (away from the nearest face) under penetration
        s = (-1.0 / vn) if hpen[k] == 1 else (1.0 / vn)
        vx *= s
        vy *= s
        vz *= s
        Js = point_jacobian(kinds, origins, rots, m_frame[k], spos[k])
        for j in range(n):
            jo[j] += -e * (vx * Js[0, j] + vy * Js[1, j] + vz * Js[2, j])

    qdot_g = goal_qdot(Jg, x, x_d, xd_dot, gamma_g, damping)

    jon2 = 0.0
    for j in range(n):
        jon2 += jo[j] * jo[j]
    qdot_av = np.empty(n)
    if jon2 > 0.0:
        # damped row pseudo-inverse for the task term, exact projector for
        # the null space (the damped projector would leave ~damping^2/|Jo|
        # of the goal velocity inside the avoidance task)
        scale = gamma_o * (0.0 - sig) / (jon2 + damping * damping)
        dot = 0.0
        for j in range(n):
            dot += jo[j] * qdot_g[j]
        for j in range(n):
            qdot_av[j] = jo[j] * scale + qdot_g[j] - jo[j] * (dot / jon2)
    else:
        for j in range(n):
            qdot_av[j] = qdot_g[j]

    qdot = np.empty(n)
    for j in range(n):
        qdot[j] = lam * qdot_av[j] + (1.0 - lam) * qdot_g[j]
        cap = qdot_cap[j]
        if cap > 0.0:
            if qdot[j] > cap:
                qdot[j] = cap
            elif qdot[j] < -cap:
                qdot[j] = -cap
    return qdot, qdot_g, qdot_av, sig, lam, dmin, f_sel, x, dk


nsb_step = maybe_jit(_nsb_step)


def _apf_step(
    kinds,
    theta0,
    d0,
    alpha,
    a,
    base_rot,
    base_pos,
    q,
    obs_kind,
    obs_sensed,
    obs_center,
    obs_rot,
    obs_size,
    wp,
    wp_off,
    wp_speed,
    t,
    m_frame,
    m_off,
    m_fs,
    m_rk,
    sup_sensor,
    sup_obs,
    sup_dist,
    task_frame,
    task_off,
    x_d,
    eta,
    rho0,
    k_p,
    force_cap,
):
    """One tick of the artificial-potential baseline (velocity level).

    Repulsion at every control point (the sensor mounts), attraction at the
    task point, both mapped through Jacobian transposes. Returns
    (qdot, sigma, lam, d_min, x, dk); sigma is logged with the same
    pseudo-energy bookkeeping as the main controller so traces line up, lam
    is 1.0 while any repulsion is active.
    """
    n = kinds.shape[0]
    N = m_frame.shape[0]
    origins, rots = fk_frames(kinds, theta0, d0, alpha, a, base_rot, base_pos, q)
    x = point_on_frame(origins, rots, task_frame, task_off)
    Jg = point_jacobian(kinds, origins, rots, task_frame, x)
    centers_t = moving_centers(obs_center, wp, wp_off, wp_speed, t)
    spos, dk, hidx, hpt, hpen = sense_arrays(
        origins,
        rots,
        obs_kind,
        obs_sensed,
        centers_t,
        obs_rot,
        obs_size,
        m_frame,
        m_off,
        m_fs,
        sup_sensor,
        sup_obs,
        sup_dist,
    )

    qdot = np.zeros(n)
    sig = 0.0
    dmin = np.inf
    any_rep = False
    for k in range(N):
        rho = dk[k]
        if rho < dmin:
            dmin = rho
        if rho <= m_rk[k]:
            e = rho - m_rk[k]
            sig += 0.5 * e * e
        if rho > rho0:
            continue
        any_rep = True
        if rho > 0.0:
            mag = eta * (1.0 / rho - 1.0 / rho0) / (rho * rho)
            if mag > force_cap:
                mag = force_cap
        else:
            mag = force_cap
        vx = hpt[k, 0] - spos[k, 0]
        vy = hpt[k, 1] - spos[k, 1]
        vz = hpt[k, 2] - spos[k, 2]
        vn = np.sqrt(vx * vx + vy * vy + vz * vz)
        if vn <= 1e-12:
            continue
        s = (-1.0 / vn) if hpen[k] == 1 else (1.0 / vn)
        # repulsion acts along increasing distance, i.e. opposite v
        fx = -vx * s * mag
        fy = -vy * s * mag
        fz = -vz * s * mag
        Js = point_jacobian(kinds, origins, rots, m_frame[k], spos[k])
        for j in range(n):
            qdot[j] += fx * Js[0, j] + fy * Js[1, j] + fz * Js[2, j]

    for j in range(n):
        acc = 0.0
        for i in range(3):
            acc += Jg[i, j] * k_p * (x_d[i] - x[i])
        qdot[j] += acc
    lam = 1.0 if any_rep else 0.0
    return qdot, sig, lam, dmin, x, dk


apf_step = maybe_jit(_apf_step)


def _path_sample(pwp, pcum, speed, hold, t):
    """Sample the reference path: position and feedforward velocity at t."""
    x_d = np.empty(3)
    v = np.zeros(3)
    K = pwp.shape[0]
    if hold == 1 or K == 1:
        for d in range(3):
            x_d[d] = pwp[0, d]
        return x_d, v
    s = speed * t
    total = pcum[K - 1]
    if s >= total:
        for d in range(3):
            x_d[d] = pwp[K - 1, d]
        return x_d, v
    for seg in range(K - 1):
        L = pcum[seg + 1] - pcum[seg]
        if s <= pcum[seg + 1] and L > 0.0:
            r = s - pcum[seg]
            for d in range(3):
                u = (pwp[seg + 1, d] - pwp[seg, d]) / L
                x_d[d] = pwp[seg, d] + r * u
                v[d] = speed * u
            return x_d, v
    for d in range(3):
        x_d[d] = pwp[K - 1, d]
        v[d] = 0.0
    return x_d, v


path_sample = maybe_jit(_path_sample)


def _simulate(
    kinds,
    theta0,
    d0,
    alpha,
    a,
    base_rot,
    base_pos,
    q0,
    nticks,
    ts,
    obs_kind,
    obs_sensed,
    obs_center,
    obs_rot,
    obs_size,
    wp,
    wp_off,
    wp_speed,
    m_frame,
    m_off,
    m_fs,
    m_rk,
    m_f,
    sup_sensor,
    sup_obs,
    sup_dist,
    task_frame,
    task_off,
    pwp,
    pcum,
    pspeed,
    phold,
    ctrl_kind,
    gamma_o,
    gamma_g,
    damping,
    sup_kind,
    sup_param,
    qdot_cap,
    apf_eta,
    apf_rho0,
    apf_kp,
    apf_cap,
    log,
):
    """Explicit-Euler rollout writing one log row per tick.

    Returns (status, bad_tick): status 0 on success, 1 when a non-finite
    velocity or state appears (bad_tick names the offending tick).
    """
    n = kinds.shape[0]
    N = m_frame.shape[0]
    q = q0.copy()
    for i in range(nticks + 1):
        t = i * ts
        x_d, xd_dot = path_sample(pwp, pcum, pspeed, phold, t)
        if ctrl_kind == CTRL_NSB:
            qdot, qg, qa, sig, lam, dmin, fsel, x, dk = nsb_step(
                kinds, theta0, d0, alpha, a, base_rot, base_pos, q,
                obs_kind, obs_sensed, obs_center, obs_rot, obs_size, wp, wp_off, wp_speed, t,
                m_frame, m_off, m_fs, m_rk, m_f,
                sup_sensor, sup_obs, sup_dist,
                task_frame, task_off, x_d, xd_dot,
                gamma_o, gamma_g, damping, sup_kind, sup_param, qdot_cap,
            )
        else:
            qdot, sig, lam, dmin, x, dk = apf_step(
                kinds, theta0, d0, alpha, a, base_rot, base_pos, q,
                obs_kind, obs_sensed, obs_center, obs_rot, obs_size, wp, wp_off, wp_speed, t,
                m_frame, m_off, m_fs, m_rk,
                sup_sensor, sup_obs, sup_dist,
                task_frame, task_off, x_d,
                apf_eta, apf_rho0, apf_kp, apf_cap,
            )
        ok = np.isfinite(sig) and np.isfinite(lam)
        for j in range(n):
            if not np.isfinite(qdot[j]) or not np.isfinite(q[j]):
                ok = False
        if not ok:
            return 1, i
        log[i, 0] = t
        for j in range(n):
            log[i, 1 + j] = q[j]
        for d in range(3):
            log[i, n + 1 + d] = x[d]
            log[i, n + 4 + d] = x_d[d]
        log[i, n + 7] = sig
        log[i, n + 8] = lam
        log[i, n + 9] = dmin
        for j in range(n):
            log[i, n + 10 + j] = qdot[j]
        for k in range(N):
            log[i, 2 * n + 10 + k] = dk[k]
        if i < nticks:
            for j in range(n):
                q[j] = q[j] + ts * qdot[j]
    return 0, -1


simulate = maybe_jit(_simulate)


def _clearance_table(
    kinds,
    theta0,
    d0,
    alpha,
    a,
    base_rot,
    base_pos,
    qs,
    times,
    obs_kind,
    obs_center,
    obs_rot,
    obs_size,
    wp,
    wp_off,
    wp_speed,
    m_frame,
    m_off,
    sup_sensor,
    sup_obs,
    sup_dist,
):
    """Per-obstacle sensor clearance for each logged row: (rows, m) array.

    Honours suppression rules the same way sensing does (a suppressed sensor
    contributes to no obstacle while the rule holds).
    """
    rows = qs.shape[0]
    m = obs_kind.shape[0]
    N = m_frame.shape[0]
    out = np.full((rows, m), np.inf)
    for r in range(rows):
        origins, rots = fk_frames(
            kinds, theta0, d0, alpha, a, base_rot, base_pos, qs[r]
        )
        centers_t = moving_centers(obs_center, wp, wp_off, wp_speed, times[r])
        for k in range(N):
            p = point_on_frame(origins, rots, m_frame[k], m_off[k])
            suppressed = False
            for s in range(sup_sensor.shape[0]):
                if sup_sensor[s] != k:
                    continue
                j = sup_obs[s]
                _, _, _, dsup, _ = shape_closest(
                    obs_kind[j], centers_t[j], obs_rot[j], obs_size[j], p
                )
                if dsup < sup_dist[s]:
                    suppressed = True
            if suppressed:
                continue
            for i in range(m):
                _, _, _, d, _ = shape_closest(
                    obs_kind[i], centers_t[i], obs_rot[i], obs_size[i], p
                )
                if d < out[r, i]:
                    out[r, i] = d
    return out


clearance_table = maybe_jit(_clearance_table)
