"""Numerically hot kernels shared by the public modules.

Everything here is written as plain scalar/array Python so the same source
runs two ways: compiled with numba's @njit (the default) or interpreted as
pure numpy/Python when the environment variable LIPRINT_DISABLE_NUMBA is
set. benchmarks/bench_kernels.py times the two paths against each other.

Kernels operate on raw floats and ndarrays only; the dataclass-based public
API lives in lip_core / terrain / sim.
"""

import math
import os


def _numba_wanted() -> bool:
    flag = os.environ.get("LIPRINT_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


NUMBA_ENABLED = _numba_wanted()

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        """Identity decorator used on the pure-numpy fallback path."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# Run outcome codes shared with sim.
OUTCOME_COMPLETED = 0
OUTCOME_REACH = 1
OUTCOME_NO_GROUND = 2
OUTCOME_NON_FINITE = 3
OUTCOME_BAD_HEIGHT = 4

# Column layout of the per-tick sample array produced by sim_loop.
COL_TIME = 0
COL_COM_X = 1
COL_COM_Y = 2
COL_VEL_X = 3
COL_VEL_Y = 4
COL_ICP_X = 5
COL_ICP_Y = 6
COL_STANCE_X = 7
COL_STANCE_Y = 8
COL_STANCE_Z = 9
COL_TARGET_X = 10
COL_TARGET_Y = 11
COL_TARGET_Z = 12
COL_TARGET_HEADING = 13
COL_PARITY = 14
COL_CONTACT_SCHED = 15
COL_PHASE_SIN = 16
COL_PHASE_COS = 17
N_SAMPLE_COLS = 18


@njit(cache=True)
def lip_step(cx, cy, vx, vy, px, py, omega, t):
    """Exact CoM propagation about a fixed stance foot over duration t."""
    ch = math.cosh(omega * t)
    sh = math.sinh(omega * t)
    rx = cx - px
    ry = cy - py
    nx = px + rx * ch + vx * sh / omega
    ny = py + ry * ch + vy * sh / omega
    nvx = rx * omega * sh + vx * ch
    nvy = ry * omega * sh + vy * ch
    return nx, ny, nvx, nvy


@njit(cache=True)
def icp_step(xx, xy, px, py, omega, t):
    """Exact capture-point propagation about a fixed stance foot."""
    e = math.exp(omega * t)
    return e * xx + (1.0 - e) * px, e * xy + (1.0 - e) * py


@njit(cache=True)
def offset_pair(s_d, w_d, omega, duration):
    """Stance offsets that realise step length s_d and width w_d.

    Uses expm1 so the small-duration limit (b_x -> s_d/(omega*duration),
    b_y -> w_d/2) is evaluated at full precision. duration == 0 is only
    meaningful for s_d == 0; the caller guards the rest.
    """
    em = math.expm1(omega * duration)
    if em == 0.0:
        bx = 0.0
    else:
        bx = s_d / em
    by = w_d / (em + 2.0)
    return bx, by


@njit(cache=True)
def smooth_square(phase):
    """Contact schedule: +/-1-ish square wave, smoothed, period 1 in phase."""
    s = math.sin(2.0 * math.pi * phase)
    return s / math.sqrt(s * s + 0.04)


@njit(cache=True)
def grid_bilinear(heights, ox, oy, res, x, y):
    """Bilinear height at (x, y). Caller guarantees the point is in bounds;
    indices are clamped so queries on the far edges stay exact."""
    rows, cols = heights.shape
    gx = (x - ox) / res
    gy = (y - oy) / res
    j = int(math.floor(gx))
    i = int(math.floor(gy))
    if j > cols - 2:
        j = cols - 2
    if j < 0:
        j = 0
    if i > rows - 2:
        i = rows - 2
    if i < 0:
        i = 0
    fx = gx - j
    fy = gy - i
    return (heights[i, j] * (1.0 - fy) * (1.0 - fx)
            + heights[i, j + 1] * (1.0 - fy) * fx
            + heights[i + 1, j] * fy * (1.0 - fx)
            + heights[i + 1, j + 1] * fy * fx)


@njit(cache=True)
def grid_contains(rows, cols, ox, oy, res, x, y):
    return (x >= ox and x <= ox + (cols - 1) * res
            and y >= oy and y <= oy + (rows - 1) * res)


@njit(cache=True)
def steppable(heights, mask, ox, oy, res, x, y, radius, max_dev):
    """True when (x, y) offers foot-sized flat support.

    The four enclosing nodes must be supporting (mask marks gap cells, the
    stand-in for non-supporting ground), and every node within `radius`
    must be supporting with height within `max_dev` of the surface height
    at the query point. Samples falling outside the grid are ignored.
    """
    rows, cols = heights.shape
    if not grid_contains(rows, cols, ox, oy, res, x, y):
        return False
    gx = (x - ox) / res
    gy = (y - oy) / res
    j0 = int(math.floor(gx))
    i0 = int(math.floor(gy))
    if j0 > cols - 2:
        j0 = cols - 2
    if j0 < 0:
        j0 = 0
    if i0 > rows - 2:
        i0 = rows - 2
    if i0 < 0:
        i0 = 0
    if (mask[i0, j0] != 0 or mask[i0, j0 + 1] != 0
            or mask[i0 + 1, j0] != 0 or mask[i0 + 1, j0 + 1] != 0):
        return False
    h0 = grid_bilinear(heights, ox, oy, res, x, y)
    jlo = int(math.ceil((x - radius - ox) / res))
    jhi = int(math.floor((x + radius - ox) / res))
    ilo = int(math.ceil((y - radius - oy) / res))
    ihi = int(math.floor((y + radius - oy) / res))
    if jlo < 0:
        jlo = 0
    if ilo < 0:
        ilo = 0
    if jhi > cols - 1:
        jhi = cols - 1
    if ihi > rows - 1:
        ihi = rows - 1
    r2 = radius * radius
    for i in range(ilo, ihi + 1):
        ny = oy + i * res
        dy = ny - y
        for j in range(jlo, jhi + 1):
            nx = ox + j * res
            dx = nx - x
            if dx * dx + dy * dy > r2:
                continue
            if mask[i, j] != 0:
                return False
            if abs(heights[i, j] - h0) >= max_dev:
                return False
    return True


@njit(cache=True)
def snap_to_steppable(heights, mask, ox, oy, res, x, y, radius, max_dev, max_search):
    """Closest steppable point to (x, y) within max_search.

    Returns (found, sx, sy). The query point itself wins when steppable;
    otherwise grid nodes are searched in expanding rings, minimising
    Euclidean distance with ties broken by smaller x then smaller y.
    """
    if steppable(heights, mask, ox, oy, res, x, y, radius, max_dev):
        return True, x, y
    rows, cols = heights.shape
    ci = int(round((y - oy) / res))
    cj = int(round((x - ox) / res))
    best_d2 = 1e300
    bx = 0.0
    by = 0.0
    found = False
    budget2 = max_search * max_search + 1e-12
    max_ring = int(max_search / res) + 2
    for k in range(max_ring + 1):
        if found and (k - 1) * res > math.sqrt(best_d2):
            break
        for i in range(ci - k, ci + k + 1):
            if i < 0 or i > rows - 1:
                continue
            on_row_edge = (i == ci - k) or (i == ci + k)
            ny = oy + i * res
            dy = ny - y
            for j in range(cj - k, cj + k + 1):
                if j < 0 or j > cols - 1:
                    continue
                if not on_row_edge and j != cj - k and j != cj + k:
                    continue
                nx = ox + j * res
                dx = nx - x
                d2 = dx * dx + dy * dy
                if d2 > budget2:
                    continue
                if found and d2 > best_d2 + 1e-12:
                    continue
                if not steppable(heights, mask, ox, oy, res, nx, ny, radius, max_dev):
                    continue
                if not found:
                    take = True
                elif d2 < best_d2 - 1e-12:
                    take = True
                elif abs(d2 - best_d2) <= 1e-12:
                    if nx < bx - 1e-12:
                        take = True
                    elif abs(nx - bx) <= 1e-12 and ny < by - 1e-12:
                        take = True
                    else:
                        take = False
                else:
                    take = False
                if take:
                    found = True
                    best_d2 = d2
                    bx = nx
                    by = ny
    return found, bx, by


@njit(cache=True)
def _plan_target(icp_x, icp_y, st_x, st_y, omega, dt_pred, horizon,
                 vx_cmd, vy_cmd, w_cmd, parity, prev_heading,
                 has_terrain, heights, mask, ox, oy, res,
                 foot_radius, max_dev, snap_search):
    """Swing-foot target from the current capture point.

    The final ICP is predicted over the remaining step time dt_pred; the
    placement offsets are evaluated over `horizon` (the duration the next
    stance phase will actually last). Returns
    (ok, x, y, z, heading, raw_x, raw_y).
    """
    e = math.exp(omega * dt_pred)
    fx = e * icp_x + (1.0 - e) * st_x
    fy = e * icp_y + (1.0 - e) * st_y
    speed = math.hypot(vx_cmd, vy_cmd)
    if speed >= 1e-6:
        heading = math.atan2(vy_cmd, vx_cmd)
    else:
        heading = prev_heading
    bx, by = offset_pair(speed * horizon, abs(w_cmd), omega, horizon)
    if parity % 2 == 0:
        oy_off = by
    else:
        oy_off = -by
    ox_off = -bx
    c = math.cos(heading)
    s = math.sin(heading)
    px = fx + c * ox_off - s * oy_off
    py = fy + s * ox_off + c * oy_off
    pz = 0.0
    ok = True
    if has_terrain:
        ok, sx, sy = snap_to_steppable(heights, mask, ox, oy, res, px, py,
                                       foot_radius, max_dev, snap_search)
        if ok:
            pz = grid_bilinear(heights, ox, oy, res, sx, sy)
            px = sx
            py = sy
    return ok, px, py, pz, heading


@njit(cache=True)
def sim_loop(n_ticks, dt, ticks_per_step, g, base_height,
             cmd_ticks, cmd_vx, cmd_vy, cmd_w,
             replan_every_tick, reach_limit,
             has_terrain, heights, mask, ox, oy, res,
             foot_radius, max_dev, snap_search,
             com_x, com_y, vel_x, vel_y, st_x, st_y,
             samples, ev_time, ev_step, ev_realized, ev_parity):
    """Closed-loop stepping simulation.

    Per tick: handle the step boundary (instantaneous support transfer to
    the current swing target, stance-height dependent pendulum frequency),
    plan or replan the swing target, terrain-adjust it, record a sample at
    the tick instant, then propagate the CoM analytically over dt.

    samples is (n_ticks, N_SAMPLE_COLS); ev_* arrays must hold at least
    n_ticks // ticks_per_step + 2 touchdown events. Returns
    (n_recorded, outcome, fail_time, n_events).
    """
    Ts = ticks_per_step * dt
    st_z = 0.0
    if has_terrain:
        st_z = grid_bilinear(heights, ox, oy, res, st_x, st_y)
    z0 = base_height - st_z
    if z0 <= 0.0:
        return 0, OUTCOME_BAD_HEIGHT, 0.0, 0
    omega = math.sqrt(g / z0)

    parity = 0
    heading = 0.0
    cmd_i = 0
    n_cmd = cmd_ticks.shape[0]
    n_events = 0
    outcome = OUTCOME_COMPLETED
    fail_time = 0.0
    n_rec = 0

    icp_x = com_x + vel_x / omega
    icp_y = com_y + vel_y / omega
    ok, tg_x, tg_y, tg_z, heading = _plan_target(
        icp_x, icp_y, st_x, st_y, omega, Ts, Ts,
        cmd_vx[0], cmd_vy[0], cmd_w[0], parity, heading,
        has_terrain, heights, mask, ox, oy, res,
        foot_radius, max_dev, snap_search)
    if not ok:
        outcome = OUTCOME_NO_GROUND

    for i in range(n_ticks):
        t_now = i * dt
        s = i % ticks_per_step
        while cmd_i + 1 < n_cmd and i >= cmd_ticks[cmd_i + 1]:
            cmd_i += 1

        if outcome == OUTCOME_COMPLETED and i > 0 and s == 0:
            # Touchdown: support transfers to the swing target.
            st_x = tg_x
            st_y = tg_y
            st_z = tg_z
            parity += 1
            ev_time[n_events] = t_now
            ev_step[n_events, 0] = tg_x
            ev_step[n_events, 1] = tg_y
            ev_step[n_events, 2] = tg_z
            ev_step[n_events, 3] = heading
            ev_realized[n_events, 0] = st_x
            ev_realized[n_events, 1] = st_y
            ev_realized[n_events, 2] = st_z
            ev_parity[n_events] = parity
            n_events += 1
            z0 = base_height - st_z
            if z0 <= 0.0:
                outcome = OUTCOME_BAD_HEIGHT
                fail_time = t_now
            else:
                omega = math.sqrt(g / z0)
                icp_x = com_x + vel_x / omega
                icp_y = com_y + vel_y / omega
                if math.hypot(icp_x - st_x, icp_y - st_y) > reach_limit:
                    outcome = OUTCOME_REACH
                    fail_time = t_now
                elif math.hypot(st_x - com_x, st_y - com_y) > reach_limit:
                    outcome = OUTCOME_REACH
                    fail_time = t_now
                else:
                    ok, tg_x, tg_y, tg_z, heading = _plan_target(
                        icp_x, icp_y, st_x, st_y, omega, Ts, Ts,
                        cmd_vx[cmd_i], cmd_vy[cmd_i], cmd_w[cmd_i],
                        parity, heading,
                        has_terrain, heights, mask, ox, oy, res,
                        foot_radius, max_dev, snap_search)
                    if not ok:
                        outcome = OUTCOME_NO_GROUND
                        fail_time = t_now
        elif outcome == OUTCOME_COMPLETED and replan_every_tick and s != 0:
            dt_pred = Ts - s * dt
            icp_x = com_x + vel_x / omega
            icp_y = com_y + vel_y / omega
            ok, tg_x, tg_y, tg_z, heading = _plan_target(
                icp_x, icp_y, st_x, st_y, omega, dt_pred, Ts,
                cmd_vx[cmd_i], cmd_vy[cmd_i], cmd_w[cmd_i],
                parity, heading,
                has_terrain, heights, mask, ox, oy, res,
                foot_radius, max_dev, snap_search)
            if not ok:
                outcome = OUTCOME_NO_GROUND
                fail_time = t_now

        icp_x = com_x + vel_x / omega
        icp_y = com_y + vel_y / omega
        t_cycle = (parity % 2) * Ts + s * dt
        phase = t_cycle / (2.0 * Ts)
        ps = math.sin(2.0 * math.pi * phase)
        pc = math.cos(2.0 * math.pi * phase)
        samples[i, COL_TIME] = t_now
        samples[i, COL_COM_X] = com_x
        samples[i, COL_COM_Y] = com_y
        samples[i, COL_VEL_X] = vel_x
        samples[i, COL_VEL_Y] = vel_y
        samples[i, COL_ICP_X] = icp_x
        samples[i, COL_ICP_Y] = icp_y
        samples[i, COL_STANCE_X] = st_x
        samples[i, COL_STANCE_Y] = st_y
        samples[i, COL_STANCE_Z] = st_z
        samples[i, COL_TARGET_X] = tg_x
        samples[i, COL_TARGET_Y] = tg_y
        samples[i, COL_TARGET_Z] = tg_z
        samples[i, COL_TARGET_HEADING] = heading
        samples[i, COL_PARITY] = parity
        samples[i, COL_CONTACT_SCHED] = ps / math.sqrt(ps * ps + 0.04)
        samples[i, COL_PHASE_SIN] = ps
        samples[i, COL_PHASE_COS] = pc
        n_rec = i + 1
        if outcome != OUTCOME_COMPLETED:
            break

        com_x, com_y, vel_x, vel_y = lip_step(
            com_x, com_y, vel_x, vel_y, st_x, st_y, omega, dt)
        if not (math.isfinite(com_x) and math.isfinite(com_y)
                and math.isfinite(vel_x) and math.isfinite(vel_y)):
            outcome = OUTCOME_NON_FINITE
            fail_time = (i + 1) * dt
            break

    return n_rec, outcome, fail_time, n_events
