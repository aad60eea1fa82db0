import numpy as np
import pytest

from gateracer.dynamics import DroneState
from gateracer.geometry import default_track
from gateracer.opponent import (FollowerState, WaypointPlan, advance,
                                expected_gate_times, plan)

DT = 0.05


def make_follower(pos, t=0.0):
    return FollowerState(drone=DroneState(
        position=np.array(pos, dtype=float), velocity=np.zeros(3),
        attitude=np.zeros(3), angular_velocity=np.zeros(3), time=t))


def test_plan_structure():
    track = default_track(0, n_gates=4)
    p = plan(track, approach_offset=1.0)
    assert len(p.waypoints) == 8
    for i, gate in enumerate(track.gates):
        np.testing.assert_allclose(p.waypoints[2 * i],
                                   gate.center - gate.normal, atol=1e-12)
        np.testing.assert_array_equal(p.waypoints[2 * i + 1], gate.center)
    assert p.gate_waypoint_indices == [1, 3, 5, 7]


def test_plan_validation():
    with pytest.raises(ValueError):
        WaypointPlan(waypoints=np.zeros((0, 3)))
    with pytest.raises(ValueError):
        WaypointPlan(waypoints=np.zeros((2, 3)), cruise_speed=0.0)


def test_expected_times_vs_cumulative_distance():
    # independent oracle: walk the polyline summing euclidean legs
    track = default_track(5)
    p = plan(track)
    start = np.array([3.0, -2.0, 1.0])
    times = expected_gate_times(p, start)
    cum, prev = 0.0, start
    want = []
    for i, wp in enumerate(p.waypoints):
        cum += np.linalg.norm(wp - prev)
        prev = wp
        if i in p.gate_waypoint_indices:
            want.append(cum / p.cruise_speed)
    np.testing.assert_allclose(times, want, atol=1e-12)
    assert np.all(np.diff(times) > 0)


def test_advance_reaches_gates_on_schedule():
    """Simulated arrival at each gate-center waypoint matches the
    closed-form schedule to within one control step."""
    track = default_track(11)
    p = plan(track)
    start = np.array([2.0, 1.0, 1.2])
    expected = expected_gate_times(p, start)
    st = make_follower(start)
    arrivals = []
    seen = set()
    for _ in range(20_000):
        prev_idx = st.waypoint_index
        st = advance(p, st, DT)
        for idx in range(prev_idx, st.waypoint_index):
            if idx in p.gate_waypoint_indices and idx not in seen:
                seen.add(idx)
                arrivals.append(st.drone.time)
        if st.waypoint_index >= len(p.waypoints):
            break
    assert len(arrivals) == track.n_gates
    np.testing.assert_allclose(arrivals, expected, atol=DT + 1e-9)


def test_advance_hovers_after_last_waypoint():
    p = WaypointPlan(waypoints=np.array([[1.0, 0.0, 0.0]]), cruise_speed=2.0)
    st = make_follower([0.0, 0.0, 0.0])
    for _ in range(50):
        st = advance(p, st, DT)
    np.testing.assert_array_equal(st.drone.position, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(st.drone.velocity, np.zeros(3))
    assert st.waypoint_index == 1


def test_advance_constant_speed_between_waypoints():
    p = WaypointPlan(waypoints=np.array([[100.0, 0.0, 0.0]]),
                     cruise_speed=4.0)
    st = make_follower([0.0, 0.0, 0.0])
    st = advance(p, st, DT)
    np.testing.assert_allclose(st.drone.position, [4.0 * DT, 0.0, 0.0],
                               atol=1e-12)
    np.testing.assert_allclose(st.drone.velocity, [4.0, 0.0, 0.0])
    assert st.drone.yaw == 0.0


def test_advance_rejects_bad_dt():
    p = WaypointPlan(waypoints=np.array([[1.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        advance(p, make_follower([0, 0, 0]), 0.0)


def test_advance_deterministic():
    track = default_track(2, n_gates=3)
    p = plan(track)
    a = make_follower([0, 0, 1])
    b = make_follower([0, 0, 1])
    for _ in range(200):
        a = advance(p, a, DT)
        b = advance(p, b, DT)
    np.testing.assert_array_equal(a.drone.position, b.drone.position)
    assert a.waypoint_index == b.waypoint_index
