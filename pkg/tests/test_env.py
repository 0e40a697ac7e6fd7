"""Environment stepping: the action-semantics table, failure reasons, determinism."""

import random

import pytest

from conftest import make_scene, obj, P, O, T, B, R
from gridhouse.actions import ActionKind, AtomicAction
from gridhouse.env import init_env, replay
from gridhouse.scene import AgentPose


def A(kind, target=None):
    return AtomicAction(kind, target)


def kitchen_env():
    """Agent at (1,1) facing +z; counter with mug at (1,3); fridge at (3,1)."""
    scene = make_scene(
        width=6, depth=6,
        objects=[
            obj("counter", "CounterTop", (1, 3), 0.9, {R}),
            obj("mug", "Mug", (1, 3), 0.35, {P}, parent="counter"),
            obj("fridge", "Fridge", (3, 1), 1.8, {O, R}, is_open=False),
            obj("lamp", "Lamp", (4, 4), 0.5, {T}, is_on=False),
            obj("egg", "Egg", (1, 2), 0.15, {P, B}, is_broken=False),
        ],
        agent=AgentPose((1, 1), 0, 0),
    )
    return init_env(scene)


# --- movement ----------------------------------------------------------------

def test_move_ahead_and_back():
    env = kitchen_env()
    ev = env.step(A(ActionKind.MOVE_AHEAD))
    assert ev.ok and env.agent.cell == (1, 2)
    ev = env.step(A(ActionKind.MOVE_BACK))
    assert ev.ok and env.agent.cell == (1, 1)


def test_move_blocked_by_object_and_wall():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))  # (1,2): egg on floor does not block
    ev = env.step(A(ActionKind.MOVE_AHEAD))  # (1,3) holds the counter
    assert not ev.ok and ev.reason == "BlockedMove"
    assert env.agent.cell == (1, 2)


def test_move_blocked_by_boundary():
    env = kitchen_env()
    env.step(A(ActionKind.ROTATE_LEFT))  # face -x
    ev = env.step(A(ActionKind.MOVE_AHEAD))
    assert env.agent.cell == (0, 1) and ev.ok
    ev = env.step(A(ActionKind.MOVE_AHEAD))
    assert not ev.ok and ev.reason == "BlockedMove"


def test_rotation_wraps():
    env = kitchen_env()
    for _ in range(4):
        assert env.step(A(ActionKind.ROTATE_RIGHT)).ok
    assert env.agent.heading == 0
    env.step(A(ActionKind.ROTATE_LEFT))
    assert env.agent.heading == 270


def test_pitch_clamps_with_wrong_state():
    env = kitchen_env()
    assert env.step(A(ActionKind.LOOK_UP)).ok
    ev = env.step(A(ActionKind.LOOK_UP))
    assert not ev.ok and ev.reason == "WrongState"
    assert env.agent.pitch == 30
    env.step(A(ActionKind.LOOK_DOWN))
    env.step(A(ActionKind.LOOK_DOWN))
    ev = env.step(A(ActionKind.LOOK_DOWN))
    assert not ev.ok and env.agent.pitch == -30


def test_failed_step_freezes_tick_and_state():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    before_tick = env.tick
    before_hash = env.state_hash()
    ev = env.step(A(ActionKind.MOVE_AHEAD))  # blocked by counter
    assert not ev.ok
    assert env.tick == before_tick
    assert env.state_hash() == before_hash
    # but the failure is still on the event log
    assert env.events[-1].reason == "BlockedMove"


# --- interactions ------------------------------------------------------------

def test_pickup_within_range_two():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))  # (1,2), mug at (1,3) = range 1
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert ev.ok
    assert env.held == "mug"
    assert env.objects["mug"].cell is None
    assert env.objects["mug"].parent is None


def test_pickup_at_exact_range_two():
    env = kitchen_env()  # agent (1,1), mug at (1,3): two cells ahead
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert ev.ok and env.held == "mug"


def test_pickup_out_of_range():
    scene = make_scene(objects=[
        obj("counter", "CounterTop", (1, 5), 0.9, {R}),
        obj("mug", "Mug", (1, 5), 0.35, {P}, parent="counter"),
    ], agent=AgentPose((1, 1), 0, 0))
    env = init_env(scene)
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert not ev.ok and ev.reason == "OutOfRange"


def test_pickup_wrong_direction_is_out_of_range():
    env = kitchen_env()
    env.step(A(ActionKind.ROTATE_RIGHT))  # face +x, mug is north
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert not ev.ok and ev.reason == "OutOfRange"


def test_pickup_blocked_line_of_sight():
    scene = make_scene(objects=[
        obj("bed", "Bed", (1, 2), 0.6, {R}),
        obj("counter", "CounterTop", (1, 3), 0.9, {R}),
        obj("mug", "Mug", (1, 3), 0.35, {P}, parent="counter"),
    ], agent=AgentPose((1, 1), 0, 0))
    env = init_env(scene)
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert not ev.ok and ev.reason == "NotVisible"


def test_pickup_unknown_target():
    env = kitchen_env()
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "ghost"))
    assert not ev.ok and ev.reason == "UnknownTarget"


def test_pickup_wrong_capability():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "counter"))
    assert not ev.ok and ev.reason == "WrongCapability"


def test_pickup_hands_full():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    assert env.held == "egg"
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    assert not ev.ok and ev.reason == "HandsFull"


def test_pickup_with_children_refused():
    scene = make_scene(objects=[
        obj("tray", "Tray", (1, 2), 0.05, {P, R}),
        obj("egg", "Egg", (1, 2), 0.15, {P, B}, parent="tray", is_broken=False),
    ], agent=AgentPose((1, 1), 0, 0))
    env = init_env(scene)
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "tray"))
    assert not ev.ok and ev.reason == "WrongState"
    # removing the child unblocks the tray
    assert env.step(A(ActionKind.PICKUP_OBJECT, "egg")).ok
    env.step(A(ActionKind.ROTATE_RIGHT))
    assert env.step(A(ActionKind.DROP_HAND_OBJECT)).ok
    env.step(A(ActionKind.ROTATE_LEFT))
    assert env.step(A(ActionKind.PICKUP_OBJECT, "tray")).ok


def test_put_on_receptacle():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    ev = env.step(A(ActionKind.PUT_OBJECT, "counter"))
    assert ev.ok
    assert env.held is None
    assert env.objects["mug"].parent == "counter"
    assert env.objects["mug"].cell == (1, 3)


def test_put_hands_empty():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    ev = env.step(A(ActionKind.PUT_OBJECT, "counter"))
    assert not ev.ok and ev.reason == "HandsEmpty"


def test_put_into_closed_fridge_wrong_state():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    env.step(A(ActionKind.ROTATE_RIGHT))
    env.step(A(ActionKind.MOVE_AHEAD))  # (2,1), fridge at (3,1) range 1
    ev = env.step(A(ActionKind.PUT_OBJECT, "fridge"))
    assert not ev.ok and ev.reason == "WrongState"
    assert env.step(A(ActionKind.OPEN_OBJECT, "fridge")).ok
    assert env.step(A(ActionKind.PUT_OBJECT, "fridge")).ok
    assert env.objects["egg"].parent == "fridge"


def test_open_close_cycle():
    env = kitchen_env()
    env.step(A(ActionKind.ROTATE_RIGHT))
    ev = env.step(A(ActionKind.CLOSE_OBJECT, "fridge"))
    assert not ev.ok and ev.reason == "WrongState"  # already closed
    assert env.step(A(ActionKind.OPEN_OBJECT, "fridge")).ok
    assert env.objects["fridge"].state.is_open is True
    ev = env.step(A(ActionKind.OPEN_OBJECT, "fridge"))
    assert not ev.ok and ev.reason == "WrongState"  # already open
    assert env.step(A(ActionKind.CLOSE_OBJECT, "fridge")).ok
    assert env.objects["fridge"].state.is_open is False


def test_open_requires_openable():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    ev = env.step(A(ActionKind.OPEN_OBJECT, "counter"))
    assert not ev.ok and ev.reason == "WrongCapability"


def test_hidden_inside_closed_receptacle():
    scene = make_scene(objects=[
        obj("fridge", "Fridge", (1, 2), 1.8, {O, R}, is_open=False),
        obj("egg", "Egg", (1, 2), 0.15, {P, B}, parent="fridge", is_broken=False),
    ], agent=AgentPose((1, 1), 0, 0))
    env = init_env(scene)
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    assert not ev.ok and ev.reason == "NotVisible"
    env.step(A(ActionKind.OPEN_OBJECT, "fridge"))
    assert env.step(A(ActionKind.PICKUP_OBJECT, "egg")).ok


def test_toggle_on_off():
    env = kitchen_env()
    # walk around the fridge to stand west of the lamp at (4,4)
    env.step(A(ActionKind.ROTATE_RIGHT))
    env.step(A(ActionKind.MOVE_AHEAD))  # (2,1)
    env.step(A(ActionKind.ROTATE_LEFT))
    for _ in range(3):
        env.step(A(ActionKind.MOVE_AHEAD))  # (2,4)
    env.step(A(ActionKind.ROTATE_RIGHT))
    env.step(A(ActionKind.MOVE_AHEAD))  # (3,4), lamp one cell ahead
    assert env.agent.cell == (3, 4)
    ev = env.step(A(ActionKind.TOGGLE_ON, "lamp"))
    assert ev.ok and env.objects["lamp"].state.is_on is True
    ev = env.step(A(ActionKind.TOGGLE_ON, "lamp"))
    assert not ev.ok and ev.reason == "WrongState"
    assert env.step(A(ActionKind.TOGGLE_OFF, "lamp")).ok


def test_drop_breaks_breakable():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    env.step(A(ActionKind.ROTATE_RIGHT))  # face +x toward (2,1), free floor
    ev = env.step(A(ActionKind.DROP_HAND_OBJECT))
    assert ev.ok
    assert env.objects["egg"].state.is_broken is True
    assert env.objects["egg"].cell == (2, 1)
    assert env.objects["egg"].parent is None
    assert env.held is None


def test_drop_nonbreakable_survives():
    env = kitchen_env()
    env.step(A(ActionKind.MOVE_AHEAD))
    env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    env.step(A(ActionKind.ROTATE_RIGHT))
    ev = env.step(A(ActionKind.DROP_HAND_OBJECT))
    assert ev.ok
    assert env.objects["mug"].state.is_broken is None
    assert env.objects["mug"].cell == (2, 2)


def test_put_without_target_places_on_floor():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    env.step(A(ActionKind.ROTATE_RIGHT))
    ev = env.step(A(ActionKind.PUT_OBJECT))
    assert ev.ok
    # a gentle put never breaks
    assert env.objects["egg"].state.is_broken is False
    assert env.objects["egg"].cell == (2, 1)


def test_drop_with_empty_hand():
    env = kitchen_env()
    ev = env.step(A(ActionKind.DROP_HAND_OBJECT))
    assert not ev.ok and ev.reason == "HandsEmpty"


def test_drop_onto_occupied_cell_blocked():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    env.step(A(ActionKind.MOVE_AHEAD))
    env.step(A(ActionKind.MOVE_AHEAD))  # (1,3) blocked by counter? no: counter at (1,3)
    # agent stops at (1,2); facing cell (1,3) holds the counter
    ev = env.step(A(ActionKind.DROP_HAND_OBJECT))
    assert not ev.ok and ev.reason == "BlockedMove"
    assert env.held == "egg"


def test_drop_at_boundary_blocked():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    env.step(A(ActionKind.ROTATE_LEFT))
    env.step(A(ActionKind.MOVE_AHEAD))  # (0,1)
    ev = env.step(A(ActionKind.DROP_HAND_OBJECT))  # facing (-1,1): out of bounds
    assert not ev.ok and ev.reason == "BlockedMove"


def test_held_object_cannot_be_interacted_with():
    env = kitchen_env()
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    ev = env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    assert not ev.ok  # hands full already covers it
    env2 = kitchen_env()
    env2.step(A(ActionKind.MOVE_AHEAD))
    env2.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    # toggling the held mug makes no sense: it is out of the scene
    ev = env2.step(A(ActionKind.TOGGLE_ON, "mug"))
    assert not ev.ok and ev.reason in ("WrongCapability", "OutOfRange")


def test_object_top_follows_parent_chain():
    env = kitchen_env()
    assert env.object_top("mug") == pytest.approx(1.25)
    env.step(A(ActionKind.MOVE_AHEAD))
    env.step(A(ActionKind.PICKUP_OBJECT, "mug"))
    env.step(A(ActionKind.ROTATE_RIGHT))
    env.step(A(ActionKind.DROP_HAND_OBJECT))
    assert env.object_top("mug") == pytest.approx(0.35)  # now on the floor


def test_event_effects_describe_deltas():
    env = kitchen_env()
    env.step(A(ActionKind.ROTATE_RIGHT))
    ev = env.step(A(ActionKind.OPEN_OBJECT, "fridge"))
    assert ev.effects == (("fridge", {"is_open": True}),)
    doc = ev.to_json()
    assert doc["outcome"] == "Ok"
    assert doc["effects"] == [{"object": "fridge", "delta": {"is_open": True}}]


def test_replay_reproduces_state_hash():
    env = kitchen_env()
    script = [
        A(ActionKind.MOVE_AHEAD),
        A(ActionKind.PICKUP_OBJECT, "mug"),
        A(ActionKind.ROTATE_RIGHT),
        A(ActionKind.DROP_HAND_OBJECT),
        A(ActionKind.MOVE_AHEAD),  # blocked? (2,2) free -> ok
    ]
    for act in script:
        env.step(act)
    want = env.state_hash()
    _, digest = replay(env.scene, script)
    assert digest == want
    _, digest2 = replay(env.scene, script)
    assert digest2 == want


def test_random_walk_determinism(kitchen):
    rng = random.Random(7)
    kinds = list(ActionKind)
    targets = [o.id for o in kitchen.objects] + [None]
    script = []
    for _ in range(300):
        kind = rng.choice(kinds)
        if kind in (ActionKind.PICKUP_OBJECT, ActionKind.PUT_OBJECT, ActionKind.OPEN_OBJECT,
                    ActionKind.CLOSE_OBJECT, ActionKind.TOGGLE_ON, ActionKind.TOGGLE_OFF):
            target = rng.choice(targets[:-1])
        else:
            target = None
        try:
            script.append(AtomicAction(kind, target))
        except Exception:
            continue
    _, d1 = replay(kitchen, script)
    _, d2 = replay(kitchen, script)
    assert d1 == d2


def test_occupancy_is_static_under_pickup():
    env = kitchen_env()
    grid_before = env.occupancy
    env.step(A(ActionKind.PICKUP_OBJECT, "egg"))
    assert env.occupancy is grid_before
