import pytest

from gridhouse.scene import Scene, SceneCategory, AgentPose, ObjectInstance, ObjectState, Capability
from gridhouse.service import bundled_scenes

_criterion_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker:
            _criterion_results.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per marked guarantee, after the normal summary."""
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance")
    for name, passed in _criterion_results:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def scenes():
    return bundled_scenes()


@pytest.fixture(scope="session")
def kitchen(scenes):
    return scenes["kitchen_01"]


def make_scene(width=8, depth=8, walls=(), objects=(), agent=None, scene_id="test_room",
               category=SceneCategory.KITCHEN):
    """Hand-rolled scene for focused tests; validated lazily by the env."""
    return Scene(
        id=scene_id,
        category=category,
        width=width,
        depth=depth,
        cell_size=0.25,
        walls=frozenset(walls),
        objects=tuple(objects),
        agent_start=agent or AgentPose((1, 1), 0, 0),
    )


def obj(oid, cls, cell, height, caps, parent=None, **state):
    return ObjectInstance(
        id=oid,
        object_class=cls,
        cell=cell,
        height=height,
        capabilities=frozenset(caps),
        state=ObjectState(**state),
        parent_receptacle=parent,
    )


P = Capability.PICKUPABLE
O = Capability.OPENABLE
T = Capability.TOGGLEABLE
B = Capability.BREAKABLE
R = Capability.RECEPTACLE
