from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from tropscatter.scatter import build_diagram
from tropscatter.sceneio import golden_scene
from tropscatter.toric import Scene

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def scene_k0():
    return Scene.make("P2", ())


@pytest.fixture(scope="session")
def scene_k1():
    return golden_scene(1)


@pytest.fixture(scope="session")
def scene_k2():
    return golden_scene(2)


@pytest.fixture(scope="session")
def diagram_k1(scene_k1):
    return build_diagram(scene_k1)


@pytest.fixture(scope="session")
def diagram_k2(scene_k2):
    return build_diagram(scene_k2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
