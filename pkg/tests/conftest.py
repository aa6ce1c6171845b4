from __future__ import annotations

from protoforge.model import (
    GoalKind,
    LivenessMode,
    NetworkSpec,
    Topology,
    topology_all,
    topology_line,
)


def make_spec(
    processes: int = 3,
    packets: int = 1,
    horizon: int = 2,
    source: int = 0,
    topology: Topology | str = "line",
    liveness: LivenessMode = LivenessMode.OFF,
    goal: GoalKind = GoalKind.ALL_KNOW_ALL,
) -> NetworkSpec:
    if topology == "line":
        topology = topology_line(processes)
    elif topology == "all":
        topology = topology_all(processes)
    assert isinstance(topology, Topology)
    return NetworkSpec(
        processes=processes,
        packets=packets,
        horizon=horizon,
        source=source,
        topology=topology,
        liveness=liveness,
        goal=goal,
    )
