"""Problem instances: network size, topology, liveness, goal, file format.

A problem names P processes (ids 0..P-1), M data packets (ids 1..M; 0 is
reserved for garbage), a slot horizon T, a single source process that
starts out holding every packet, who can hear whom, an optional liveness
obligation, and the delivery goal.

Spec files are UTF-8 text, one ``key = value`` per line, ``#`` comments,
whitespace-insensitive::

    processes = 3
    packets   = 1
    horizon   = 2
    source    = 0
    topology  = line          # all | line | explicit
    liveness  = off           # off | each-action-once
    goal      = all-know-all  # all-know-all | none

With ``topology = explicit`` each audible pair appears on its own
``hears <listener> <speaker>`` line. Every other key is mandatory exactly
once; unknown keys are rejected; parse errors report line numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class LivenessMode(Enum):
    OFF = "off"
    EACH_ACTION_ONCE = "each-action-once"


class GoalKind(Enum):
    ALL_KNOW_ALL = "all-know-all"
    NONE = "none"


class RequirementLabel(Enum):
    """Requirement families, in fixed taxonomy order."""

    R1_EXACTLY_ONE_ACTION = "R1_ExactlyOneAction"
    R2_CONTENT_DOMAIN = "R2_ContentDomain"
    R3_LIVENESS = "R3_Liveness"
    R4_INITIAL_KNOWLEDGE = "R4_InitialKnowledge"
    R5_TRANSMIT_ONLY_KNOWN = "R5_TransmitOnlyKnown"
    R6_NEVER_FORGETS = "R6_NeverForgets"
    R7_COLLISION_FREE_LEARNING = "R7_CollisionFreeLearning"
    GOAL_DEADLINE = "GOAL_Deadline"
    TOPO_HEARS_RELATION = "TOPO_HearsRelation"


TAXONOMY: tuple[RequirementLabel, ...] = tuple(RequirementLabel)
_TAXONOMY_INDEX = {label: i for i, label in enumerate(TAXONOMY)}

# Hold by construction of the cell domain; they can never be disabled.
STRUCTURAL_LABELS = frozenset(
    {RequirementLabel.R1_EXACTLY_ONE_ACTION, RequirementLabel.R2_CONTENT_DOMAIN}
)


def taxonomy_index(label: RequirementLabel) -> int:
    return _TAXONOMY_INDEX[label]


@dataclass(frozen=True)
class Topology:
    """The hears relation: (listener, speaker) pairs that can communicate."""

    hears: frozenset[tuple[int, int]]


def topology_all(processes: int) -> Topology:
    """Complete graph: everyone hears everyone else."""
    pairs = frozenset(
        (l, s) for l in range(processes) for s in range(processes) if l != s
    )
    return Topology(pairs)


def topology_line(processes: int) -> Topology:
    """Chain: process p hears only p-1."""
    return Topology(frozenset((p, p - 1) for p in range(1, processes)))


@dataclass(frozen=True)
class NetworkSpec:
    processes: int
    packets: int
    horizon: int
    source: int
    topology: Topology
    liveness: LivenessMode = LivenessMode.OFF
    goal: GoalKind = GoalKind.ALL_KNOW_ALL


class SpecError(ValueError):
    """Anything wrong with a problem description."""


class SpecParseError(SpecError):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SpecValidationError(SpecError):
    def __init__(self, errors: list[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = tuple(errors)


def validate_spec(spec: NetworkSpec) -> list[str]:
    """Returns the list of semantic violations; empty means the instance is usable."""
    errors: list[str] = []
    if spec.processes < 1:
        errors.append("processes must be >= 1")
    if spec.packets < 0:
        errors.append("packets must be >= 0")
    if spec.horizon < 0:
        errors.append("horizon must be >= 0")
    if spec.processes >= 1 and not 0 <= spec.source < spec.processes:
        errors.append(f"source out of range: {spec.source}")
    for listener, speaker in sorted(spec.topology.hears):
        if listener == speaker:
            errors.append(f"reflexive hears pair ({listener}, {speaker})")
        elif spec.processes >= 1 and not (
            0 <= listener < spec.processes and 0 <= speaker < spec.processes
        ):
            errors.append(f"process id out of range in hears pair ({listener}, {speaker})")
    return errors


_INT_KEYS = ("processes", "packets", "horizon", "source")
_ENUM_KEYS = {
    "topology": ("all", "line", "explicit"),
    "liveness": tuple(m.value for m in LivenessMode),
    "goal": tuple(g.value for g in GoalKind),
}
_ALL_KEYS = _INT_KEYS + tuple(_ENUM_KEYS)


def parse_spec(text: str) -> NetworkSpec:
    """Parses the file format above; raises SpecParseError/SpecValidationError."""
    seen: dict[str, str] = {}
    hears_pairs: list[tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace("=", " ").split()
        if tokens and tokens[0] == "hears":
            if len(tokens) != 3:
                raise SpecParseError(line_no, "hears takes exactly two process ids")
            try:
                pair = (int(tokens[1]), int(tokens[2]))
            except ValueError:
                raise SpecParseError(line_no, f"hears ids must be integers: {line!r}") from None
            if pair in hears_pairs:
                raise SpecParseError(line_no, f"duplicate hears pair {pair}")
            hears_pairs.append(pair)
            continue
        if "=" not in line:
            raise SpecParseError(line_no, f"expected key = value, got {line!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _ALL_KEYS:
            raise SpecParseError(line_no, f"unknown key {key!r}")
        if key in seen:
            raise SpecParseError(line_no, f"duplicate key {key!r}")
        if not value:
            raise SpecParseError(line_no, f"missing value for {key!r}")
        if key in _INT_KEYS:
            try:
                int(value)
            except ValueError:
                raise SpecParseError(line_no, f"{key} must be an integer, got {value!r}") from None
        elif value not in _ENUM_KEYS[key]:
            allowed = " | ".join(_ENUM_KEYS[key])
            raise SpecParseError(line_no, f"{key} must be one of {allowed}, got {value!r}")
        seen[key] = value

    missing = [key for key in _ALL_KEYS if key not in seen]
    if missing:
        raise SpecParseError(len(text.splitlines()) + 1, f"missing keys: {', '.join(missing)}")

    processes = int(seen["processes"])
    if seen["topology"] == "all":
        topology = topology_all(processes)
    elif seen["topology"] == "line":
        topology = topology_line(processes)
    else:
        topology = Topology(frozenset(hears_pairs))
    if hears_pairs and seen["topology"] != "explicit":
        raise SpecValidationError(["hears lines require topology = explicit"])

    spec = NetworkSpec(
        processes=processes,
        packets=int(seen["packets"]),
        horizon=int(seen["horizon"]),
        source=int(seen["source"]),
        topology=topology,
        liveness=LivenessMode(seen["liveness"]),
        goal=GoalKind(seen["goal"]),
    )
    errors = validate_spec(spec)
    if errors:
        raise SpecValidationError(errors)
    return spec


def topology_name(topology: Topology, processes: int) -> str:
    """Canonical file-format name for a hears relation."""
    if topology.hears == topology_all(processes).hears:
        return "all"
    if topology.hears == topology_line(processes).hears:
        return "line"
    return "explicit"


def render_spec(spec: NetworkSpec) -> str:
    """Writes the file format above. parse_spec(render_spec(s)) == s for valid s."""
    name = topology_name(spec.topology, spec.processes)
    lines = [
        f"processes = {spec.processes}",
        f"packets = {spec.packets}",
        f"horizon = {spec.horizon}",
        f"source = {spec.source}",
        f"topology = {name}",
    ]
    if name == "explicit":
        lines.extend(f"hears {l} {s}" for l, s in sorted(spec.topology.hears))
    lines.append(f"liveness = {spec.liveness.value}")
    lines.append(f"goal = {spec.goal.value}")
    return "\n".join(lines) + "\n"


def spec_as_dict(spec: NetworkSpec) -> dict:
    """JSON-friendly form used inside trace files; field order is fixed."""
    name = topology_name(spec.topology, spec.processes)
    obj: dict = {
        "processes": spec.processes,
        "packets": spec.packets,
        "horizon": spec.horizon,
        "source": spec.source,
        "topology": name,
    }
    if name == "explicit":
        obj["hears"] = [list(pair) for pair in sorted(spec.topology.hears)]
    obj["liveness"] = spec.liveness.value
    obj["goal"] = spec.goal.value
    return obj


def spec_from_dict(obj: dict) -> NetworkSpec:
    """Inverse of spec_as_dict; raises SpecError on malformed input."""
    if not isinstance(obj, dict):
        raise SpecError(f"spec object must be a mapping, got {type(obj).__name__}")
    allowed = set(_ALL_KEYS) | {"hears"}
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise SpecError(f"unknown spec fields: {', '.join(unknown)}")
    missing = [key for key in _ALL_KEYS if key not in obj]
    if missing:
        raise SpecError(f"missing spec fields: {', '.join(missing)}")
    for key in _INT_KEYS:
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise SpecError(f"{key} must be an integer")
    processes = obj["processes"]
    kind = obj["topology"]
    if kind == "all":
        topology = topology_all(processes)
    elif kind == "line":
        topology = topology_line(processes)
    elif kind == "explicit":
        pairs = obj.get("hears", [])
        if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(x, int) for x in p)
            for p in pairs
        ):
            raise SpecError("hears must be a list of [listener, speaker] pairs")
        topology = Topology(frozenset((l, s) for l, s in pairs))
    else:
        raise SpecError(f"topology must be all | line | explicit, got {kind!r}")
    if kind != "explicit" and "hears" in obj:
        raise SpecError("hears is only allowed with explicit topology")
    try:
        liveness = LivenessMode(obj["liveness"])
        goal = GoalKind(obj["goal"])
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    spec = NetworkSpec(
        processes=processes,
        packets=obj["packets"],
        horizon=obj["horizon"],
        source=obj["source"],
        topology=topology,
        liveness=liveness,
        goal=goal,
    )
    errors = validate_spec(spec)
    if errors:
        raise SpecValidationError(errors)
    return spec
