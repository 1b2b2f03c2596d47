"""Scenario files: a sectioned TOML format for describing simulation runs.

A scenario file fixes the agent model, the communication graph, the
protocol variant with its adaptation parameters, per-agent disturbances,
and the integration settings.  Vertex, agent, and state-component indices
in files are 1-based (matching the usual agent numbering); the in-memory
API is 0-based throughout.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .graph import DirectedGraph, GraphStructureError
from .protocol import GainDesign, ProtocolConfig, Variant, design_gains
from .sim import (
    DISTURBANCE_KINDS,
    AgentModel,
    Disturbance,
    Scenario,
    draw_initial_gains,
    draw_initial_states,
)

__all__ = [
    "OutputSpec",
    "ScenarioFile",
    "ScenarioFormatError",
    "load_scenario_file",
    "parse_scenario",
    "parse_scenario_text",
    "write_scenario",
]


class ScenarioFormatError(ValueError):
    """A scenario file is malformed; the message names section and key."""


@dataclass(frozen=True)
class OutputSpec:
    """Artifact filenames (relative to the run output directory)."""

    csv: str = "trajectory.csv"
    report: str = "report.txt"
    plots: bool = True
    err_plot: str = "err_norms.svg"
    gains_plot: str = "gains.svg"


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    """Parsed scenario file: raw configuration plus output settings.

    Exactly one of x0 / x0_seed is set, and exactly one of
    initial_gains / gain_seed.  build() materializes the seeded draws
    and returns a validated Scenario.
    """

    model: AgentModel
    graph: DirectedGraph
    variant: Variant
    phi: np.ndarray
    initial_gains: np.ndarray | None
    gain_seed: int | None
    disturbances: tuple[Disturbance, ...]
    x0: np.ndarray | None
    x0_seed: int | None
    step_h: float
    t_end: float
    record_every: int = 10
    output: OutputSpec = OutputSpec()

    @property
    def mode(self) -> str:
        return "leader" if self.variant.leader_mode else "leaderless"

    @property
    def n_adaptive(self) -> int:
        nv = self.graph.n_vertices
        return nv - 1 if self.variant.leader_mode else nv

    def design(self, tol: float = 1e-10) -> GainDesign:
        return design_gains(self.model.a, self.model.b, tol=tol)

    def build(self) -> Scenario:
        n_total = self.graph.n_vertices * self.model.n_states
        if self.x0 is not None:
            x0 = self.x0
        else:
            x0 = draw_initial_states(n_total, self.x0_seed)
        if self.initial_gains is not None:
            gains = self.initial_gains
        else:
            gains = draw_initial_gains(self.n_adaptive, self.gain_seed)
        protocol = ProtocolConfig(
            variant=self.variant, phi=self.phi, initial_gains=gains
        )
        return Scenario(
            graph=self.graph,
            model=self.model,
            design=self.design(),
            protocol=protocol,
            disturbances=self.disturbances,
            x0=x0,
            step_h=self.step_h,
            t_end=self.t_end,
            record_every=self.record_every,
        )

    def to_text(self) -> str:
        return _serialize(self)


# --- parsing -----------------------------------------------------------

_SECTION_KEYS = {
    "model": {"a", "b"},
    "graph": {"mode", "leader", "vertices", "edges"},
    "protocol": {"variant", "phi", "gain_seed", "initial_gains"},
    "sim": {"x0", "x0_seed", "step_h", "t_end", "record_every"},
    "output": {"csv", "report", "plots", "err_plot", "gains_plot"},
}

_DISTURBANCE_KEYS = {
    "zero": set(),
    "sine": {"amplitude", "angular_frequency", "phase"},
    "cosine": {"amplitude", "angular_frequency"},
    "exp_decay": {"amplitude", "rate"},
    "state_sine": {"amplitude", "source_agent", "source_component"},
}


def _err(where: str, msg: str) -> ScenarioFormatError:
    return ScenarioFormatError(f"[{where}] {msg}")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _get_number(sec: dict, section: str, key: str) -> float:
    if key not in sec:
        raise _err(section, f"missing key '{key}'")
    v = sec[key]
    if not _is_number(v):
        raise _err(section, f"key '{key}' must be a number")
    return float(v)


def _get_int(sec: dict, section: str, key: str) -> int:
    if key not in sec:
        raise _err(section, f"missing key '{key}'")
    v = sec[key]
    if type(v) is not int:
        raise _err(section, f"key '{key}' must be an integer")
    return v


def _matrix(sec: dict, section: str, key: str) -> np.ndarray:
    if key not in sec:
        raise _err(section, f"missing key '{key}'")
    rows = sec[key]
    if (
        not isinstance(rows, list)
        or not rows
        or not all(isinstance(r, list) and r for r in rows)
        or not all(_is_number(v) for r in rows for v in r)
        or len({len(r) for r in rows}) != 1
    ):
        raise _err(
            section, f"key '{key}' must be a non-empty list of equal-length number rows"
        )
    return np.array(rows, dtype=float)


def _check_keys(sec: dict, section: str) -> None:
    unknown = set(sec) - _SECTION_KEYS[section]
    if unknown:
        allowed = ", ".join(sorted(_SECTION_KEYS[section]))
        raise _err(section, f"unknown key '{sorted(unknown)[0]}' (allowed: {allowed})")


def _parse_graph(sec: dict) -> tuple[DirectedGraph, str]:
    _check_keys(sec, "graph")
    mode = sec.get("mode")
    if mode not in ("leader", "leaderless"):
        raise _err("graph", "key 'mode' must be \"leader\" or \"leaderless\"")
    nv = _get_int(sec, "graph", "vertices")
    if nv < 2:
        raise _err("graph", "key 'vertices' must be at least 2")
    if mode == "leader":
        leader = _get_int(sec, "graph", "leader")
        if leader != 1:
            raise _err(
                "graph",
                "key 'leader' must be 1: vertex 1 is the leader by convention; "
                "relabel the vertices so the leader comes first",
            )
    elif "leader" in sec:
        raise _err("graph", "key 'leader' is only meaningful in leader mode")
    raw = sec.get("edges")
    if not isinstance(raw, list) or not raw:
        raise _err("graph", "key 'edges' must be a non-empty list of [tail, head, weight]")
    edges = []
    for e in raw:
        if (
            not isinstance(e, list)
            or len(e) != 3
            or type(e[0]) is not int
            or type(e[1]) is not int
            or not _is_number(e[2])
        ):
            raise _err("graph", f"edge {e!r} must be [tail, head, weight] with integer vertices")
        tail, head, w = e
        if not (1 <= tail <= nv and 1 <= head <= nv):
            raise _err("graph", f"edge {e!r} references a vertex outside 1..{nv}")
        edges.append((tail - 1, head - 1, float(w)))
    try:
        graph = DirectedGraph.from_edges(nv, edges)
    except (GraphStructureError, ValueError) as exc:
        raise _err("graph", f"key 'edges': {exc}") from exc
    return graph, mode


def _parse_phi(sec: dict, variant: Variant, n_adaptive: int) -> np.ndarray:
    raw = sec.get("phi")
    if raw is None:
        if variant.robust:
            raise _err("protocol", "robust variant requires positive phi")
        return np.zeros(n_adaptive)
    if _is_number(raw):
        phi = np.full(n_adaptive, float(raw))
    elif isinstance(raw, list) and raw and all(_is_number(v) for v in raw):
        if len(raw) != n_adaptive:
            raise _err(
                "protocol",
                f"key 'phi' has {len(raw)} entries; expected {n_adaptive} "
                "(one per adaptive agent) or a scalar",
            )
        phi = np.array(raw, dtype=float)
    else:
        raise _err("protocol", "key 'phi' must be a number or a list of numbers")
    if variant.robust and not np.all(phi > 0):
        raise _err("protocol", "robust variant requires positive phi")
    if not variant.robust and np.any(phi != 0):
        raise _err(
            "protocol",
            "key 'phi': non-robust variants have no leakage term; set phi to 0 or omit it",
        )
    return phi


def _parse_disturbances(tables, nv: int, n_states: int) -> tuple[Disturbance, ...]:
    dists = [Disturbance.zero() for _ in range(nv)]
    if tables is None:
        return tuple(dists)
    if not isinstance(tables, list):
        raise _err("disturbances", "must be given as [[disturbances]] tables")
    seen = set()
    for tab in tables:
        agent = tab.get("agent")
        if type(agent) is not int or not (1 <= agent <= nv):
            raise _err("disturbances", f"each entry needs 'agent' in 1..{nv}")
        if agent in seen:
            raise _err("disturbances", f"agent {agent} configured twice")
        seen.add(agent)
        kind = tab.get("kind")
        if kind not in DISTURBANCE_KINDS:
            raise _err(
                "disturbances",
                f"entry for agent {agent}: kind must be one of {', '.join(DISTURBANCE_KINDS)}",
            )
        allowed = _DISTURBANCE_KEYS[kind] | {"agent", "kind"}
        for key in tab:
            if key not in allowed:
                raise _err(
                    "disturbances",
                    f"entry for agent {agent}: key '{key}' not valid for kind '{kind}'",
                )
        kw = {}
        for key in _DISTURBANCE_KEYS[kind]:
            if key in ("source_agent", "source_component"):
                idx = tab.get(key)
                if type(idx) is not int:
                    raise _err(
                        "disturbances",
                        f"entry for agent {agent}: key '{key}' must be an integer",
                    )
                bound = nv if key == "source_agent" else n_states
                if not (1 <= idx <= bound):
                    raise _err(
                        "disturbances",
                        f"entry for agent {agent}: key '{key}' outside 1..{bound}",
                    )
                kw[key] = idx - 1
            elif key in tab:
                if not _is_number(tab[key]):
                    raise _err(
                        "disturbances",
                        f"entry for agent {agent}: key '{key}' must be a number",
                    )
                kw[key] = float(tab[key])
            elif key != "phase":
                raise _err(
                    "disturbances",
                    f"entry for agent {agent}: kind '{kind}' needs key '{key}'",
                )
        try:
            dists[agent - 1] = Disturbance(kind=kind, **kw)
        except ValueError as exc:
            raise _err("disturbances", f"entry for agent {agent}: {exc}") from exc
    return tuple(dists)


def parse_scenario_text(text: str) -> ScenarioFile:
    """Parse scenario file contents into a ScenarioFile."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioFormatError(f"invalid scenario file: {exc}") from exc

    known = {"model", "graph", "protocol", "disturbances", "sim", "output"}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioFormatError(f"unknown section [{sorted(unknown)[0]}]")
    for section in ("model", "graph", "protocol", "sim"):
        if section not in doc:
            raise ScenarioFormatError(f"missing section [{section}]")
        if not isinstance(doc[section], dict):
            raise ScenarioFormatError(f"[{section}] must be a table")

    sec = doc["model"]
    unknown = set(sec) - _SECTION_KEYS["model"]
    if unknown:
        raise _err("model", f"unknown key '{sorted(unknown)[0]}' (allowed: a, b)")
    a = _matrix(sec, "model", "a")
    b = _matrix(sec, "model", "b")
    if a.shape[0] != a.shape[1]:
        raise _err("model", "key 'a' must be square")
    if b.shape[0] != a.shape[0]:
        raise _err("model", f"key 'b' has {b.shape[0]} rows; expected {a.shape[0]}")
    model = AgentModel(a=a, b=b)

    graph, mode = _parse_graph(doc["graph"])
    nv = graph.n_vertices

    sec = doc["protocol"]
    _check_keys(sec, "protocol")
    raw_variant = sec.get("variant")
    try:
        variant = Variant(raw_variant)
    except ValueError:
        valid = ", ".join(v.value for v in Variant)
        raise _err("protocol", f"key 'variant' must be one of: {valid}") from None
    if variant.leader_mode != (mode == "leader"):
        raise _err(
            "protocol",
            f"variant '{variant.value}' does not match [graph] mode \"{mode}\"",
        )
    n_adaptive = nv - 1 if variant.leader_mode else nv
    phi = _parse_phi(sec, variant, n_adaptive)
    if ("gain_seed" in sec) == ("initial_gains" in sec):
        raise _err("protocol", "provide exactly one of 'gain_seed' or 'initial_gains'")
    gain_seed = None
    initial_gains = None
    if "gain_seed" in sec:
        gain_seed = _get_int(sec, "protocol", "gain_seed")
        if gain_seed < 0:
            raise _err("protocol", "key 'gain_seed' must be non-negative")
    else:
        g = _matrix({"initial_gains": [sec["initial_gains"]]}, "protocol", "initial_gains")[0]
        if g.size != n_adaptive:
            raise _err(
                "protocol",
                f"key 'initial_gains' has {g.size} entries; expected {n_adaptive}",
            )
        initial_gains = g

    dists = _parse_disturbances(doc.get("disturbances"), nv, model.n_states)

    sec = doc["sim"]
    _check_keys(sec, "sim")
    if ("x0_seed" in sec) == ("x0" in sec):
        raise _err("sim", "provide exactly one of 'x0_seed' or 'x0'")
    x0 = None
    x0_seed = None
    if "x0_seed" in sec:
        x0_seed = _get_int(sec, "sim", "x0_seed")
        if x0_seed < 0:
            raise _err("sim", "key 'x0_seed' must be non-negative")
    else:
        rows = _matrix(sec, "sim", "x0")
        if rows.shape != (nv, model.n_states):
            raise _err(
                "sim",
                f"key 'x0' must be {nv} rows (one per agent) of {model.n_states} numbers",
            )
        x0 = rows.reshape(-1)
    step_h = _get_number(sec, "sim", "step_h")
    t_end = _get_number(sec, "sim", "t_end")
    record_every = 10
    if "record_every" in sec:
        record_every = _get_int(sec, "sim", "record_every")

    out = OutputSpec()
    if "output" in doc:
        sec = doc["output"]
        _check_keys(sec, "output")
        kw = {}
        for key in ("csv", "report", "err_plot", "gains_plot"):
            if key in sec:
                if not isinstance(sec[key], str) or not sec[key]:
                    raise _err("output", f"key '{key}' must be a non-empty string")
                kw[key] = sec[key]
        if "plots" in sec:
            if not isinstance(sec["plots"], bool):
                raise _err("output", "key 'plots' must be true or false")
            kw["plots"] = sec["plots"]
        out = OutputSpec(**kw)

    return ScenarioFile(
        model=model,
        graph=graph,
        variant=variant,
        phi=phi,
        initial_gains=initial_gains,
        gain_seed=gain_seed,
        disturbances=dists,
        x0=x0,
        x0_seed=x0_seed,
        step_h=step_h,
        t_end=t_end,
        record_every=record_every,
        output=out,
    )


def load_scenario_file(path) -> ScenarioFile:
    """Read and parse a scenario file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario_text(text)


def parse_scenario(path) -> Scenario:
    """Read a scenario file and return the fully validated Scenario.

    Structural problems raise ScenarioFormatError naming the offending
    section and key; graph/mode violations surface with their cause.
    """
    sf = load_scenario_file(path)
    try:
        return sf.build()
    except (GraphStructureError, ValueError) as exc:
        raise ScenarioFormatError(f"[graph] {exc}") from exc


# --- serialization -----------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot format {type(v).__name__}")


def _fmt_rows(m: np.ndarray) -> str:
    rows = ["[" + ", ".join(repr(float(v)) for v in row) + "]" for row in m]
    return "[" + ", ".join(rows) + "]"


def _serialize(sf: ScenarioFile) -> str:
    lines = []
    lines.append("[model]")
    lines.append(f"a = {_fmt_rows(sf.model.a)}")
    lines.append(f"b = {_fmt_rows(sf.model.b)}")
    lines.append("")
    lines.append("[graph]")
    lines.append(f'mode = "{sf.mode}"')
    if sf.variant.leader_mode:
        lines.append("leader = 1")
    lines.append(f"vertices = {sf.graph.n_vertices}")
    w = sf.graph.weights
    edges = [
        f"[{j + 1}, {i + 1}, {repr(float(w[i, j]))}]"
        for i in range(w.shape[0])
        for j in range(w.shape[1])
        if w[i, j] > 0
    ]
    lines.append("edges = [" + ", ".join(edges) + "]")
    lines.append("")
    lines.append("[protocol]")
    lines.append(f'variant = "{sf.variant.value}"')
    phi = sf.phi
    if sf.variant.robust:
        if np.all(phi == phi[0]):
            lines.append(f"phi = {repr(float(phi[0]))}")
        else:
            lines.append("phi = [" + ", ".join(repr(float(v)) for v in phi) + "]")
    if sf.gain_seed is not None:
        lines.append(f"gain_seed = {sf.gain_seed}")
    else:
        lines.append(
            "initial_gains = ["
            + ", ".join(repr(float(v)) for v in sf.initial_gains)
            + "]"
        )
    for i, d in enumerate(sf.disturbances):
        if d.kind == "zero":
            continue
        lines.append("")
        lines.append("[[disturbances]]")
        lines.append(f"agent = {i + 1}")
        lines.append(f'kind = "{d.kind}"')
        lines.append(f"amplitude = {repr(d.amplitude)}")
        if d.kind in ("sine", "cosine"):
            lines.append(f"angular_frequency = {repr(d.angular_frequency)}")
            if d.kind == "sine" and d.phase != 0.0:
                lines.append(f"phase = {repr(d.phase)}")
        elif d.kind == "exp_decay":
            lines.append(f"rate = {repr(d.rate)}")
        elif d.kind == "state_sine":
            lines.append(f"source_agent = {d.source_agent + 1}")
            lines.append(f"source_component = {d.source_component + 1}")
    lines.append("")
    lines.append("[sim]")
    if sf.x0_seed is not None:
        lines.append(f"x0_seed = {sf.x0_seed}")
    else:
        lines.append(f"x0 = {_fmt_rows(sf.x0.reshape(sf.graph.n_vertices, -1))}")
    lines.append(f"step_h = {repr(sf.step_h)}")
    lines.append(f"t_end = {repr(sf.t_end)}")
    lines.append(f"record_every = {sf.record_every}")
    lines.append("")
    lines.append("[output]")
    for key in ("csv", "report", "plots", "err_plot", "gains_plot"):
        lines.append(f"{key} = {_fmt(getattr(sf.output, key))}")
    lines.append("")
    return "\n".join(lines)


def write_scenario(sf: ScenarioFile, path) -> None:
    """Serialize a ScenarioFile to disk; the result parses back equal."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(sf.to_text())
