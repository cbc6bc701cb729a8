"""Load-redistribution failure dynamics.

Every node starts with load 1 and capacity equal to the tolerance
parameter. Failures happen in synchronous rounds: all currently overloaded
nodes (or, in round 0, all attacked nodes) fail together, and each failing
node's entire current load is split equally among its neighbors that are
neither failed nor failing in the same round. Load with no eligible
recipient leaves the system and is tracked separately.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterDomainError


@dataclass
class CascadeResult:
    """Outcome of one cascade run.

    stage_failures[0] is the attacked-node count; entries 1.. are the
    failure counts of the successive redistribution rounds.
    """

    outside_failures: int
    outside_total: int
    stage_failures: list
    lost_load: float
    failed_mask: np.ndarray
    loads: np.ndarray
    trace_lines: list = field(default_factory=list)

    @property
    def failure_ratio(self):
        return failure_ratio(self)

    @property
    def rounds(self):
        return len(self.stage_failures) - 1


def failure_ratio(result):
    """Failed nodes outside the attack over all nodes outside it.

    Defined as 0 when there are no outside nodes, so averages over graph
    realizations stay well-defined.
    """
    if result.outside_total == 0:
        return 0.0
    return result.outside_failures / result.outside_total


def apply_attack(graph, attack_radius):
    """Ids of the nodes strictly inside the attack disk.

    Nodes on the boundary circle itself survive the attack.
    """
    return np.nonzero(graph.radii() < attack_radius)[0]


def _flat_neighbors(graph, failing):
    """Concatenated neighbor lists of `failing` plus their owner index."""
    starts = graph.indptr[failing]
    deg = graph.indptr[failing + 1] - starts
    total = int(deg.sum())
    if total == 0:
        return (
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            deg,
        )
    flat = np.arange(total, dtype=np.int64)
    flat += np.repeat(starts - np.concatenate(([0], np.cumsum(deg)[:-1])), deg)
    owner = np.repeat(np.arange(failing.size, dtype=np.int64), deg)
    return graph.indices[flat], owner, deg


def redistribute(graph, loads, alive, failing):
    """Move the full loads of `failing` onto their eligible neighbors.

    Eligible means alive and not in `failing`. Mutates `loads` and `alive`;
    returns the amount of load that had no recipient.
    """
    if failing.size == 0:
        return 0.0
    is_failing = np.zeros(graph.node_count, dtype=bool)
    is_failing[failing] = True
    nbr, owner, deg = _flat_neighbors(graph, failing)
    eligible = alive[nbr] & ~is_failing[nbr]
    counts = np.bincount(owner, weights=eligible, minlength=failing.size)
    shed = loads[failing]
    lost = float(shed[counts == 0].sum())
    share = np.divide(shed, counts, out=np.zeros_like(shed), where=counts > 0)
    np.add.at(loads, nbr[eligible], np.repeat(share, deg)[eligible])
    loads[failing] = 0.0
    alive[failing] = False
    return lost


def run_cascade(graph, attacked, tolerance, *, record_trace=False):
    """Run the synchronous cascade to termination.

    `attacked` is the round-0 failure set (ids); `tolerance` is the shared
    capacity. A node fails when its load strictly exceeds the tolerance.
    """
    if tolerance < 1:
        raise ParameterDomainError(f"tolerance must be >= 1, got {tolerance}")
    n = graph.node_count
    attacked = np.asarray(sorted(int(a) for a in attacked), dtype=np.int64)
    loads = np.ones(n, dtype=np.float64)
    alive = np.ones(n, dtype=bool)
    stage_failures = [int(attacked.size)]
    trace = []
    lost = 0.0
    failing = attacked
    round_idx = 0
    while failing.size:
        if record_trace:
            for i in failing:
                trace.append(f"round {round_idx} node {int(i)} load {loads[i]:.17g}")
        lost += redistribute(graph, loads, alive, failing)
        failing = np.nonzero(alive & (loads > tolerance))[0]
        if failing.size:
            stage_failures.append(int(failing.size))
        round_idx += 1
    failed_mask = ~alive
    outside_total = n - int(attacked.size)
    outside_failures = int(failed_mask.sum()) - int(attacked.size)
    return CascadeResult(
        outside_failures=outside_failures,
        outside_total=outside_total,
        stage_failures=stage_failures,
        lost_load=lost,
        failed_mask=failed_mask,
        loads=loads,
        trace_lines=trace,
    )


def first_round_loads(graph, attacked):
    """Load received by each node in the very first redistribution.

    Returns an array over all nodes; attacked nodes read 0. This is the
    quantity whose mean/variance the first-ring load statistics predict.
    """
    n = graph.node_count
    attacked = np.asarray(sorted(int(a) for a in attacked), dtype=np.int64)
    loads = np.ones(n, dtype=np.float64)
    alive = np.ones(n, dtype=bool)
    redistribute(graph, loads, alive, attacked)
    received = loads - 1.0
    received[attacked] = 0.0
    return received
