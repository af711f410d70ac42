"""
The feed-forward network of 2x2 crossing unitaries.

Amplitudes live on level lines, (A, m) and (C, n). Each crossing (m, n)
mixes the two lines it joins; crossings at the same time touch disjoint
lines and form one column. A state is evolved column by column, either
coherently with crossing phases or incoherently with probabilities.
"""

# =============================================================================

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from qknh.errors import NormDrift, WindowOverflow
from qknh.labels import LineLabel, NodeIndex
from qknh.lznet.lattice import DEFAULT_EPSILON, SyntheticLattice
from qknh.lznet.phases import PhaseSource
from qknh.semiclassics import level_slope
from qknh.spectrum import CrossingNode
from qknh.utils import Branch, PhaseMode, check_probability, thread_count

# =============================================================================

__all__ = (
    "Column",
    "Network",
    "NetworkState",
    "EvolutionResult",
    "RealizationStats",
    "crossing_unitary",
    "norm_limit",
    "schedule",
    "evolve_unitary",
    "evolve_incoherent",
    "sweep_realizations",
    "final_distribution_rows",
)

# =============================================================================

logger = logging.getLogger(__name__)

OVERFLOW_TOL = 1e-8
# allowed norm drift per unitary applied
NORM_TOL = 1e-14
SETTLED_TOL = 1e-6
REACHABLE_TOL = 1e-12
# realizations evolved together in one batch
CHUNK = 64

_TIME_DIGITS = 9

_BELOW, _ZONE, _ABOVE = 0, 1, 2

# =============================================================================


def crossing_unitary(P: float, a: float, b: float, c: float) -> np.ndarray:
    """Returns U = exp(-i a) exp(-i b sz) W exp(-i c sz) in the basis
    (|A_m>, |C_n>), with W = [[sqrt(P), sqrt(1-P)], [-sqrt(1-P), sqrt(P)]].
    """
    check_probability(P=P)
    s, q = math.sqrt(P), math.sqrt(1 - P)
    return np.array(
        [
            [np.exp(-1j * (a + b + c)) * s, np.exp(-1j * (a + b - c)) * q],
            [-np.exp(-1j * (a - b + c)) * q, np.exp(-1j * (a - b - c)) * s],
        ]
    )


def _unitary_entries(neg_log_p, a, b, c):
    """Vectorized crossing unitary entries from -ln P."""
    s = np.exp(-0.5 * neg_log_p)
    q = np.sqrt(-np.expm1(-neg_log_p))
    return (
        np.exp(-1j * (a + b + c)) * s,
        np.exp(-1j * (a + b - c)) * q,
        -np.exp(-1j * (a - b + c)) * q,
        np.exp(-1j * (a - b - c)) * s,
    )


# =============================================================================


@dataclass(frozen=True)
class Column:
    """Crossings that happen at the same time, on disjoint lines.

    `m` and `n` hold the labels of each crossing; `neg_log_p` holds
    -ln P for each.
    """

    time: float
    m: np.ndarray
    n: np.ndarray
    neg_log_p: np.ndarray

    def __len__(self):
        return len(self.m)

    @property
    def nodes(self) -> List[NodeIndex]:
        """The crossings of this column."""
        return [NodeIndex(mi, ni) for mi, ni in zip(self.m, self.n)]

    def reordered(self, order: Sequence[int]) -> "Column":
        """Returns the same column with its crossings in another order."""
        order = np.asarray(order)
        return Column(
            self.time, self.m[order], self.n[order], self.neg_log_p[order]
        )


def _group_columns(m, n, times, neg_log_p) -> List[Column]:
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    times = np.asarray(times, dtype=float)
    neg_log_p = np.asarray(neg_log_p, dtype=float)
    keys = np.round(times, _TIME_DIGITS)
    order = np.lexsort((m, keys))
    columns = []
    if len(order) == 0:
        return columns
    sorted_keys = keys[order]
    breaks = np.flatnonzero(np.diff(sorted_keys)) + 1
    for idx in np.split(order, breaks):
        columns.append(
            Column(
                time=float(times[idx[0]]),
                m=m[idx],
                n=n[idx],
                neg_log_p=neg_log_p[idx],
            )
        )
    return columns


def schedule(source) -> List[Column]:
    """Returns the crossings of a lattice or a node list as columns in
    time order.

    For a synthetic lattice the crossing (m, n) happens at lattice time
    r n - m. Crossing nodes are ordered by lambda.
    """
    if isinstance(source, SyntheticLattice):
        m, n = np.meshgrid(source.m_range(), source.n_range(), indexing="ij")
        m, n = m.ravel(), n.ravel()
        return _group_columns(m, n, source.time(m, n), source.neg_log_p(m, n))
    nodes = list(source)
    return _group_columns(
        [node.m for node in nodes],
        [node.n for node in nodes],
        [node.lam for node in nodes],
        [node.neg_log_p for node in nodes],
    )


# =============================================================================


class Network:
    """A scheduled network with line bookkeeping.

    Properties:
        columns (List[Column]): The columns in time order.
        m_labels (np.ndarray): The A line labels.
        n_labels (np.ndarray): The C line labels.
        epsilon (float): The zone threshold.
        start (float): The time from which evolution starts.

    Methods:
        index_of(line) -> int
            Returns the position of a line in its state array.
        column_positions(k) -> Tuple[np.ndarray, np.ndarray]
            Returns the label positions of the crossings in column k.
        line_zones(k) -> Tuple[np.ndarray, np.ndarray]
            Returns the zone codes of the A and C lines after k columns.
        energy_keys(time) -> Tuple[np.ndarray, np.ndarray]
            Returns keys that order the lines by energy at `time`.
    """

    def __init__(
        self,
        columns: Sequence[Column],
        m_labels,
        n_labels,
        epsilon: float = DEFAULT_EPSILON,
        start: float = -math.inf,
        energy_keys: Optional[Callable] = None,
    ):
        if not 0 < epsilon < 0.5:
            raise ValueError(
                f"`epsilon` must be within (0, 1/2) (got {epsilon})"
            )
        self._m_labels = np.asarray(m_labels, dtype=np.int64)
        self._n_labels = np.asarray(n_labels, dtype=np.int64)
        self._m_pos = {int(m): i for i, m in enumerate(self._m_labels)}
        self._n_pos = {int(n): i for i, n in enumerate(self._n_labels)}
        self._epsilon = float(epsilon)
        self._start = float(start)
        self._energy_keys = energy_keys
        self._all_columns = list(columns)
        self._columns = [
            col
            for col in self._all_columns
            if col.time >= self._start - 10.0**-_TIME_DIGITS
        ]
        # positions of each column's lines in the state arrays
        self._col_index = [
            (
                np.array([self._m_pos[int(m)] for m in col.m], dtype=np.int64),
                np.array([self._n_pos[int(n)] for n in col.n], dtype=np.int64),
            )
            for col in self._columns
        ]
        self._zones_a, self._zones_c = self._line_zone_table()

    @classmethod
    def from_lattice(cls, lat: SyntheticLattice) -> "Network":
        """Builds the network of a synthetic lattice."""
        r = lat.slope_ratio

        def energy_keys(time):
            # A_m sits above C_n once their crossing r n - m has passed
            return (lat.m_range() + time) / r, lat.n_range().astype(float)

        return cls(
            schedule(lat),
            lat.m_range(),
            lat.n_range(),
            lat.epsilon,
            lat.start,
            energy_keys,
        )

    @classmethod
    def from_nodes(
        cls,
        nodes: Sequence[CrossingNode],
        epsilon: float = DEFAULT_EPSILON,
        start: float = -math.inf,
    ) -> "Network":
        """Builds the network of physical crossing nodes.

        Time is lambda. Line energies between crossings are extended
        along the branch level slopes.
        """
        nodes = list(nodes)
        if not nodes:
            raise ValueError("`nodes` must not be empty")
        m_labels = np.arange(
            min(node.m for node in nodes), max(node.m for node in nodes) + 1
        )
        n_labels = np.arange(
            min(node.n for node in nodes), max(node.n for node in nodes) + 1
        )
        anchors: Dict[LineLabel, List[Tuple[float, float, float]]] = {}
        for node in nodes:
            for branch, label in ((Branch.A, node.m), (Branch.C, node.n)):
                slope = level_slope(node.table, branch)
                anchors.setdefault(LineLabel(branch, label), []).append(
                    (node.lam, node.E, slope)
                )
        for points in anchors.values():
            points.sort()

        def line_energy(branch, label, lam):
            points = anchors.get(LineLabel(branch, label))
            if not points:
                return math.nan
            before = [p for p in points if p[0] <= lam]
            ref = before[-1] if before else points[0]
            return ref[1] + ref[2] * (lam - ref[0])

        def energy_keys(time):
            return (
                np.array([line_energy(Branch.A, m, time) for m in m_labels]),
                np.array([line_energy(Branch.C, n, time) for n in n_labels]),
            )

        return cls(
            schedule(nodes), m_labels, n_labels, epsilon, start, energy_keys
        )

    @property
    def columns(self) -> List[Column]:
        """The columns from the start time on, in time order."""
        return self._columns

    @property
    def m_labels(self) -> np.ndarray:
        """The A line labels."""
        return self._m_labels

    @property
    def n_labels(self) -> np.ndarray:
        """The C line labels."""
        return self._n_labels

    @property
    def epsilon(self) -> float:
        """The zone threshold."""
        return self._epsilon

    @property
    def start(self) -> float:
        """The time from which evolution starts."""
        return self._start

    def with_columns(self, columns: Sequence[Column]) -> "Network":
        """Returns a network over the same lines with other columns."""
        return Network(
            columns,
            self._m_labels,
            self._n_labels,
            self._epsilon,
            self._start,
            self._energy_keys,
        )

    def index_of(self, line) -> int:
        """Returns the position of a line in its state array."""
        line = LineLabel.of(line)
        table = self._m_pos if line.branch is Branch.A else self._n_pos
        try:
            return table[line.index]
        except KeyError:
            raise ValueError(f"line {line} is outside the window") from None

    def _zone_codes(self, neg_log_p: np.ndarray) -> np.ndarray:
        below = -math.log1p(-self._epsilon)
        above = -math.log(self._epsilon)
        codes = np.full(neg_log_p.shape, _ZONE, dtype=np.int8)
        codes[neg_log_p < below] = _BELOW
        codes[neg_log_p > above] = _ABOVE
        # lines without any crossing count as below
        codes[np.isnan(neg_log_p)] = _BELOW
        return codes

    def _line_zone_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Zone codes of every line after k columns, k = 0..K.

        A line is classified by its next crossing, or by its last one
        when none is left.
        """
        num = len(self._columns)
        tables = []
        sizes = (len(self._m_labels), len(self._n_labels))
        for which, size in enumerate(sizes):
            cross = np.full((size, num), np.nan)
            for k, col in enumerate(self._columns):
                cross[self._col_index[k][which], k] = col.neg_log_p
            last = np.full(size, np.nan)
            for k in range(num):
                hit = ~np.isnan(cross[:, k])
                last[hit] = cross[hit, k]
            upcoming = np.empty((num + 1, size))
            upcoming[num] = last
            for k in range(num - 1, -1, -1):
                hit = ~np.isnan(cross[:, k])
                upcoming[k] = np.where(hit, cross[:, k], upcoming[k + 1])
            tables.append(self._zone_codes(upcoming))
        return tables[0], tables[1]

    def column_positions(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Returns where the lines of column k sit in the state arrays."""
        return self._col_index[k]

    def line_zones(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        return self._zones_a[k], self._zones_c[k]

    def energy_keys(self, time: float) -> Tuple[np.ndarray, np.ndarray]:
        if self._energy_keys is None:
            raise ValueError("this network has no line energies")
        return self._energy_keys(time)


def _as_network(source) -> Network:
    if isinstance(source, Network):
        return source
    if isinstance(source, SyntheticLattice):
        return Network.from_lattice(source)
    return Network.from_nodes(source)


# =============================================================================


@dataclass(frozen=True)
class NetworkState:
    """Probability summary after n_c columns.

    p_minus, p_plus, and p_zone are the probabilities below, above, and
    inside the separatrix zone.
    """

    n_c: int
    time: float
    p_minus: float
    p_plus: float
    p_zone: float


@dataclass(frozen=True)
class EvolutionResult:
    """The outcome of evolving an ensemble of initial A lines.

    Trajectory arrays have one row per recorded step (n_c = 0, 1, ...)
    and one column per realization. Final probabilities are per
    realization, per initial line, per line.
    """

    network: Network
    initial: Tuple[int, ...]
    realizations: Tuple[int, ...]
    n_c: np.ndarray
    times: np.ndarray
    p_minus: np.ndarray
    p_plus: np.ndarray
    p_zone: np.ndarray
    final_a: np.ndarray
    final_c: np.ndarray
    amplitudes: Optional[Tuple[np.ndarray, np.ndarray]] = None
    line_history: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def end_time(self) -> float:
        """The time of the last applied column."""
        return float(self.times[-1])

    def final_p_minus(self) -> np.ndarray:
        """Returns the final p_minus of each realization."""
        return self.p_minus[-1]

    def final_p_plus(self) -> np.ndarray:
        """Returns the final p_plus of each realization."""
        return self.p_plus[-1]

    def trajectory(self, realization: int = 0) -> List[NetworkState]:
        """Returns the summaries of one realization, by position."""
        return [
            NetworkState(
                n_c=int(self.n_c[i]),
                time=float(self.times[i]),
                p_minus=float(self.p_minus[i, realization]),
                p_plus=float(self.p_plus[i, realization]),
                p_zone=float(self.p_zone[i, realization]),
            )
            for i in range(len(self.n_c))
        ]

    def distribution(self) -> Tuple[np.ndarray, np.ndarray]:
        """Returns the final line probabilities of each initial line,
        averaged over realizations.
        """
        return self.final_a.mean(axis=0), self.final_c.mean(axis=0)

    def line_probability(self, line) -> float:
        """Returns the ensemble probability of a line at the end."""
        line = LineLabel.of(line)
        pos = self.network.index_of(line)
        table = self.final_a if line.branch is Branch.A else self.final_c
        return float(table[:, :, pos].mean())


# =============================================================================


def _initial_positions(network: Network, initial) -> Tuple[int, ...]:
    initial = tuple(int(m) for m in initial)
    if not initial:
        raise ValueError("`initial` must name at least one A line")
    for m in initial:
        network.index_of(LineLabel(Branch.A, m))
    return initial


def _summarize(network: Network, k: int, prob_a, prob_c):
    """Returns (p_minus, p_plus, p_zone, a_below) per realization."""
    zones_a, zones_c = network.line_zones(k)
    # average over initial lines, sum over lines
    mean_a = prob_a.mean(axis=1)
    mean_c = prob_c.mean(axis=1)
    out = []
    for code in (_BELOW, _ABOVE, _ZONE):
        out.append(
            mean_a[:, zones_a == code].sum(axis=1)
            + mean_c[:, zones_c == code].sum(axis=1)
        )
    out.append(mean_a[:, zones_a == _BELOW].sum(axis=1))
    return out


def _check_edges(network: Network, prob_a, prob_c, k: int):
    for name, prob, labels, branch in (
        ("A", prob_a, network.m_labels, Branch.A),
        ("C", prob_c, network.n_labels, Branch.C),
    ):
        for pos in (0, len(labels) - 1):
            worst = float(prob[:, :, pos].max())
            if worst > OVERFLOW_TOL:
                raise WindowOverflow(
                    f"probability {worst:.3g} reached the {name} window "
                    f"edge {LineLabel(branch, labels[pos])} after {k} "
                    "columns"
                )


def norm_limit(applied: int, size: int) -> float:
    """Largest norm drift allowed after `applied` unitaries on `size`
    lines. The second term covers rounding in the sum itself.
    """
    return NORM_TOL * applied + size * float(np.finfo(float).eps)


def _check_norm(prob_a, prob_c, applied: int, k: int):
    norms = prob_a.sum(axis=2) + prob_c.sum(axis=2)
    drift = float(np.max(np.abs(norms - 1)))
    limit = norm_limit(applied, prob_a.shape[2] + prob_c.shape[2])
    if drift > limit:
        raise NormDrift(
            f"norm drifted by {drift:.3g} after {k} columns "
            f"({applied} unitaries, limit {limit:.3g})"
        )


def _evolve(
    network: Network,
    initial: Tuple[int, ...],
    n_c_max: int,
    phases: Optional[PhaseSource],
    realizations: Tuple[int, ...],
    record_lines: bool = False,
) -> EvolutionResult:
    coherent = phases is not None
    num_r, num_m = len(realizations), len(initial)
    dtype = complex if coherent else float
    state_a = np.zeros((num_r, num_m, len(network.m_labels)), dtype=dtype)
    state_c = np.zeros((num_r, num_m, len(network.n_labels)), dtype=dtype)
    for i, m in enumerate(initial):
        state_a[:, i, network.index_of(LineLabel(Branch.A, m))] = 1
    r_arr = np.asarray(realizations, dtype=np.int64)[:, None]

    def probabilities():
        if coherent:
            return np.abs(state_a) ** 2, np.abs(state_c) ** 2
        return state_a, state_c

    columns = network.columns
    prob_a, prob_c = probabilities()
    p_minus, p_plus, p_zone, _ = _summarize(network, 0, prob_a, prob_c)
    rows = [(0, columns[0].time if columns else network.start)]
    traj = [(p_minus, p_plus, p_zone)]
    history = [(prob_a.mean(axis=(0, 1)), prob_c.mean(axis=(0, 1)))]

    steps = min(n_c_max, len(columns))
    applied = 0
    for k in range(steps):
        col = columns[k]
        applied += len(col)
        ia, ic = network.column_positions(k)
        old_a = state_a[:, :, ia]
        old_c = state_c[:, :, ic]
        if coherent:
            a, b, c = phases.phases(r_arr, col.m[None, :], col.n[None, :])
            u00, u01, u10, u11 = (
                u[:, None, :]
                for u in _unitary_entries(col.neg_log_p[None, :], a, b, c)
            )
        else:
            u00 = u11 = np.exp(-col.neg_log_p)
            u01 = u10 = -np.expm1(-col.neg_log_p)
        state_a[:, :, ia] = u00 * old_a + u01 * old_c
        state_c[:, :, ic] = u10 * old_a + u11 * old_c

        prob_a, prob_c = probabilities()
        if coherent:
            _check_norm(prob_a, prob_c, applied, k + 1)
        _check_edges(network, prob_a, prob_c, k + 1)
        p_minus, p_plus, p_zone, a_below = _summarize(
            network, k + 1, prob_a, prob_c
        )
        rows.append((k + 1, col.time))
        traj.append((p_minus, p_plus, p_zone))
        if record_lines:
            history.append(
                (prob_a.mean(axis=(0, 1)), prob_c.mean(axis=(0, 1)))
            )
        if p_zone.max() < SETTLED_TOL and a_below.max() < SETTLED_TOL:
            logger.info(
                "evolution settled after %d of %d columns", k + 1, n_c_max
            )
            break

    traj = np.array(traj)
    return EvolutionResult(
        network=network,
        initial=initial,
        realizations=tuple(int(r) for r in realizations),
        n_c=np.array([row[0] for row in rows]),
        times=np.array([row[1] for row in rows], dtype=float),
        p_minus=traj[:, 0, :],
        p_plus=traj[:, 1, :],
        p_zone=traj[:, 2, :],
        final_a=prob_a,
        final_c=prob_c,
        amplitudes=(state_a, state_c) if coherent else None,
        line_history=(
            (
                np.array([h[0] for h in history]),
                np.array([h[1] for h in history]),
            )
            if record_lines
            else None
        ),
    )


def evolve_unitary(
    source: Union[SyntheticLattice, Network, Sequence[CrossingNode]],
    initial: Sequence[int],
    phases: PhaseSource,
    n_c_max: int,
    realization: int = 0,
) -> EvolutionResult:
    """Evolves each initial A line as a pure state through the network.

    Probabilities are averaged over the initial lines, a microcanonical
    mixture. Evolution stops after `n_c_max` columns, or earlier once
    the zone is empty and no probability is left on A lines below it.

    Raises:
        WindowOverflow: If probability reaches a window edge.
        NormDrift: If the total probability drifts from 1 by more
            than `NORM_TOL` per unitary applied, checked per column.
    """
    network = _as_network(source)
    initial = _initial_positions(network, initial)
    return _evolve(network, initial, n_c_max, phases, (realization,))


def evolve_incoherent(
    source: Union[SyntheticLattice, Network, Sequence[CrossingNode]],
    initial: Sequence[int],
    n_c_max: int,
    record_lines: bool = False,
) -> EvolutionResult:
    """Propagates line probabilities with weights (P, 1 - P).

    Raises:
        WindowOverflow: If probability reaches a window edge.
    """
    network = _as_network(source)
    initial = _initial_positions(network, initial)
    return _evolve(network, initial, n_c_max, None, (0,), record_lines)


# =============================================================================


@dataclass(frozen=True)
class RealizationStats:
    """Final p_minus over many random-phase realizations."""

    finals: np.ndarray
    mean: float
    std: float
    stderr: float
    min: float
    max: float
    incoherent_p_minus: float
    coherent: Tuple[EvolutionResult, ...]
    incoherent: EvolutionResult

    def to_dict(self) -> dict:
        """Returns the statistics as a JSON-ready dict."""
        return {
            "realizations": len(self.finals),
            "mean_p_minus": self.mean,
            "std_p_minus": self.std,
            "stderr_p_minus": self.stderr,
            "min_p_minus": self.min,
            "max_p_minus": self.max,
            "incoherent_p_minus": self.incoherent_p_minus,
        }


def sweep_realizations(
    source: Union[SyntheticLattice, Network, Sequence[CrossingNode]],
    initial: Sequence[int],
    R: int,
    seed: int,
    n_c_max: int,
    workers: Optional[int] = None,
) -> RealizationStats:
    """Evolves R random-phase realizations and the incoherent reference.

    Realizations are evolved in batches on a thread pool of at most
    `workers` threads (default from QKNH_THREADS). Phases depend only on
    (seed, realization, m, n), so results do not depend on batching.
    """
    if R < 2:
        raise ValueError(f"`R` must be at least 2 (got {R})")
    network = _as_network(source)
    initial = _initial_positions(network, initial)
    phases = PhaseSource(seed, PhaseMode.RANDOM)
    if workers is None:
        workers = thread_count()
    batches = [
        tuple(range(lo, min(lo + CHUNK, R))) for lo in range(0, R, CHUNK)
    ]

    def run(batch):
        return _evolve(network, initial, n_c_max, phases, batch)

    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            coherent = tuple(executor.map(run, batches))
    else:
        coherent = tuple(run(batch) for batch in batches)

    finals = np.concatenate([res.final_p_minus() for res in coherent])
    incoherent = _evolve(network, initial, n_c_max, None, (0,))
    std = float(np.std(finals, ddof=1))
    return RealizationStats(
        finals=finals,
        mean=float(np.mean(finals)),
        std=std,
        stderr=std / math.sqrt(R),
        min=float(np.min(finals)),
        max=float(np.max(finals)),
        incoherent_p_minus=float(incoherent.final_p_minus()[0]),
        coherent=coherent,
        incoherent=incoherent,
    )


# =============================================================================


def final_distribution_rows(
    result: EvolutionResult,
) -> List[Tuple[int, int, float]]:
    """Returns (initial_index, final_index, probability) rows.

    Initial lines are numbered 1..M from the lowest. Final lines are
    numbered in energy order at the end time, with 1 for the lowest line
    that any initial line reaches.
    """
    network = result.network
    # a hair past the last column, so crossings that just happened count
    keys_a, keys_c = network.energy_keys(result.end_time + 1e-6)
    dist_a, dist_c = result.distribution()
    keys = np.concatenate((keys_a, keys_c))
    dist = np.concatenate((dist_a, dist_c), axis=1)
    order = np.argsort(keys, kind="stable")
    dist = dist[:, order]
    reached = np.flatnonzero(dist.max(axis=0) > REACHABLE_TOL)
    if len(reached) == 0:
        return []
    lo, hi = reached[0], reached[-1]
    rows = []
    ranks = np.argsort(result.initial, kind="stable")
    for number, row in enumerate(ranks, start=1):
        for pos in range(lo, hi + 1):
            rows.append((number, int(pos - lo + 1), float(dist[row, pos])))
    return rows
