"""Feedback strategy trees for the conditional pulse nulling receiver.

A strategy assigns a displacement to every click history of the first k
slots (k = 0 .. M-1) and a decision to every complete history. Beliefs are
kept as unnormalized joint probabilities ``p[i] = P(codeword i, history)``,
so the success probability of a strategy is simply the sum over complete
histories of ``max_i p[i]``.

Heap layout is used throughout: the internal node ``j`` has children
``2j+1`` (no click) and ``2j+2`` (click); leaves appear left to right in the
order of the binary outcome record read from the first slot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .detection import IDEAL, DetectionModel, control_index, control_set, slot_tables
from .ensembles import Family, SignalEnsemble

__all__ = [
    "BeliefState",
    "Leaf",
    "Node",
    "StrategyTree",
    "initial_belief",
    "belief_update",
    "map_decision",
    "evaluate_strategy",
    "optimize",
    "exhaustive_search",
    "strategy_controls",
    "constant_tree",
    "direct_detection_tree",
    "export_strategy",
    "import_strategy",
    "EXHAUSTIVE_MAX_SLOTS",
]

FLOOR = 1e-300
EXHAUSTIVE_MAX_SLOTS = 4
# relative margin (times subtree mass) a later control must win by
TIE_RTOL = 1e-13
# largest (belief entries) block solved in one vectorized pass
_BLOCK_LIMIT = 1 << 22
_EXHAUSTIVE_CHUNK = 4096


@dataclass
class BeliefState:
    joint: np.ndarray
    depth: int = 0

    def __post_init__(self):
        self.joint = np.asarray(self.joint, dtype=float)
        if np.any(self.joint < 0):
            raise ValueError("belief entries must be nonnegative")

    @property
    def mass(self) -> float:
        return float(self.joint.sum())


@dataclass
class Leaf:
    decision: int = 0
    joint_prob: float = 0.0
    # total probability of reaching this leaf; known only after evaluation
    mass: float | None = None


@dataclass
class Node:
    beta: float
    no_click: "TreeItem"
    click: "TreeItem"

    def child(self, outcome: int) -> "TreeItem":
        return self.click if outcome else self.no_click


TreeItem = Union[Node, Leaf]


@dataclass
class StrategyTree:
    root: TreeItem
    m_slots: int
    family: Family
    n_bar: float
    p_correct: float | None = field(default=None, compare=False)

    def internal_nodes(self) -> list[Node]:
        """Internal nodes in heap (breadth-first) order."""
        return [n for n in self._level_order() if isinstance(n, Node)]

    def leaves(self) -> list[Leaf]:
        """Leaves ordered by outcome record, no-click branch first."""
        return [n for n in self._level_order() if isinstance(n, Leaf)]

    def betas(self) -> list[float]:
        return [n.beta for n in self.internal_nodes()]

    def depth(self) -> int:
        d, node = 0, self.root
        while isinstance(node, Node):
            node, d = node.no_click, d + 1
        return d

    def check_shape(self) -> None:
        """Raise ``ValueError`` unless the tree is perfect with depth ``m_slots``."""
        def walk(item, d):
            if isinstance(item, Leaf):
                if d != self.m_slots:
                    raise ValueError(f"leaf at depth {d}, expected {self.m_slots}")
                return
            if not isinstance(item, Node):
                raise ValueError(f"unexpected tree item {item!r}")
            if d >= self.m_slots:
                raise ValueError(f"internal node at depth {d} >= m_slots={self.m_slots}")
            walk(item.no_click, d + 1)
            walk(item.click, d + 1)

        walk(self.root, 0)

    def p_error(self) -> float:
        """Error probability summed leaf by leaf (accurate when it is tiny)."""
        leaves = self.leaves()
        if any(leaf.mass is None for leaf in leaves):
            raise ValueError("tree has not been evaluated")
        return float(sum(leaf.mass - leaf.joint_prob for leaf in leaves))

    def leaf_mass_total(self) -> float:
        masses = [leaf.mass for leaf in self.leaves()]
        if any(m is None for m in masses):
            raise ValueError("tree has not been evaluated")
        return float(sum(masses))

    def _level_order(self) -> Iterator[TreeItem]:
        queue = [self.root]
        while queue:
            nxt = []
            for item in queue:
                yield item
                if isinstance(item, Node):
                    nxt.extend((item.no_click, item.click))
            queue = nxt


def initial_belief(ensemble: SignalEnsemble) -> BeliefState:
    return BeliefState(ensemble.prior_array(), 0)


def _floor(a: np.ndarray) -> np.ndarray:
    a[a < FLOOR] = 0.0
    return a


def _outcome_table(ensemble: SignalEnsemble, model: DetectionModel) -> np.ndarray:
    """Outcome probabilities ``T[k, c, o, i]`` for slot k, control c, outcome o."""
    sigma = control_set(ensemble.family, ensemble.amplitude)
    click, no_click = slot_tables(ensemble.amplitudes(), sigma, model)
    return np.stack([no_click, click], axis=2)


def belief_update(
    state: BeliefState,
    beta: float,
    outcome: int,
    slot_index: int | None,
    ensemble: SignalEnsemble,
    model: DetectionModel = IDEAL,
) -> BeliefState:
    """Joint probabilities after measuring slot ``slot_index`` (1-based)."""
    if slot_index is None:
        slot_index = state.depth + 1
    if slot_index != state.depth + 1:
        raise ValueError(f"belief at depth {state.depth} cannot measure slot {slot_index}")
    if slot_index > ensemble.m_slots:
        raise ValueError(f"slot {slot_index} beyond m_slots={ensemble.m_slots}")
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    control_index(beta, ensemble.family, ensemble.amplitude)
    x = ensemble.amplitudes()[:, slot_index - 1] + beta
    p = model.click(x) if outcome else model.no_click(x)
    return BeliefState(_floor(state.joint * p), slot_index)


def map_decision(state: BeliefState | np.ndarray) -> int:
    """Index of the largest joint probability; ties go to the lowest index."""
    joint = state.joint if isinstance(state, BeliefState) else np.asarray(state)
    return int(np.argmax(joint))


def _leaf(joint: np.ndarray) -> Leaf:
    h = int(np.argmax(joint))
    return Leaf(h, float(joint[h]), float(joint.sum()))


def _propagate(table: np.ndarray, priors: np.ndarray, controls: np.ndarray) -> np.ndarray:
    """Leaf joints for a batch of strategies.

    ``controls`` has shape ``(S, 2**M - 1)`` holding control indices in heap
    order; the result has shape ``(S, 2**M, N)``.
    """
    m = table.shape[0]
    s = controls.shape[0]
    beliefs = np.broadcast_to(priors, (s, 1, priors.size)).copy()
    for k in range(m):
        c = controls[:, (1 << k) - 1:(1 << (k + 1)) - 1]
        probs = table[k][c]  # (S, 2**k, 2, N)
        beliefs = _floor((beliefs[:, :, None, :] * probs).reshape(s, 1 << (k + 1), -1))
    return beliefs


def _tree_controls(tree: StrategyTree, ensemble: SignalEnsemble) -> np.ndarray:
    if tree.m_slots != ensemble.m_slots:
        raise ValueError(f"tree has {tree.m_slots} slots, ensemble has {ensemble.m_slots}")
    if Family(tree.family) is not ensemble.family:
        raise ValueError(f"tree family {tree.family} does not match {ensemble.family.value}")
    tree.check_shape()
    idx = [control_index(b, ensemble.family, ensemble.amplitude) for b in tree.betas()]
    return np.asarray(idx, dtype=np.intp)[None, :]


def evaluate_strategy(
    tree: StrategyTree, ensemble: SignalEnsemble, model: DetectionModel = IDEAL
) -> float:
    """Exact success probability of ``tree`` with MAP decisions at the leaves.

    Leaf decisions, joint probabilities and masses are written into the tree.
    """
    controls = _tree_controls(tree, ensemble)
    joints = _propagate(_outcome_table(ensemble, model), ensemble.prior_array(), controls)[0]
    total = 0.0
    for leaf, joint in zip(tree.leaves(), joints):
        new = _leaf(joint)
        leaf.decision, leaf.joint_prob, leaf.mass = new.decision, new.joint_prob, new.mass
        total += new.joint_prob
    tree.p_correct = total
    return total


def _tree_from_heap(
    betas, leaves: list[Leaf], m_slots: int, family: Family, n_bar: float
) -> StrategyTree:
    n_internal = (1 << m_slots) - 1

    def build(j):
        if j >= n_internal:
            return leaves[j - n_internal]
        return Node(float(betas[j]), build(2 * j + 1), build(2 * j + 2))

    return StrategyTree(build(0), m_slots, Family(family), n_bar)


def constant_tree(ensemble: SignalEnsemble, beta: float) -> StrategyTree:
    """Tree applying the same control in every slot regardless of history."""
    control_index(beta, ensemble.family, ensemble.amplitude)
    m = ensemble.m_slots
    leaves = [Leaf() for _ in range(1 << m)]
    return _tree_from_heap([beta] * ((1 << m) - 1), leaves, m, ensemble.family, ensemble.n_bar)


def direct_detection_tree(ensemble: SignalEnsemble) -> StrategyTree:
    if ensemble.family is not Family.OOK:
        raise ValueError("direct detection needs an OOK-like ensemble")
    return constant_tree(ensemble, 0.0)


def _solve_block(table, belief, k, sigma):
    """Bellman recursion for the subtree below ``belief`` at depth ``k``.

    All ``4**R`` (control, outcome) histories of the remaining ``R`` slots
    are expanded at once, then values are folded back level by level: the
    value of a control is the sum of its two outcome children, and each
    node keeps the better control.
    """
    m = table.shape[0]
    r_levels = m - k
    levels = [belief[None, :]]
    for r in range(r_levels):
        nxt = levels[-1][:, None, None, :] * table[k + r][None]
        levels.append(_floor(nxt.reshape(-1, belief.size)))

    value = levels[-1].max(axis=1)
    choices = [None] * r_levels
    for r in reversed(range(r_levels)):
        q = value.reshape(-1, 2, 2)
        q = q[:, :, 0] + q[:, :, 1]
        margin = TIE_RTOL * levels[r].sum(axis=1)
        pick = (q[:, 1] > q[:, 0] + margin).astype(np.intp)
        choices[r] = pick
        value = q[np.arange(q.shape[0]), pick]

    def build(r, idx):
        if r == r_levels:
            return _leaf(levels[r][idx])
        c = int(choices[r][idx])
        base = idx * 4 + c * 2
        return Node(sigma[c], build(r + 1, base), build(r + 1, base + 1))

    return float(value[0]), build(0, 0)


def _solve(table, belief, k, sigma):
    m = table.shape[0]
    if k == m:
        leaf = _leaf(belief)
        return leaf.joint_prob, leaf
    if (4 ** (m - k)) * belief.size <= _BLOCK_LIMIT:
        return _solve_block(table, belief, k, sigma)

    best = None
    margin = TIE_RTOL * float(belief.sum())
    for c in range(2):
        v0, t0 = _solve(table, _floor(belief * table[k, c, 0]), k + 1, sigma)
        v1, t1 = _solve(table, _floor(belief * table[k, c, 1]), k + 1, sigma)
        q = v0 + v1
        if best is None or q > best[0] + margin:
            best = (q, Node(sigma[c], t0, t1))
    return best


def optimize(
    ensemble: SignalEnsemble, model: DetectionModel = IDEAL
) -> tuple[StrategyTree, float]:
    """Optimal feedback strategy by the reward-to-go recursion.

    Every node keeps whichever control maximizes the summed value of its
    two outcome subtrees; at full depth the value is ``max_i p[i]``. Ties
    go to the first control of the family's control set.
    """
    sigma = control_set(ensemble.family, ensemble.amplitude)
    table = _outcome_table(ensemble, model)
    value, root = _solve(table, ensemble.prior_array(), 0, sigma)
    tree = StrategyTree(root, ensemble.m_slots, ensemble.family, ensemble.n_bar, value)
    return tree, value


def strategy_controls(m_slots: int) -> np.ndarray:
    """Every control assignment to the ``2**M - 1`` internal nodes.

    Row ``s`` is the binary expansion of ``s`` with the root as most
    significant bit, so row 0 uses the first control everywhere.
    """
    if m_slots > EXHAUSTIVE_MAX_SLOTS:
        raise ValueError(
            f"exhaustive enumeration limited to m_slots <= {EXHAUSTIVE_MAX_SLOTS} "
            f"(m_slots={m_slots} would need 2**{(1 << m_slots) - 1} strategies)"
        )
    n_internal = (1 << m_slots) - 1
    codes = np.arange(1 << n_internal, dtype=np.int64)[:, None]
    shifts = np.arange(n_internal - 1, -1, -1, dtype=np.int64)[None, :]
    return ((codes >> shifts) & 1).astype(np.intp)


def exhaustive_search(
    ensemble: SignalEnsemble, model: DetectionModel = IDEAL
) -> tuple[StrategyTree, float]:
    """Best strategy by brute force over all control assignments (M <= 4)."""
    all_controls = strategy_controls(ensemble.m_slots)
    table = _outcome_table(ensemble, model)
    priors = ensemble.prior_array()
    scores = np.empty(all_controls.shape[0])
    for start in range(0, all_controls.shape[0], _EXHAUSTIVE_CHUNK):
        block = all_controls[start:start + _EXHAUSTIVE_CHUNK]
        joints = _propagate(table, priors, block)
        scores[start:start + block.shape[0]] = joints.max(axis=2).sum(axis=1)

    best = int(np.argmax(scores))
    sigma = control_set(ensemble.family, ensemble.amplitude)
    betas = [sigma[c] for c in all_controls[best]]
    leaves = [Leaf() for _ in range(1 << ensemble.m_slots)]
    tree = _tree_from_heap(betas, leaves, ensemble.m_slots, ensemble.family, ensemble.n_bar)
    p_c = evaluate_strategy(tree, ensemble, model)
    return tree, p_c


# -- JSON interchange ---------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g")


def _dump(item: TreeItem, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(item, Leaf):
        return (
            f'{{\n{inner}"decision": {int(item.decision)},\n'
            f'{inner}"joint_prob": {_num(item.joint_prob)}\n{pad}}}'
        )
    return (
        f'{{\n{inner}"beta": {_num(item.beta)},\n'
        f'{inner}"no_click": {_dump(item.no_click, indent + 1)},\n'
        f'{inner}"click": {_dump(item.click, indent + 1)}\n{pad}}}'
    )


def export_strategy(tree: StrategyTree) -> str:
    """Serialize a strategy tree to JSON with 17 significant digits."""
    family = Family(tree.family).value
    return (
        "{\n"
        f'  "m_slots": {int(tree.m_slots)},\n'
        f'  "family": "{family}",\n'
        f'  "n_bar": {_num(tree.n_bar)},\n'
        f'  "root": {_dump(tree.root, 1)}\n'
        "}\n"
    )


def _load(obj) -> TreeItem:
    if not isinstance(obj, dict):
        raise ValueError(f"expected an object in strategy tree, got {obj!r}")
    if "decision" in obj:
        return Leaf(int(obj["decision"]), float(obj["joint_prob"]))
    try:
        return Node(float(obj["beta"]), _load(obj["no_click"]), _load(obj["click"]))
    except KeyError as exc:
        raise ValueError(f"strategy node missing key {exc}") from None


def import_strategy(text: str) -> StrategyTree:
    data = json.loads(text)
    try:
        tree = StrategyTree(
            _load(data["root"]), int(data["m_slots"]), Family(data["family"]), float(data["n_bar"])
        )
    except KeyError as exc:
        raise ValueError(f"strategy document missing key {exc}") from None
    tree.check_shape()
    return tree

