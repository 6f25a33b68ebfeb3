"""
Percolation Module for Colourspace

s-upward percolation on complete rooted trees: a node is active when at
least s of its children are. Trees are implicit and level-ordered (the
children of node j on one level are nodes arity*j .. arity*j + arity - 1 on
the next), so a level is just a boolean numpy array and one propagation
step is a reshape and a row sum.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from .bounds import percolation_bound, percolation_hypothesis_check
from .colourings import ListAssignment, available_colours
from .core.config import settings
from .core.errors import BoundDomainError, InfeasibleParametersError, PreconditionError
from .graphs import Graph, generate
from .sampling import SeedLike, UniformSampler
from .schemas.percolation import PercolationInstance

logger = logging.getLogger(__name__)

# leaf cells per Monte Carlo batch
BATCH_CELLS = 1 << 22
EXHAUSTIVE_LEAF_LIMIT = 16

LeafMask = Union[np.ndarray, Sequence[bool], Sequence[int], int]


@dataclass
class Propagation:
    """Activation of every level, root level first"""

    levels: List[np.ndarray]

    @property
    def root_active(self) -> bool:
        return bool(self.levels[0][0])

    def to_dict(self) -> dict:
        return {
            "root_active": self.root_active,
            "active_per_level": [int(level.sum()) for level in self.levels],
        }


def _leaf_array(instance: PercolationInstance, mask: LeafMask) -> np.ndarray:
    size = instance.leaves
    if isinstance(mask, (int, np.integer)) and not isinstance(mask, bool):
        mask = int(mask)
        if mask < 0 or mask >> size:
            raise PreconditionError(f"bit mask does not fit {size} leaves")
        return ((mask >> np.arange(size, dtype=object)) & 1).astype(bool)
    leaves = np.asarray(mask, dtype=bool)
    if leaves.shape != (size,):
        raise PreconditionError(f"mask has shape {leaves.shape}, tree has {size} leaves")
    return leaves


def _step(active: np.ndarray, arity: int, threshold: int) -> np.ndarray:
    """One level up; works on a single level or a (batch, width) block"""
    grouped = active.reshape(*active.shape[:-1], -1, arity)
    return grouped.sum(axis=-1) >= threshold


def _roots(leaves: np.ndarray, instance: PercolationInstance) -> np.ndarray:
    active = leaves
    for _ in range(instance.depth):
        active = _step(active, instance.arity, instance.threshold)
    return active[..., 0]


def propagate(instance: PercolationInstance, mask: Optional[LeafMask] = None) -> Propagation:
    """Deterministic bottom-up pass; ``mask`` defaults to the instance's explicit mask"""
    if mask is None:
        if instance.mask is None:
            raise PreconditionError("no leaf mask given")
        mask = instance.mask
    active = _leaf_array(instance, mask)
    levels = [active]
    for _ in range(instance.depth):
        active = _step(active, instance.arity, instance.threshold)
        levels.append(active)
    levels.reverse()
    return Propagation(levels)


def adversarial_mask(instance: PercolationInstance) -> np.ndarray:
    """Leaves of the leftmost threshold-ary subtree: threshold**depth active leaves"""
    if instance.threshold > instance.arity:
        raise PreconditionError(
            f"threshold {instance.threshold} exceeds arity {instance.arity}; the root cannot activate"
        )
    index = np.arange(instance.leaves)
    active = np.ones(instance.leaves, dtype=bool)
    for _ in range(instance.depth):
        active &= index % instance.arity < instance.threshold
        index //= instance.arity
    return active


# ---------------------------------------------------------------------------
# Exact root probabilities under iid leaves
# ---------------------------------------------------------------------------


def _leaf_probability(instance: PercolationInstance) -> Fraction:
    if instance.model != "iid":
        raise PreconditionError(f"exact root probability needs iid leaves, not {instance.model}")
    return Fraction(repr(instance.p))


def exact_root_probability_small(instance: PercolationInstance) -> Fraction:
    """P(root active) by composing P(Binomial(arity, q) >= threshold) level by level"""
    q = _leaf_probability(instance)
    arity, s = instance.arity, instance.threshold
    for _ in range(instance.depth):
        q = sum(
            (math.comb(arity, j) * q**j * (1 - q) ** (arity - j) for j in range(s, arity + 1)),
            Fraction(0),
        )
    return q


def exhaustive_root_probability(instance: PercolationInstance) -> Fraction:
    """P(root active) summed over every leaf mask"""
    p = _leaf_probability(instance)
    size = instance.leaves
    if size > EXHAUSTIVE_LEAF_LIMIT:
        raise InfeasibleParametersError(f"{size} leaves is above the exhaustive limit of {EXHAUSTIVE_LEAF_LIMIT}")
    masks = np.arange(1 << size)
    leaves = ((masks[:, None] >> np.arange(size)) & 1).astype(bool)
    roots = _roots(leaves, instance)
    ones = leaves.sum(axis=1)
    active_by_weight = np.bincount(ones[roots], minlength=size + 1)
    return sum(
        (int(active_by_weight[j]) * p**j * (1 - p) ** (size - j) for j in range(size + 1)),
        Fraction(0),
    )


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class RootEstimate:
    estimate: float
    std_error: float
    trials: int
    active: int
    bound_log: Optional[float]
    hypothesis_ok: Optional[bool]

    @property
    def bound(self) -> Optional[float]:
        return None if self.bound_log is None else math.exp(self.bound_log)

    def within_bound(self, sigmas: float = 3.0) -> Optional[bool]:
        if self.bound_log is None:
            return None
        return self.estimate <= self.bound + sigmas * self.std_error

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "trials": self.trials,
            "active": self.active,
            "bound_log": self.bound_log,
            "bound": self.bound,
            "hypothesis_ok": self.hypothesis_ok,
        }


def _seed_sequence(rng_or_seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(rng_or_seed, np.random.Generator):
        return np.random.SeedSequence(int(rng_or_seed.integers(2**63)))
    return np.random.SeedSequence(rng_or_seed)


def _iid_batch(instance: PercolationInstance, size: int, seed: np.random.SeedSequence) -> int:
    rng = np.random.default_rng(seed)
    leaves = rng.random((size, instance.leaves)) < instance.p
    return int(_roots(leaves, instance).sum())


def _estimate_iid(instance: PercolationInstance, trials: int, rng_or_seed: SeedLike, jobs: int) -> int:
    per_batch = max(1, min(trials, BATCH_CELLS // instance.leaves))
    sizes = [per_batch] * (trials // per_batch)
    if trials % per_batch:
        sizes.append(trials % per_batch)
    seeds = _seed_sequence(rng_or_seed).spawn(len(sizes))
    if jobs <= 1:
        return sum(_iid_batch(instance, size, seed) for size, seed in zip(sizes, seeds))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(lambda job: _iid_batch(instance, *job), zip(sizes, seeds)))


def _leaf_graph(instance: PercolationInstance):
    spec = instance.colouring
    g = generate(spec.graph)
    leaf_vertices = spec.leaf_vertices
    if leaf_vertices is None:
        leaf_vertices = list(range(g.n - instance.leaves, g.n))
    if len(leaf_vertices) != instance.leaves:
        raise PreconditionError(f"{len(leaf_vertices)} leaf vertices for a tree with {instance.leaves} leaves")
    return g, [g.check_vertex(w) for w in leaf_vertices]


def colouring_leaf_model(
    g: Graph,
    k: int,
    leaf_vertices: Sequence[int],
    t: int,
    rng: np.random.Generator,
    sampler: Optional[UniformSampler] = None,
) -> np.ndarray:
    """Draw a uniform k-colouring; leaf i is active iff l_sigma(leaf_vertices[i]) <= t"""
    L = ListAssignment.uniform_k(g.n, k)
    sampler = sampler or UniformSampler(g, L)
    sigma = sampler.draw(rng)
    return np.array([len(available_colours(g, L, sigma, w)) <= t for w in leaf_vertices], dtype=bool)


def estimate_root_probability(
    instance: PercolationInstance,
    trials: int,
    rng_or_seed: SeedLike = 0,
    jobs: Optional[int] = None,
) -> RootEstimate:
    """Monte Carlo P(root active) with its standard error and the tail bound.

    iid leaves run in vectorised batches, each on its own spawned stream, so
    the result depends on the seed and not on ``jobs``.
    """
    if trials < 1:
        raise InfeasibleParametersError(f"trials must be positive, got {trials}")
    jobs = settings.JOBS if jobs is None else jobs

    if instance.model == "iid":
        active = _estimate_iid(instance, trials, rng_or_seed, jobs)
    elif instance.model == "colouring":
        g, leaf_vertices = _leaf_graph(instance)
        spec = instance.colouring
        sampler = UniformSampler(g, ListAssignment.uniform_k(g.n, spec.k))
        rng = np.random.default_rng(_seed_sequence(rng_or_seed))
        active = sum(
            bool(_roots(colouring_leaf_model(g, spec.k, leaf_vertices, spec.list_threshold, rng, sampler), instance))
            for _ in range(trials)
        )
    else:
        raise PreconditionError(f"{instance.model} leaves are deterministic; use propagate")

    estimate = active / trials
    std_error = math.sqrt(estimate * (1 - estimate) / trials)
    try:
        bound_log = percolation_bound(instance.threshold, instance.depth)
    except BoundDomainError:
        bound_log = None
    hypothesis_ok = None
    if instance.model == "iid" and bound_log is not None:
        hypothesis_ok = percolation_hypothesis_check(instance.p, instance.arity, instance.threshold)
    logger.info(f"root activation estimate {estimate:.6g} over {trials} trials ({instance.model} leaves)")
    return RootEstimate(estimate, std_error, trials, active, bound_log, hypothesis_ok)
