"""
Experiment Handler Module for Colourspace

Maps each experiment command to a ``handle_<command>`` method. Handlers take
a validated :class:`ExperimentConfig` and return an :class:`ExperimentReport`
whose measured values, bound values and verdicts are plain JSON data.
"""

import logging
import time
from collections import Counter
from typing import Dict, List

import numpy as np
from scipy.stats import chisquare

from .bounds import BoundEvaluator, bbck_lower_bound, tree_free_energy
from .colourings import Colouring, ListAssignment
from .core.config import settings
from .core.errors import BoundDomainError, ConfigError
from .domination import (
    check_family_domination,
    check_negative_correlation,
    independent_distribution,
    renormalise_and_check,
    verify_tail_bounds,
)
from .enumeration import (
    chromatic_number,
    count_colourings,
    enumerate_colourings,
    free_energy,
    relative_free_energy,
)
from .geometry import (
    build_view,
    classify_all,
    cluster_histogram,
    force_colour,
    layered_recolour,
    looseness_radius_witness,
)
from .graphs import Graph, generate, max_degree
from .percolation import (
    EXHAUSTIVE_LEAF_LIMIT,
    adversarial_mask,
    estimate_root_probability,
    exact_root_probability_small,
    exhaustive_root_probability,
    propagate,
)
from .sampling import UniformSampler, first_colouring, greedy_colour, local_search_colour, sample_batch
from .schemas.experiment import ExperimentConfig, ExperimentReport
from .schemas.sampling import BadVertexConfig

logger = logging.getLogger(__name__)

# chi-square checks run only when every cell expects this many draws
MIN_EXPECTED_PER_CELL = 5
UNIFORMITY_LEVEL = 1e-3
# larger json sample batches are summarised; use the jsonl format for the draws
MAX_INLINE_SAMPLES = 1000


def _require(config: ExperimentConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise ConfigError(f"'{config.command}' needs: {', '.join(missing)}")


def _graph(config: ExperimentConfig) -> Graph:
    _require(config, "graph")
    return generate(config.graph)


def _lists(config: ExperimentConfig, g: Graph) -> ListAssignment:
    if config.lists is not None:
        L = ListAssignment(config.lists)
        L.check_graph(g)
        return L
    _require(config, "k")
    return ListAssignment.uniform_k(g.n, config.k)


def _graph_summary(g: Graph) -> dict:
    return {"n": g.n, "m": g.m, "max_degree": max_degree(g)}


class ExperimentHandler:
    """Experiment dispatcher with one handler per command"""

    def __init__(self):
        self.evaluator = BoundEvaluator()

    def run(self, config: ExperimentConfig, timing: bool = False) -> ExperimentReport:
        handler = getattr(self, f"handle_{config.command}")
        start_time = time.time()
        logger.info(f"Running '{config.command}'")
        report = handler(config)
        elapsed = time.time() - start_time
        logger.info(f"'{config.command}' completed in {elapsed:.2f}s")
        if timing:
            report.duration_seconds = round(elapsed, 3)
        return report

    @staticmethod
    def _report(config: ExperimentConfig, **fields) -> ExperimentReport:
        echo = config.model_dump(mode="json", exclude_none=True, exclude={"expect"})
        return ExperimentReport(config=echo, **fields)

    # ------------------------------------------------------------------
    # Counting and free energy
    # ------------------------------------------------------------------

    def handle_count(self, config: ExperimentConfig) -> ExperimentReport:
        g = _graph(config)
        L = _lists(config, g)
        result = count_colourings(g, L)
        measured = {**_graph_summary(g), **result.to_dict()}
        bounds, verdicts = {}, {}

        if L.is_uniform and L.k >= 2 and g.n:
            delta = max_degree(g)
            bbck = self.evaluator.evaluate("bbck", {"n": g.n, "m": g.m, "k": L.k, "Delta": delta})
            bounds["bbck"] = bbck.model_dump()
            if bbck.hypotheses_ok and result.count > 0:
                verdicts["bbck_le_log_count"] = bbck.log_value <= result.log_count
            if "d" in config.params:
                try:
                    lower = self.evaluator.evaluate("count_lower", config.params, graph=g)
                except BoundDomainError as e:
                    logger.warning(f"count_lower skipped: {e}")
                else:
                    bounds["count_lower"] = lower.model_dump()
                    if lower.hypotheses_ok and result.count > 0:
                        verdicts["count_lower_le_log_count"] = lower.log_value <= result.log_count
        return self._report(config, measured=measured, bounds=bounds, verdicts=verdicts)

    def handle_freeenergy(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "k")
        g = _graph(config)
        delta = max_degree(g)
        measured = {
            **_graph_summary(g),
            "free_energy": free_energy(g, config.k),
            "chromatic_number": chromatic_number(g),
        }
        bounds = {}
        if config.k < 2:
            logger.warning(f"tree free energy and bbck skipped: k={config.k}")
            return self._report(config, measured=measured, bounds=bounds)

        bounds["tree_free_energy"] = tree_free_energy(delta, config.k)
        try:
            measured["relative_free_energy"] = relative_free_energy(g, config.k, delta)
        except BoundDomainError as e:
            logger.warning(f"relative free energy undefined: {e}")
        if g.m:
            bounds["bbck_log"] = bbck_lower_bound(g.n, g.m, config.k, delta)
        return self._report(config, measured=measured, bounds=bounds)

    # ------------------------------------------------------------------
    # Sampling and heuristics
    # ------------------------------------------------------------------

    def handle_sample(self, config: ExperimentConfig) -> ExperimentReport:
        g = _graph(config)
        L = _lists(config, g)
        trials = 1 if config.trials is None else config.trials
        samples = sample_batch(g, L, config.sampler, trials)
        measured = {"trials": trials, "distinct": len(set(samples))}
        verdicts = {}

        if config.sampler.method == "exact_sequential":
            total = UniformSampler(g, L).count
            measured["count"] = str(total)
            if trials and trials >= MIN_EXPECTED_PER_CELL * total:
                tally = Counter(samples)
                observed = np.array([tally.get(s, 0) for s in enumerate_colourings(g, L)], dtype=float)
                pvalue = float(chisquare(observed).pvalue)
                measured["chi2_pvalue"] = pvalue
                verdicts["uniform"] = pvalue > UNIFORMITY_LEVEL
        if config.format == "json":
            if trials <= MAX_INLINE_SAMPLES:
                measured["colourings"] = [s.to_json() for s in samples]
            else:
                measured["colourings_omitted"] = True
        return self._report(
            config,
            measured=measured,
            verdicts=verdicts,
            records=[s.to_json() for s in samples],
        )

    def handle_solve(self, config: ExperimentConfig) -> ExperimentReport:
        method = config.method or "greedy"
        g = _graph(config)
        rng = np.random.default_rng(config.sampler.seed)

        if method in ("greedy", "local_search"):
            _require(config, "k")
            trials = 1 if config.trials is None else config.trials
            bad_cfg = BadVertexConfig(list_floor=config.list_floor, max_iterations=config.max_iterations)
            outcomes = []
            for _ in range(trials):
                if method == "greedy":
                    outcomes.append(greedy_colour(g, config.k, rng))
                else:
                    outcomes.append(local_search_colour(g, config.k, bad_cfg, rng))
            successes = sum(1 for o in outcomes if o.success)
            measured = {
                "method": method,
                "trials": trials,
                "successes": successes,
                "success_rate": successes / trials if trials else 0.0,
                "outcomes": [o.to_dict() for o in outcomes[:10]],
            }
            return self._report(config, measured=measured, records=[o.to_dict() for o in outcomes])

        if method in ("force", "layered", "witness"):
            _require(config, "k", "vertex")
            L = ListAssignment.uniform_k(g.n, config.k)
            sigma = Colouring(config.colouring) if config.colouring is not None else first_colouring(g, L)
            if method == "force":
                _require(config, "colour")
                result = force_colour(g, L, sigma, config.vertex, config.colour)
                return self._report(config, measured=result.to_dict())
            _require(config, "g_depth")
            if method == "layered":
                layered = layered_recolour(g, config.k, sigma, config.vertex, config.g_depth)
                return self._report(config, measured=layered.to_dict(), verdicts={"lists_reach_threshold": layered.success})
            _require(config, "colour")
            result = looseness_radius_witness(g, config.k, sigma, config.vertex, config.colour, config.g_depth)
            return self._report(config, measured=result.to_dict())

        raise ConfigError(f"unknown solve method '{method}'")

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def handle_classify(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "k", "t")
        g = _graph(config)
        view = build_view(g, config.k, config.t)
        if config.colouring is not None:
            targets = [(view.index_of(config.colouring), Colouring(config.colouring))]
        else:
            targets = [(i, view.colouring(i)) for i in range(len(view))]

        rows: List[Dict] = []
        for index, tau in targets:
            for status in classify_all(view, tau):
                rows.append({"colouring": index, **status.to_row()})
        flags = {name: sum(1 for r in rows if r[name]) for name in ("loose", "thawed", "rigid", "frozen")}
        measured = {
            **_graph_summary(g),
            "colourings": len(view),
            "edges": view.edge_count,
            "clusters": view.cluster_count,
            "classified": len(rows),
            **{f"{name}_count": count for name, count in flags.items()},
            "all_frozen": bool(rows) and flags["frozen"] == len(rows),
        }
        verdicts = {
            "loose_implies_thawed": all(r["thawed"] for r in rows if r["loose"]),
            "frozen_implies_rigid": all(r["rigid"] for r in rows if r["frozen"]),
        }
        return self._report(config, measured=measured, verdicts=verdicts, records=rows)

    def handle_clusters(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "k", "t")
        g = _graph(config)
        view = build_view(g, config.k, config.t)
        histogram = cluster_histogram(view)
        measured = {
            **_graph_summary(g),
            "colourings": len(view),
            "edges": view.edge_count,
            "clusters": view.cluster_count,
            "histogram": {str(size): count for size, count in histogram.items()},
        }
        records = [{"size": size, "clusters": count} for size, count in histogram.items()]
        return self._report(config, measured=measured, records=records)

    # ------------------------------------------------------------------
    # Bounds and domination
    # ------------------------------------------------------------------

    def handle_bounds(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "formula")
        params = dict(config.params)
        for name in ("k", "t"):
            if getattr(config, name) is not None:
                params.setdefault(name, getattr(config, name))
        g = None
        if config.graph is not None:
            g = generate(config.graph)
            params.setdefault("n", g.n)
            params.setdefault("m", g.m)
            params.setdefault("Delta", max_degree(g))
        report = self.evaluator.evaluate(config.formula, params, graph=g)
        measured = {"value": report.value, "log_value": report.log_value}
        return self._report(config, measured=measured, bounds=report.model_dump())

    def handle_dominate(self, config: ExperimentConfig) -> ExperimentReport:
        method = config.method or ("independent" if config.probabilities is not None else "ber")

        if method == "ber":
            _require(config, "family", "p")
            g = _graph(config)
            report = check_family_domination(g, _lists(config, g), config.family, config.p)
            return self._report(config, measured=report.to_dict())

        if method == "negative_correlation":
            _require(config, "vertex")
            g = _graph(config)
            sigma0 = Colouring(config.colouring) if config.colouring is not None else None
            report = check_negative_correlation(g, _lists(config, g), config.vertex, config.colours, sigma0)
            return self._report(config, measured=report.to_dict(), verdicts={"negatively_correlated": report.holds})

        if method == "independent":
            _require(config, "probabilities", "partition", "delta", "p")
            distribution = independent_distribution(config.probabilities)
            report = renormalise_and_check(distribution, config.partition, config.delta, config.p)
            verdicts = {"renormalised_dominated": report.dominated or not report.input_dominated}
            return self._report(config, measured=report.to_dict(), verdicts=verdicts)

        if method == "tail":
            _require(config, "probabilities", "deltas")
            checks = verify_tail_bounds(config.probabilities, config.deltas)
            measured = {"checks": [c.to_dict() for c in checks], "violations": sum(1 for c in checks if not c.holds)}
            return self._report(config, measured=measured, verdicts={"tail_bounds_hold": measured["violations"] == 0})

        raise ConfigError(f"unknown dominate method '{method}'")

    # ------------------------------------------------------------------
    # Percolation
    # ------------------------------------------------------------------

    def handle_percolate(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "percolation")
        instance = config.percolation
        trials = 1000 if config.trials is None else config.trials
        estimate = estimate_root_probability(instance, trials, config.sampler.seed, jobs=settings.JOBS)
        measured = estimate.to_dict()
        verdicts = {}
        if estimate.hypothesis_ok:
            verdicts["within_bound"] = bool(estimate.within_bound())
        if instance.model == "iid":
            exact = exact_root_probability_small(instance)
            measured["exact"] = str(exact)
            measured["exact_float"] = float(exact)
            if estimate.std_error > 0:
                verdicts["estimate_near_exact"] = abs(estimate.estimate - float(exact)) <= 4 * estimate.std_error
            if instance.leaves <= EXHAUSTIVE_LEAF_LIMIT:
                verdicts["exact_matches_exhaustive"] = exact == exhaustive_root_probability(instance)
        return self._report(config, measured=measured, verdicts=verdicts)

    def handle_propagate(self, config: ExperimentConfig) -> ExperimentReport:
        _require(config, "percolation")
        instance = config.percolation
        if instance.model == "adversarial":
            mask = adversarial_mask(instance)
        else:
            mask = instance.mask
        if mask is None:
            raise ConfigError("propagate needs an explicit mask or the adversarial model")
        result = propagate(instance, mask)
        measured = {**result.to_dict(), "active_leaves": int(np.count_nonzero(result.levels[-1]))}
        return self._report(config, measured=measured)


def run(config: ExperimentConfig, timing: bool = False) -> ExperimentReport:
    return ExperimentHandler().run(config, timing=timing)