"""
Bounds Module for Colourspace

Closed-form evaluation of the analytic bounds: Lambert W, Coupon-Collector
bounds, list-size requirements, colouring-count lower bounds, free energy of
the regular tree, concentration and percolation tail bounds.

Counting bounds are returned in log space. Hypotheses of the underlying
results are never enforced here; :class:`BoundEvaluator` checks and reports
them next to the value. Only mathematically undefined inputs raise
:class:`BoundDomainError`.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .core.errors import BoundDomainError
from .graphs import Graph
from .schemas.bounds import BoundReport, HypothesisCheck

logger = logging.getLogger(__name__)

_W_TOL = 1e-12
_HALLEY_MAX_ITER = 100
_BISECT_MAX_ITER = 400
# relative slack for comparing float hypotheses such as s >= 6 p Delta
_HYPOTHESIS_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------


def lambert_w(x: float) -> float:
    """Principal branch W(x) for x >= 0, the inverse of w -> w e^w.

    Halley iteration seeded with ln(1+x); bisection fallback on
    [0, max(1, ln x + 1)] if the residual is not within 1e-12 * max(1, x).
    """
    x = float(x)
    if math.isnan(x) or x < 0:
        raise BoundDomainError(f"lambert_w is defined for x >= 0 here, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    tol = _W_TOL * max(1.0, x)
    w = math.log1p(x)
    for _ in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        if not math.isfinite(step):
            break
        w_next = w - step
        if w_next == w or abs(step) <= 4 * math.ulp(w):
            w = w_next
            break
        w = w_next

    if w >= 0 and abs(w * math.exp(w) - x) <= tol:
        return w
    logger.debug(f"lambert_w({x}): Halley residual too large, bisecting")
    return _lambert_w_bisect(x, tol)


def _lambert_w_bisect(x: float, tol: float) -> float:
    lo, hi = 0.0, max(1.0, math.log(x) + 1.0)
    mid = hi
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        residual = mid * math.exp(mid) - x
        if abs(residual) <= tol or hi - lo <= math.ulp(mid):
            break
        if residual > 0:
            hi = mid
        else:
            lo = mid
    return mid


# ---------------------------------------------------------------------------
# List sizes and Coupon-Collector bounds
# ---------------------------------------------------------------------------


def _rho(delta: float, d: float) -> float:
    if d < 0:
        raise BoundDomainError(f"local average degree must be non-negative, got {d}")
    rho = delta / (d + 1)
    if rho <= 1:
        raise BoundDomainError(f"rho = Delta/(d+1) = {rho} must exceed 1")
    return rho


def required_list_size(deg: int, d: float, delta: int, ell: float) -> float:
    """(1 + 2/ln rho) deg / W(deg/ell), with rho = Delta/(d+1)"""
    rho = _rho(delta, d)
    if ell <= 0:
        raise BoundDomainError(f"target list size must be positive, got {ell}")
    if deg < 0:
        raise BoundDomainError(f"degree must be non-negative, got {deg}")
    factor = 1 + 2 / math.log(rho)
    if deg == 0:
        # limit of deg / W(deg/ell) as deg -> 0
        return factor * ell
    return factor * deg / lambert_w(deg / ell)


def required_q(deg: int, d: float, delta: int) -> float:
    """Per-vertex q floor of the counting bound: (1 + 1/ln rho) deg / W(deg / ((d+1)(ln rho)^3))"""
    rho = _rho(delta, d)
    if deg <= 0:
        raise BoundDomainError(f"degree must be positive, got {deg}")
    log_rho = math.log(rho)
    return (1 + 1 / log_rho) * deg / lambert_w(deg / ((d + 1) * log_rho**3))


def count_list_floor(q: float, d: float, delta: int) -> float:
    """List size (1 + 1/ln rho) q required at a vertex by the counting bound"""
    return (1 + 1 / math.log(_rho(delta, d))) * q


def _coupon(k: float, size: float, t: float, expected_short: float) -> float:
    if t < 1:
        raise BoundDomainError(f"short-list threshold t must be >= 1, got {t}")
    if size < 0:
        raise BoundDomainError(f"number of draws must be non-negative, got {size}")
    k0 = k - expected_short
    if k0 <= 0:
        raise BoundDomainError(f"k0 = k - E[X] = {k0} must be positive")
    return k0 * math.exp(-(1 + 1 / t) * size / k0)


def coupon_lower_bound(k: int, d: int, t: int, expected_short: float) -> float:
    """k0 exp(-(1 + 1/t) d / k0) with k0 = k - E[X]"""
    return _coupon(k, d, t, expected_short)


def generalised_coupon_bound(k: int, n_vertices: int, t: int, expected_short: float) -> float:
    """The Coupon-Collector bound for colouring a whole graph H on n_vertices"""
    return _coupon(k, n_vertices, t, expected_short)


def short_list_count(list_sizes: Iterable[int], t: int) -> int:
    """Number of lists of size at most t"""
    return sum(1 for size in list_sizes if size <= t)


def generalised_short_count(g: Graph, list_sizes: Sequence[int], t: int) -> int:
    """#{v : |L(v)| < (deg(v)+1)(t+1)}"""
    return sum(1 for v in g.vertices() if list_sizes[v] < (g.degree(v) + 1) * (t + 1))


def coupon_exact_expectation(k: int, lists: Sequence[Iterable[int]]) -> Fraction:
    """Exact E|[k] minus {x_1..x_d}| for independent uniform x_i in L_i"""
    frozen = [frozenset(colours) for colours in lists]
    if any(not colours for colours in frozen):
        raise BoundDomainError("every list must be non-empty")
    total = Fraction(0)
    for x in range(k):
        survive = Fraction(1)
        for colours in frozen:
            if x in colours:
                survive *= 1 - Fraction(1, len(colours))
        total += survive
    return total


def list_tail_bound(t: float, ell: float) -> float:
    """min(1, t/ell)"""
    if ell <= 0:
        raise BoundDomainError(f"expected list size must be positive, got {ell}")
    return min(1.0, max(0.0, t / ell))


# ---------------------------------------------------------------------------
# Counting lower bounds and free energy
# ---------------------------------------------------------------------------


def count_lower_bound(g: Graph, q_values: Sequence[float], d: float) -> float:
    """n (ln q - 1/2 ln(D/(d+1))) with q, D geometric means of q(v) and deg(v)"""
    if len(q_values) != g.n:
        raise BoundDomainError(f"need one q value per vertex ({g.n}), got {len(q_values)}")
    if g.n == 0:
        return 0.0
    if d < 0:
        raise BoundDomainError(f"local average degree must be non-negative, got {d}")
    degrees = g.degrees()
    if min(degrees) == 0:
        raise BoundDomainError("geometric mean degree is undefined with an isolated vertex")
    if min(q_values) <= 0:
        raise BoundDomainError("q values must be positive")
    log_q = math.fsum(math.log(q) for q in q_values) / g.n
    log_degree = math.fsum(math.log(deg) for deg in degrees) / g.n
    return g.n * (log_q - 0.5 * (log_degree - math.log(d + 1)))


def bbck_delta(k: int, delta: int) -> float:
    """delta = (4/k) e^{Delta/k}"""
    if k < 1:
        raise BoundDomainError(f"k must be positive, got {k}")
    return 4 / k * math.exp(delta / k)


def bbck_lower_bound(n: int, m: int, k: int, delta: int) -> float:
    """m ln(1 - 1/k) + n ln((1 - delta) k); -inf when the bound is vacuous (delta >= 1)"""
    if k < 2:
        raise BoundDomainError(f"k must be at least 2, got {k}")
    shrink = bbck_delta(k, delta)
    if shrink >= 1:
        logger.debug(f"bbck_lower_bound vacuous: delta={shrink} >= 1 at k={k}, Delta={delta}")
        return -math.inf
    return m * math.log1p(-1 / k) + n * math.log((1 - shrink) * k)


def bbck_upper_estimate(n: int, m: int, k: int) -> float:
    """m ln(1 - 1/k) + n ln((1 + 2 ln n / n) k), the random-regular upper estimate"""
    if k < 2 or n < 1:
        raise BoundDomainError(f"need k >= 2 and n >= 1, got k={k}, n={n}")
    return m * math.log1p(-1 / k) + n * math.log((1 + 2 * math.log(n) / n) * k)


def tree_free_energy(delta: int, k: int) -> float:
    """f(T_Delta, k) = ln k + (Delta/2) ln(1 - 1/k)"""
    if k < 2:
        raise BoundDomainError(f"tree free energy needs k >= 2, got {k}")
    if delta < 0:
        raise BoundDomainError(f"Delta must be non-negative, got {delta}")
    return math.log(k) + delta / 2 * math.log1p(-1 / k)


# ---------------------------------------------------------------------------
# Concentration
# ---------------------------------------------------------------------------


def chernoff_upper(mu: float, delta: float) -> float:
    """[e^delta / (1+delta)^(1+delta)]^mu, computed in log space"""
    if mu < 0 or delta < 0:
        raise BoundDomainError(f"need mu >= 0 and delta >= 0, got mu={mu}, delta={delta}")
    if mu == 0 or delta == 0:
        return 1.0
    return math.exp(mu * (delta - (1 + delta) * math.log1p(delta)))


def chernoff_upper_abs(mu: float, sigma: float) -> float:
    """e^{-sigma}, valid only for sigma >= 6 mu"""
    if mu < 0 or sigma < 0:
        raise BoundDomainError(f"need mu >= 0 and sigma >= 0, got mu={mu}, sigma={sigma}")
    if sigma < 6 * mu:
        raise BoundDomainError(f"absolute Chernoff form needs sigma >= 6 mu, got {sigma} < {6 * mu}")
    return math.exp(-sigma)


def lower_tail_bound(delta: float, ell: float, doubled: bool = False) -> float:
    """min(1, c e^{-delta^2 ell / 2}) with c = 2 when doubled"""
    if not 0 < delta < 1:
        raise BoundDomainError(f"lower-tail deviation must lie in (0, 1), got {delta}")
    if ell <= 0:
        raise BoundDomainError(f"mean must be positive, got {ell}")
    factor = 2.0 if doubled else 1.0
    return min(1.0, factor * math.exp(-delta * delta * ell / 2))


def frozen_copies_tail(copies: int, d: int, n0: int) -> Tuple[float, float]:
    """Expected fully frozen copies mu = copies (d+1)^(-n0) and P(count < mu/2) <= e^{-mu/8}"""
    if copies < 0 or d < 0 or n0 < 1:
        raise BoundDomainError(f"need copies >= 0, d >= 0, n0 >= 1, got {copies}, {d}, {n0}")
    mu = copies * float(d + 1) ** (-n0)
    return mu, math.exp(-mu / 8)


# ---------------------------------------------------------------------------
# Percolation and local lemmas
# ---------------------------------------------------------------------------


def percolation_bound(s: int, f: int) -> float:
    """log P(root activated) <= -s^ceil(f/2)"""
    if s < 2 or f < 1:
        raise BoundDomainError(f"need s >= 2 and f >= 1, got s={s}, f={f}")
    return -float(s ** ((f + 1) // 2))


def percolation_hypothesis_check(p: float, delta: int, s: float) -> bool:
    """s >= max(6 p Delta, 3 ln Delta)"""
    if not 0 <= p <= 1 or delta < 1:
        raise BoundDomainError(f"need p in [0, 1] and Delta >= 1, got p={p}, Delta={delta}")
    need = max(6 * p * delta, 3 * math.log(delta))
    return s >= need * (1 - _HYPOTHESIS_SLACK)


def vu_list_bound(delta: int, f: float) -> float:
    """(1 + 2/ln rho) Delta / W(rho/(ln rho)^3) with rho = min(f, Delta)/3"""
    rho = min(f, delta) / 3
    if rho <= 1:
        raise BoundDomainError(f"rho = min(f, Delta)/3 = {rho} must exceed 1")
    log_rho = math.log(rho)
    return (1 + 2 / log_rho) * delta / lambert_w(rho / log_rho**3)


def avoidance_probability_lower(list_sizes: Sequence[float], degrees: Sequence[float]) -> float:
    """prod over v of (1 - 1/(|L(v)| - deg(v))), each |L(v)| >= deg(v) + 1"""
    if len(list_sizes) != len(degrees):
        raise BoundDomainError("list sizes and degrees must have equal length")
    product = 1.0
    for size, deg in zip(list_sizes, degrees):
        spare = size - deg
        if spare < 1:
            raise BoundDomainError(f"need |L(v)| >= deg(v) + 1, got {size} and {deg}")
        product *= 1 - 1 / spare
    return product


def main_simplified_list_target(delta: int, epsilon: float) -> float:
    """Expected list size Delta^(epsilon/2) promised for k >= Delta/((1-epsilon) ln k)"""
    if not 0 < epsilon < 1:
        raise BoundDomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    return float(delta) ** (epsilon / 2)


def main_simplified_condition(k: int, delta: int, epsilon: float) -> bool:
    """(1 - epsilon) k ln k >= Delta"""
    if not 0 < epsilon < 1 or k < 1:
        raise BoundDomainError(f"need epsilon in (0, 1) and k >= 1, got {epsilon}, {k}")
    return (1 - epsilon) * k * math.log(k) >= delta


# ---------------------------------------------------------------------------
# Evaluator
# ---------------------------------------------------------------------------


def _ge(lhs: float, rhs: float) -> bool:
    return lhs >= rhs - _HYPOTHESIS_SLACK * max(1.0, abs(rhs))


class BoundEvaluator:
    """
    Evaluate a named formula and attach its hypothesis checks.

    Each formula maps a parameter dict to (value, is_log, hypotheses, notes).
    Hypothesis violations become warnings on the report, never errors.
    """

    def __init__(self):
        self.formulas: Dict[str, Callable[[Dict[str, float]], tuple]] = {
            "lambert_w": self._lambert_w,
            "required_list_size": self._required_list_size,
            "required_q": self._required_q,
            "coupon": self._coupon,
            "coupon_general": self._coupon_general,
            "list_tail": self._list_tail,
            "count_lower": self._count_lower,
            "bbck": self._bbck,
            "tree_free_energy": self._tree_free_energy,
            "chernoff": self._chernoff,
            "chernoff_abs": self._chernoff_abs,
            "lower_tail": self._lower_tail,
            "percolation": self._percolation,
            "vu": self._vu,
            "avoidance": self._avoidance,
            "frozen_copies": self._frozen_copies,
        }
        logger.info(f"BoundEvaluator initialized with {len(self.formulas)} formulas")

    def evaluate(self, formula: str, params: Dict[str, float], graph: Optional[Graph] = None) -> BoundReport:
        """
        Evaluate ``formula`` at ``params``.

        Args:
            formula: one of :attr:`formulas`
            params: named scalars (k, d, t, short, deg, ell, Delta, mu, delta, ...)
            graph: required by graph-level formulas (``count_lower``)

        Returns:
            BoundReport with value, log_value, hypotheses, warnings and notes
        """
        if formula not in self.formulas:
            raise BoundDomainError(f"unknown formula '{formula}'; known: {', '.join(sorted(self.formulas))}")
        handler = self.formulas[formula]
        args = dict(params)
        if graph is not None:
            args["_graph"] = graph
        value, is_log, hypotheses, notes = handler(args)
        if is_log:
            log_value, linear = value, (math.exp(value) if value < 709 else math.inf)
        else:
            linear = value
            log_value = math.log(value) if value > 0 else -math.inf
        warnings = [f"hypothesis '{h.name}' not satisfied" for h in hypotheses if not h.satisfied]
        for message in warnings:
            logger.warning(f"{formula}: {message}")
        return BoundReport(
            formula=formula,
            params={k: float(v) for k, v in params.items() if isinstance(v, (int, float))},
            value=linear,
            log_value=log_value,
            hypotheses=hypotheses,
            warnings=warnings,
            notes=notes,
        )

    @staticmethod
    def _require(args: dict, *names: str) -> List[float]:
        missing = [name for name in names if name not in args]
        if missing:
            raise BoundDomainError(f"missing parameters: {', '.join(missing)}")
        return [args[name] for name in names]

    def _lambert_w(self, args):
        (x,) = self._require(args, "x")
        return lambert_w(x), False, [], []

    def _required_list_size(self, args):
        deg, d, delta, ell = self._require(args, "deg", "d", "Delta", "ell")
        value = required_list_size(int(deg), d, int(delta), ell)
        rho = delta / (d + 1)
        hypotheses = [
            HypothesisCheck(name="d <= Delta/6 - 1", satisfied=_ge(delta / 6 - 1, d)),
            HypothesisCheck(name="ell >= (d+1)(ln rho)^3", satisfied=_ge(ell, (d + 1) * math.log(rho) ** 3)),
        ]
        notes = [f"the argument yields E[l] >= (1 + 1/rho) ell = {(1 + 1 / rho) * ell!r}; the stated ell is used"]
        return value, False, hypotheses, notes

    def _required_q(self, args):
        deg, d, delta = self._require(args, "deg", "d", "Delta")
        hypotheses = [HypothesisCheck(name="d <= Delta/6 - 1", satisfied=_ge(delta / 6 - 1, d))]
        return required_q(int(deg), d, int(delta)), False, hypotheses, []

    def _coupon(self, args):
        k, d, t, short = self._require(args, "k", "d", "t", "short")
        hypotheses = [HypothesisCheck(name="t >= 1", satisfied=t >= 1)]
        return coupon_lower_bound(int(k), int(d), t, short), False, hypotheses, []

    def _coupon_general(self, args):
        k, n, t, short = self._require(args, "k", "n", "t", "short")
        return generalised_coupon_bound(int(k), int(n), t, short), False, [], []

    def _list_tail(self, args):
        t, ell = self._require(args, "t", "ell")
        return list_tail_bound(t, ell), False, [], []

    def _count_lower(self, args):
        (d,) = self._require(args, "d")
        g = args.get("_graph")
        if g is None:
            raise BoundDomainError("count_lower needs a graph")
        delta = max(g.degrees(), default=0)
        rho_ok = delta / (d + 1) > 1
        if "q" in args:
            q_values = [float(args["q"])] * g.n
        elif rho_ok:
            q_values = [required_q(g.degree(v), d, delta) for v in g.vertices()]
        else:
            raise BoundDomainError("count_lower needs an explicit q when Delta/(d+1) <= 1")
        value = count_lower_bound(g, q_values, d)
        floor_ok = rho_ok and all(
            _ge(q, required_q(g.degree(v), d, delta)) for v, q in enumerate(q_values)
        )
        hypotheses = [
            HypothesisCheck(name="d <= Delta/6 - 1", satisfied=_ge(delta / 6 - 1, d)),
            HypothesisCheck(name="q(v) meets the required floor", satisfied=floor_ok),
        ]
        return value, True, hypotheses, []

    def _bbck(self, args):
        n, m, k, delta = self._require(args, "n", "m", "k", "Delta")
        value = bbck_lower_bound(int(n), int(m), int(k), int(delta))
        hypotheses = [HypothesisCheck(name="delta < 1 (non-vacuous)", satisfied=bbck_delta(int(k), int(delta)) < 1)]
        return value, True, hypotheses, []

    def _tree_free_energy(self, args):
        delta, k = self._require(args, "Delta", "k")
        return tree_free_energy(int(delta), int(k)), False, [], []

    def _chernoff(self, args):
        mu, delta = self._require(args, "mu", "delta")
        return chernoff_upper(mu, delta), False, [], []

    def _chernoff_abs(self, args):
        mu, sigma = self._require(args, "mu", "sigma")
        return chernoff_upper_abs(mu, sigma), False, [], []

    def _lower_tail(self, args):
        delta, ell = self._require(args, "delta", "ell")
        doubled = bool(args.get("doubled", 0))
        return lower_tail_bound(delta, ell, doubled), False, [], []

    def _percolation(self, args):
        s, f = self._require(args, "s", "f")
        value = percolation_bound(int(s), int(f))
        hypotheses = []
        if "p" in args and "Delta" in args:
            ok = percolation_hypothesis_check(args["p"], int(args["Delta"]), s)
            hypotheses.append(HypothesisCheck(name="s >= max(6 p Delta, 3 ln Delta)", satisfied=ok))
        return value, True, hypotheses, []

    def _vu(self, args):
        delta, f = self._require(args, "Delta", "f")
        return vu_list_bound(int(delta), f), False, [], []

    def _avoidance(self, args):
        sizes = args.get("list_sizes")
        degrees = args.get("degrees")
        if sizes is None or degrees is None:
            raise BoundDomainError("avoidance needs list_sizes and degrees")
        return avoidance_probability_lower(sizes, degrees), False, [], []

    def _frozen_copies(self, args):
        copies, d, n0 = self._require(args, "copies", "d", "n0")
        mu, tail = frozen_copies_tail(int(copies), int(d), int(n0))
        return tail, False, [], [f"expected fully frozen copies {mu!r}"]
