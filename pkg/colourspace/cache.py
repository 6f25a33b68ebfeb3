"""
Caching Module for Colourspace

Keeps materialised colouring spaces and completion tables keyed by the
instance they were computed for, so that one CLI run (or one test session)
enumerates a given (graph, lists) pair only once.
"""

import hashlib
import json
import logging
from collections import OrderedDict
from typing import Any, Callable, Optional

from .core.config import settings

logger = logging.getLogger(__name__)


class InstanceCache:
    """Bounded LRU cache for expensive per-instance results"""

    def __init__(self, max_entries: Optional[int] = None):
        self.cache: "OrderedDict[str, Any]" = OrderedDict()
        self.max_entries = settings.CACHE_MAX_ENTRIES if max_entries is None else max_entries
        self.hit_count = 0
        self.miss_count = 0
        logger.info(f"InstanceCache initialized with capacity: {self.max_entries}")

    def _generate_key(self, prefix: str, params: dict) -> str:
        """Generate a cache key from prefix and parameters"""
        key_string = f"{prefix}:{json.dumps(params, sort_keys=True)}"
        return hashlib.md5(key_string.encode()).hexdigest()[:16]

    def instance_key(self, prefix: str, g, L, **extra) -> str:
        """Key for a (graph, list-assignment) instance plus extra parameters"""
        params = {"n": g.n, "edges": [list(e) for e in g.edges], "lists": L.to_json(), **extra}
        return self._generate_key(prefix, params)

    def get(self, key: str) -> Optional[Any]:
        if key in self.cache:
            self.cache.move_to_end(key)
            self.hit_count += 1
            logger.debug(f"Cache HIT: {key}")
            return self.cache[key]
        self.miss_count += 1
        logger.debug(f"Cache MISS: {key}")
        return None

    def set(self, key: str, value: Any) -> None:
        self.cache[key] = value
        self.cache.move_to_end(key)
        while len(self.cache) > self.max_entries:
            evicted, _ = self.cache.popitem(last=False)
            logger.debug(f"Cache EVICT: {evicted}")
        logger.debug(f"Cache SET: {key}")

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        value = self.get(key)
        if value is None:
            value = compute()
            self.set(key, value)
        return value

    def get_stats(self) -> dict:
        """Get cache performance statistics"""
        total_requests = self.hit_count + self.miss_count
        hit_rate = (self.hit_count / total_requests * 100) if total_requests > 0 else 0
        return {
            "hits": self.hit_count,
            "misses": self.miss_count,
            "hit_rate": round(hit_rate, 1),
            "total_entries": len(self.cache),
        }

    def clear(self) -> int:
        removed = len(self.cache)
        self.cache.clear()
        if removed:
            logger.info(f"Cleared {removed} cache entries")
        return removed


_shared_cache: Optional[InstanceCache] = None


def get_shared_cache() -> InstanceCache:
    """Process-wide cache used by the sampling, geometry and domination modules"""
    global _shared_cache
    if _shared_cache is None:
        _shared_cache = InstanceCache()
    return _shared_cache
