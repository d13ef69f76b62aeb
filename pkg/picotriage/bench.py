""" Posterior-update latency and memory measurement. """

import sys
import time
from typing import List, Optional

import attr
import numpy as np

from .evidence import EvidenceSet
from .inference import infer_marginals
from .network import BayesianNetwork

try:
    import resource
except ImportError:     # not on Windows
    resource = None

DEFAULT_UPDATES = 10000


def peak_rss_bytes() -> Optional[int]:
    """ Peak resident set size of this process, None where unavailable. """
    if resource is None:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return peak if sys.platform == "darwin" else peak * 1024

def format_dt(dt: float) -> str:
    if abs(dt) > 10e-3:
        return "%.1f ms" % (dt * 1e3)
    elif abs(dt) > 10e-6:
        return "%.1f us" % (dt * 1e6)
    return "%.0f ns" % (dt * 1e9)


def random_evidence(net: BayesianNetwork, rng: np.random.Generator) -> EvidenceSet:
    """ Strictly positive virtual evidence on a random subset of variables,
    the shape of a fusion update. """
    ev = EvidenceSet(net)
    for var in net.variables:
        if rng.random() < 0.5:
            ev.add_virtual(var.name, rng.uniform(0.05, 1.0, var.cardinality))
    return ev


@attr.s(frozen=True, slots=True)
class BenchResult(object):
    """ Update latencies in seconds. """
    latencies = attr.ib(repr=False)
    peak_rss = attr.ib(default=None)

    @property
    def updates(self) -> int:
        return len(self.latencies)

    @property
    def median(self) -> float:
        return float(np.median(self.latencies))

    @property
    def p99(self) -> float:
        return float(np.percentile(self.latencies, 99))

    @property
    def mean(self) -> float:
        return float(np.mean(self.latencies))

    @property
    def updates_per_second(self) -> float:
        total = float(np.sum(self.latencies))
        return self.updates / total if total > 0 else float("inf")

    @property
    def peak_rss_mb(self) -> Optional[float]:
        return None if self.peak_rss is None else self.peak_rss / 2**20

    def check(self, max_median: Optional[float] = None,
              max_rss_mb: Optional[float] = None) -> List[str]:
        """ Budgets exceeded, as messages. """
        failures = []
        if max_median is not None and self.median >= max_median:
            failures.append("median latency {} exceeds {}".format(
                format_dt(self.median), format_dt(max_median)))
        if max_rss_mb is not None and self.peak_rss_mb is not None \
                and self.peak_rss_mb >= max_rss_mb:
            failures.append("peak memory {:.1f} MB exceeds {:.1f} MB".format(
                self.peak_rss_mb, max_rss_mb))
        return failures

    def todict(self) -> dict:
        return {"updates": self.updates, "median_s": self.median, "p99_s": self.p99,
                "mean_s": self.mean, "updates_per_second": self.updates_per_second,
                "peak_rss_mb": self.peak_rss_mb}

    def totext(self) -> str:
        rss = "n/a" if self.peak_rss_mb is None else "{:.1f} MB".format(self.peak_rss_mb)
        return "\n".join([
            "updates        {}".format(self.updates),
            "median         {}".format(format_dt(self.median)),
            "p99            {}".format(format_dt(self.p99)),
            "mean           {}".format(format_dt(self.mean)),
            "updates/s      {:.0f}".format(self.updates_per_second),
            "peak memory    {}".format(rss)])


def run_bench(net: BayesianNetwork, updates: int = DEFAULT_UPDATES, seed: int = 0,
              warmup: int = 100) -> BenchResult:
    """ Time *updates* posterior computations over random virtual evidence.
    Evidence is drawn before timing starts. """
    rng = np.random.default_rng(seed)
    batch = [random_evidence(net, rng) for _ in range(updates)]
    for ev in batch[:warmup]:
        infer_marginals(net, ev)
    latencies = np.empty(updates)
    clock = time.perf_counter_ns
    for i, ev in enumerate(batch):
        start = clock()
        infer_marginals(net, ev)
        latencies[i] = (clock() - start) * 1e-9
    return BenchResult(latencies, peak_rss_bytes())
