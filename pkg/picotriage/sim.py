""" Desk-scale scenario replay.

A scenario samples ground-truth casualties from the triage network, passes
them through noisy estimator models with dropout and delay, and streams the
resulting messages through two arms: a baseline that reports raw labels only
for fields it received, and the fused arm running the full fusion pipeline.
Both arms are scored by the same rubric and metrics.
"""

import logging
import math
import multiprocessing
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import attr
import numpy as np

from . import validators
from .errors import BadConfig
from .fusion import FusionPolicy, FusionService, PredictionMessage, ScanComplete
from .network import BayesianNetwork
from .sampling import ancestral_samples, as_generator
from .scoring import (GW_MODES, Comparison, GroundTruth, Metrics, ScoreReport,
                      compare_metrics, compute_metrics, score_run)
from .triage import (FIELDS, Assessment, DecisionPolicy, GoldenWindow, VitalField,
                     default_triage_network)

logger = logging.getLogger(__name__)


def confusion_matrix(diagonal: float, k: int) -> np.ndarray:
    """ ``k x k`` confusion with *diagonal* mass on the true state and the
    rest spread evenly. """
    off = (1.0 - diagonal) / (k - 1)
    return np.full((k, k), off) + np.eye(k) * (diagonal - off)

def _interval(val) -> Tuple[float, float]:
    if isinstance(val, (int, float)):
        return (float(val), float(val))
    lo, hi = val
    if lo < 0 or hi < lo:
        raise ValueError("interval must satisfy 0 <= low <= high, received {}".format(val))
    return (float(lo), float(hi))

def _fields(val) -> Tuple[VitalField, ...]:
    return tuple(VitalField.parse(f) for f in val)


@attr.s(frozen=True, slots=True, eq=False)
class SensorModel(object):
    """ A stand-in estimator: for every covered field it reports with the
    field's detection probability, draws its label from the confusion row of
    the true state, and publishes after a delay drawn from *delay* (seconds,
    fixed or a uniform range). """
    source = attr.ib(validator=validators.identifier)
    fields = attr.ib(default=FIELDS, converter=_fields)
    detection = attr.ib(factory=dict)
    confusion = attr.ib(factory=dict, validator=validators.stochastic_matrix)
    delay = attr.ib(default=(0.0, 0.0), converter=_interval)

    def __attrs_post_init__(self):
        for f in self.fields:
            p = self.detection.get(f)
            if p is None or not 0.0 <= p <= 1.0:
                raise ValueError("detection for {} must be a probability".format(f))
            if self.confusion[f].shape != (f.cardinality, f.cardinality):
                raise ValueError("confusion for {} must be {}x{}"
                                 .format(f, f.cardinality, f.cardinality))

    @classmethod
    def build(cls, source: str, fields=FIELDS, detection=1.0, confusion=1.0,
              delay=0.0) -> "SensorModel":
        """ Accepts scalars or per-field mappings for *detection*, and a
        scalar diagonal, per-field diagonals or explicit matrices for
        *confusion*. """
        fields = _fields(fields)
        det, conf = {}, {}
        for f in fields:
            d = detection.get(f.value, detection.get(f)) if isinstance(detection, Mapping) \
                else detection
            c = confusion.get(f.value, confusion.get(f)) if isinstance(confusion, Mapping) \
                else confusion
            if d is None or c is None:
                raise ValueError("sensor '{}' gives no model for {}".format(source, f))
            det[f] = float(d)
            if isinstance(c, (int, float)):
                if not 0.0 <= c <= 1.0:
                    raise ValueError("confusion diagonal must be a probability")
                conf[f] = confusion_matrix(float(c), f.cardinality)
            else:
                conf[f] = np.asarray(c, dtype=float)
        return cls(source, fields, det, conf, delay)

    def todict(self) -> dict:
        return {"source": self.source,
                "fields": [f.value for f in self.fields],
                "detection": {f.value: self.detection[f] for f in self.fields},
                "confusion": {f.value: self.confusion[f].tolist() for f in self.fields},
                "delay": list(self.delay)}

    @classmethod
    def fromdict(cls, d: Mapping) -> "SensorModel":
        unknown = set(d) - {"source", "fields", "detection", "confusion", "delay"}
        if unknown:
            raise BadConfig("unknown sensor keys: {}".format(", ".join(sorted(unknown))))
        return cls.build(d["source"], d.get("fields", FIELDS), d.get("detection", 1.0),
                         d.get("confusion", 1.0), d.get("delay", 0.0))

DEFAULT_SENSOR = SensorModel.build("estimator", FIELDS, detection=0.31, confusion=0.75,
                                   delay=(0.0, 120.0))


def _sensors(val):
    return tuple(s if isinstance(s, SensorModel) else SensorModel.fromdict(s) for s in val)

def _policy(cls):
    def convert(val):
        return val if isinstance(val, cls) else cls.fromdict(val)
    return convert

def _truths(val):
    if val is None:
        return None
    return tuple(t if isinstance(t, GroundTruth) else GroundTruth.fromdict(t) for t in val)


@attr.s(frozen=True, slots=True)
class ScenarioConfig(object):
    """ Scenario options. The defaults are the noisy desk-scale regime:
    twenty casualties arriving over four minutes, one estimator covering all
    fields with detection 0.31 and 0.75 confusion diagonal, delays up to two
    minutes, a five-minute golden window.

    *jitter* (meters) switches to position mode: messages carry a jittered
    position instead of a casualty hint and the fusion matcher must
    associate them. *truths* replaces sampling by a fixture list.
    """
    casualties = attr.ib(default=20)
    sensors = attr.ib(default=(DEFAULT_SENSOR,), converter=_sensors)
    golden_window = attr.ib(default=300.0, validator=validators.non_negative)
    duration = attr.ib(default=400.0, validator=validators.non_negative)
    arrival = attr.ib(default=(0.0, 240.0), converter=_interval)
    locate_probability = attr.ib(default=1.0, validator=validators.probability)
    area = attr.ib(default=100.0, validator=validators.positive)
    jitter = attr.ib(default=0.0, validator=validators.non_negative)
    truths = attr.ib(default=None, converter=_truths)
    network = attr.ib(default=None)
    fusion = attr.ib(factory=FusionPolicy, converter=_policy(FusionPolicy))
    decision = attr.ib(factory=DecisionPolicy, converter=_policy(DecisionPolicy))
    gw_mode = attr.ib(default="snapshot", validator=attr.validators.in_(GW_MODES))
    seed = attr.ib(default=0)

    def __attrs_post_init__(self):
        count = len(self.truths) if self.truths is not None else self.casualties
        if not isinstance(count, int) or count < 1:
            raise BadConfig("a scenario needs at least one casualty")

    @property
    def casualty_count(self) -> int:
        return len(self.truths) if self.truths is not None else self.casualties

    @property
    def gw(self) -> GoldenWindow:
        return GoldenWindow(self.golden_window)

    def todict(self) -> dict:
        d = {"casualties": self.casualties,
             "sensors": [s.todict() for s in self.sensors],
             "golden_window": self.golden_window,
             "duration": self.duration,
             "arrival": list(self.arrival),
             "locate_probability": self.locate_probability,
             "area": self.area,
             "jitter": self.jitter,
             "fusion": self.fusion.todict(),
             "decision": self.decision.todict(),
             "gw_mode": self.gw_mode,
             "seed": self.seed}
        if self.truths is not None:
            d["truths"] = [t.todict() for t in self.truths]
        if self.network is not None:
            d["network"] = self.network
        return d

    @classmethod
    def fromdict(cls, d: Mapping) -> "ScenarioConfig":
        if not isinstance(d, Mapping):
            raise BadConfig("a scenario must be a JSON object")
        unknown = set(d) - set(attr.fields_dict(cls))
        if unknown:
            raise BadConfig("unknown scenario keys: {}".format(", ".join(sorted(unknown))))
        try:
            return cls(**d)
        except BadConfig:
            raise
        except (TypeError, ValueError, KeyError) as e:
            raise BadConfig("scenario: {}".format(e))

    def load_network(self) -> BayesianNetwork:
        if self.network is None:
            return default_triage_network()
        from .deserializer import fromfile
        from .document import compile
        from .triage import resolve_asset
        return compile(fromfile(resolve_asset(self.network)))


@attr.s(frozen=True, slots=True)
class Scenario(object):
    seed = attr.ib()
    config = attr.ib(type=ScenarioConfig)
    truths = attr.ib(converter=tuple)
    positions = attr.ib()       # casualty id -> (x, y)
    arrivals = attr.ib()        # casualty id -> seconds

    @property
    def gw(self) -> GoldenWindow:
        return self.config.gw

    @property
    def maximum(self) -> int:
        return 12 * len(self.truths)


def generate_scenario(config: ScenarioConfig = ScenarioConfig(), seed: Optional[int] = None,
                      network: Optional[BayesianNetwork] = None) -> Scenario:
    """ Sample ground truths, arrival times, positions and which casualties
    the platform locates. The same (config, seed) always gives the same
    scenario. Truths are drawn from *network* (the default triage network
    unless the config names another) unless the config fixes them. """
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n = config.casualty_count
    if config.truths is not None:
        base = list(config.truths)
    else:
        network = network or config.load_network()
        samples = ancestral_samples(network, n, rng)
        base = []
        for i in range(n):
            labels = {f.value: network.variable(f.value).states[samples[i, network.index(f.value)]]
                      for f in FIELDS}
            base.append(GroundTruth("casualty-{:02d}".format(i + 1), labels))
    located = rng.random(n) < config.locate_probability
    arrivals = rng.uniform(config.arrival[0], config.arrival[1], n)
    positions = rng.uniform(0.0, config.area, (n, 2))
    truths = [attr.evolve(t, located=bool(t.located and located[i])) for i, t in enumerate(base)]
    return Scenario(seed, config, truths,
                    {t.casualty_id: (float(positions[i, 0]), float(positions[i, 1]))
                     for i, t in enumerate(truths)},
                    {t.casualty_id: float(arrivals[i]) for i, t in enumerate(truths)})


def emit_observations(scenario: Scenario, rng=None) -> List:
    """ Time-ordered messages and scan-complete events for the scenario.

    Each located casualty is visited at its arrival time; every sensor
    covering a field reports on it with the field's detection probability.
    The scan completes once the slowest sensor could have reported.
    """
    rng = as_generator(np.random.default_rng([scenario.seed, 1]) if rng is None else rng)
    config = scenario.config
    hinted = config.jitter == 0.0
    scan_delay = max((s.delay[1] for s in config.sensors), default=0.0)
    events = []
    for truth in scenario.truths:
        if not truth.located:
            continue
        cid = truth.casualty_id
        t0 = scenario.arrivals[cid]
        x, y = scenario.positions[cid]
        for sensor in config.sensors:
            for f in sensor.fields:
                u, v = rng.random(2)
                delay = rng.uniform(sensor.delay[0], sensor.delay[1])
                offset = rng.normal(0.0, config.jitter, 2) if not hinted else (0.0, 0.0)
                if u >= sensor.detection[f]:
                    continue
                row = np.cumsum(sensor.confusion[f][f.states.index(truth.labels[f])])
                label = f.states[min(int((v >= row).sum()), f.cardinality - 1)]
                events.append(PredictionMessage(
                    sensor.source, f, t0 + delay, label=label,
                    casualty_hint=cid if hinted else None,
                    position=None if hinted else (x + offset[0], y + offset[1])))
        if hinted:
            events.append(ScanComplete(t0 + scan_delay, casualty_id=cid))
        else:
            events.append(ScanComplete(t0 + scan_delay, position=(x, y)))
    events.sort(key=lambda e: e.timestamp)
    return events


def baseline_assessments(scenario: Scenario, events: Sequence) -> Dict[str, Assessment]:
    """ Raw-label arm: a field is reported only if some message for it
    arrived, with the latest label winning. Located casualties without any
    message get an all-abstain assessment. """
    latest = {}
    times = {}
    by_position = scenario.config.jitter != 0.0
    for e in events:
        if not isinstance(e, PredictionMessage):
            continue
        cid = e.casualty_hint if not by_position else _nearest_truth(scenario, e.position)
        latest.setdefault(cid, {})[e.field] = e.label
        times.setdefault(cid, []).append(e.timestamp)
    out = {}
    for truth in scenario.truths:
        if not truth.located:
            continue
        cid = truth.casualty_id
        stamps = times.get(cid)
        out[cid] = Assessment(cid, max(stamps) if stamps else scenario.arrivals[cid],
                              latest.get(cid, {}),
                              first_report=min(stamps) if stamps else None,
                              trigger="baseline")
    return out

def _nearest_truth(scenario: Scenario, position) -> str:
    best, best_d = None, None
    for truth in scenario.truths:
        if not truth.located:
            continue
        x, y = scenario.positions[truth.casualty_id]
        d = math.hypot(x - position[0], y - position[1])
        if best_d is None or d < best_d:
            best, best_d = truth.casualty_id, d
    return best

def fused_assessments(scenario: Scenario, events: Sequence,
                      network: BayesianNetwork) -> Dict[str, Assessment]:
    config = scenario.config
    service = FusionService(network, config.fusion, config.decision)
    for _ in service.replay(events, until=config.duration):
        pass
    found = service.assessments()
    if config.jitter == 0.0:
        return found
    out = {}
    for record in service.registry:
        if record.assessment is None or record.position is None:
            continue
        cid = _nearest_truth(scenario, record.position)
        if cid in out:
            logger.info("casualty %s matched by more than one record, keeping %s",
                        cid, out[cid].casualty_id)
            continue
        out[cid] = attr.evolve(record.assessment, casualty_id=cid)
    return out


@attr.s(frozen=True, slots=True)
class SimulationResult(object):
    seed = attr.ib()
    truths = attr.ib(converter=tuple)
    messages = attr.ib()
    baseline = attr.ib()            # casualty id -> Assessment
    fused = attr.ib()
    baseline_scores = attr.ib(type=ScoreReport)
    fused_scores = attr.ib(type=ScoreReport)
    baseline_metrics = attr.ib(type=Metrics)
    fused_metrics = attr.ib(type=Metrics)
    fused_located_metrics = attr.ib(type=Metrics)

    @property
    def comparison(self) -> Comparison:
        return compare_metrics(self.baseline_metrics, self.fused_metrics)

    def todict(self) -> dict:
        return {"seed": self.seed,
                "messages": self.messages,
                "truths": [t.todict() for t in self.truths],
                "baseline": {"assessments": [self.baseline[k].todict() for k in sorted(self.baseline)],
                             "scores": self.baseline_scores.todict(),
                             "metrics": self.baseline_metrics.todict()},
                "fused": {"assessments": [self.fused[k].todict() for k in sorted(self.fused)],
                          "scores": self.fused_scores.todict(),
                          "metrics": self.fused_metrics.todict(),
                          "located_metrics": self.fused_located_metrics.todict()},
                "comparison": self.comparison.todict()}

    def totext(self) -> str:
        from .scoring import format_metrics
        return "\n".join([
            "seed {}: {} messages".format(self.seed, self.messages),
            "",
            "baseline {}".format(self.baseline_scores.summary()),
            self.baseline_scores.totext(),
            "",
            "fused {}".format(self.fused_scores.summary()),
            self.fused_scores.totext(),
            "",
            format_metrics(self.fused_metrics, baseline=self.baseline_metrics)])


def run_simulation(scenario: Scenario, network: Optional[BayesianNetwork] = None,
                   rng=None) -> SimulationResult:
    """ Replay *scenario* through both arms and score them identically. """
    network = network or scenario.config.load_network()
    events = emit_observations(scenario, rng)
    messages = sum(1 for e in events if isinstance(e, PredictionMessage))
    baseline = baseline_assessments(scenario, events)
    fused = fused_assessments(scenario, events, network)
    gw, mode = scenario.gw, scenario.config.gw_mode
    result = SimulationResult(
        scenario.seed, scenario.truths, messages, baseline, fused,
        score_run(baseline, scenario.truths, gw, mode),
        score_run(fused, scenario.truths, gw, mode),
        compute_metrics(baseline, scenario.truths),
        compute_metrics(fused, scenario.truths),
        compute_metrics(fused, scenario.truths, located_only=True))
    logger.info("seed %s: baseline %s, fused %s", scenario.seed,
                result.baseline_scores.summary(), result.fused_scores.summary())
    return result


# Seed sweeps

@attr.s(frozen=True, slots=True)
class SweepRow(object):
    seed = attr.ib()
    baseline_reliability = attr.ib()
    baseline_performance = attr.ib()
    fused_reliability = attr.ib()
    fused_located_reliability = attr.ib()
    fused_performance = attr.ib()

@attr.s(frozen=True, slots=True)
class SweepSummary(object):
    rows = attr.ib(converter=tuple)

    @property
    def mean_baseline_reliability(self) -> float:
        return float(np.mean([r.baseline_reliability for r in self.rows]))

    @property
    def mean_fused_located_reliability(self) -> float:
        return float(np.mean([r.fused_located_reliability for r in self.rows]))

    @property
    def fused_wins(self) -> int:
        """ Seeds where fused performance is strictly higher. """
        return sum(1 for r in self.rows if r.fused_performance > r.baseline_performance)

    def todict(self) -> dict:
        return {"seeds": len(self.rows),
                "mean_baseline_reliability": self.mean_baseline_reliability,
                "mean_fused_located_reliability": self.mean_fused_located_reliability,
                "fused_wins": self.fused_wins,
                "rows": [attr.asdict(r) for r in self.rows]}

    def totext(self) -> str:
        return "\n".join([
            "seeds                          {}".format(len(self.rows)),
            "mean baseline reliability      {:.3f}".format(self.mean_baseline_reliability),
            "mean fused reliability (loc.)  {:.3f}".format(self.mean_fused_located_reliability),
            "fused performance higher       {}/{}".format(self.fused_wins, len(self.rows))])

def _sweep_one(args) -> SweepRow:
    config_dict, seed = args
    config = ScenarioConfig.fromdict(config_dict)
    result = run_simulation(generate_scenario(config, seed))
    return SweepRow(seed, result.baseline_metrics.reliability,
                    result.baseline_metrics.performance,
                    result.fused_metrics.reliability,
                    result.fused_located_metrics.reliability,
                    result.fused_metrics.performance)

def sweep(config: ScenarioConfig, seeds: Sequence[int], workers: int = 1) -> SweepSummary:
    """ Run independent seeds, in a process pool when *workers* > 1. """
    jobs = [(config.todict(), seed) for seed in seeds]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            rows = pool.map(_sweep_one, jobs)
    else:
        rows = [_sweep_one(job) for job in jobs]
    logger.info("swept %d seeds", len(rows))
    return SweepSummary(rows)
