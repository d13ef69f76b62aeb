""" Per-casualty evidence lifecycle.

Estimators publish time-stamped :class:`PredictionMessage` values. Each
message is matched to a casualty, appended to that casualty's evidence log,
and only folded into a posterior when an inference trigger fires: the scan
of a casualty completes, or the fixed cadence ticks.
"""

import logging
import math
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Union

import attr
import numpy as np

from . import jsonio, validators
from .docstrings import docstring_insert, policy_args
from .errors import (AllZeroLikelihood, InvalidMessage, NoPositionNoHint,
                     StaleMessage, ZeroProbabilityEvidence, BadConfig)
from .evidence import EvidenceSet
from .inference import Marginals, infer_marginals
from .network import BayesianNetwork
from .triage import FIELDS, Assessment, DecisionPolicy, VitalField, assess

logger = logging.getLogger(__name__)

LATEST_WINS = "latest_wins"
LIKELIHOOD_PRODUCT = "likelihood_product"
REDUCTIONS = (LATEST_WINS, LIKELIHOOD_PRODUCT)

SCAN_COMPLETE = "scan_complete"
CADENCE_TICK = "cadence_tick"
TRIGGERS = (SCAN_COMPLETE, CADENCE_TICK)


def _optional_floats(val):
    return None if val is None else tuple(float(x) for x in val)

def _optional_float(val):
    return None if val is None else float(val)


@attr.s(frozen=True, slots=True)
class PredictionMessage(object):
    """ One estimator output for one field: either a hard *label* or a
    *likelihood* vector over the field's states, never both. *timestamp* is
    in seconds since scenario start, *position* in meters. """
    source = attr.ib(validator=validators.identifier)
    field = attr.ib(converter=VitalField.parse)
    timestamp = attr.ib(converter=float, validator=validators.non_negative)
    label = attr.ib(default=None)
    likelihood = attr.ib(default=None, converter=_optional_floats)
    casualty_hint = attr.ib(default=None)
    position = attr.ib(default=None, converter=_optional_floats)
    confidence = attr.ib(default=None, converter=_optional_float,
                         validator=validators.optional_probability)

    def __attrs_post_init__(self):
        if (self.label is None) == (self.likelihood is None):
            raise InvalidMessage("message from '{}' on {} needs exactly one of label "
                                 "and likelihood".format(self.source, self.field))
        if self.label is not None and self.label not in self.field.states:
            raise InvalidMessage("'{}' is not a state of {}".format(self.label, self.field))
        if self.likelihood is not None:
            if len(self.likelihood) != self.field.cardinality:
                raise InvalidMessage("likelihood for {} has {} entries, expected {}"
                                     .format(self.field, len(self.likelihood),
                                             self.field.cardinality))
            if any(p < 0 or not math.isfinite(p) for p in self.likelihood):
                raise InvalidMessage("likelihood for {} must be non-negative".format(self.field))
        if self.position is not None and len(self.position) != 2:
            raise InvalidMessage("position must be two coordinates")

    @property
    def key(self):
        return (self.source, self.field)

    def todict(self) -> dict:
        d = {"source": self.source, "field": self.field.value, "timestamp": self.timestamp}
        for name in ("label", "likelihood", "casualty_hint", "position", "confidence"):
            value = getattr(self, name)
            if value is not None:
                d[name] = list(value) if isinstance(value, tuple) else value
        return d

    @classmethod
    def fromdict(cls, d: Mapping) -> "PredictionMessage":
        if not isinstance(d, Mapping):
            raise InvalidMessage("message must be a JSON object, received {!r}".format(d))
        d = dict(d)
        d.pop("event", None)
        try:
            return cls(**d)
        except InvalidMessage:
            raise
        except (TypeError, ValueError) as e:
            raise InvalidMessage(str(e))


@attr.s(frozen=True, slots=True)
class ScanComplete(object):
    """ The platform finished scanning a casualty, identified by id or by
    position. """
    timestamp = attr.ib(converter=float, validator=validators.non_negative)
    casualty_id = attr.ib(default=None)
    position = attr.ib(default=None, converter=_optional_floats)

    def todict(self) -> dict:
        d = {"event": SCAN_COMPLETE, "timestamp": self.timestamp}
        if self.casualty_id is not None:
            d["casualty_id"] = self.casualty_id
        if self.position is not None:
            d["position"] = list(self.position)
        return d

Event = Union[PredictionMessage, ScanComplete]

def event_fromdict(d: Mapping) -> Event:
    if not isinstance(d, Mapping) or d.get("event") != SCAN_COMPLETE:
        return PredictionMessage.fromdict(d)
    try:
        return ScanComplete(d["timestamp"], d.get("casualty_id"), d.get("position"))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidMessage("scan_complete event: {}".format(e))

def read_events(f) -> Iterator[Event]:
    """ Decode a newline-delimited message stream from a path or file. """
    for d in jsonio.read_lines(f):
        yield event_fromdict(d)

def write_events(events: Iterable[Event], f) -> None:
    jsonio.write_lines((e.todict() for e in events), f)


def _error_rates(d):
    rates = dict(d)
    for source, eps in rates.items():
        if not 0.0 <= eps < 0.5:
            raise ValueError("error rate for '{}' must lie in [0, 0.5), received {!r}"
                             .format(source, eps))
    return rates

@attr.s(frozen=True, slots=True)
class FusionPolicy(object):
    """ How retained messages become evidence.

    *reduction* applies per (source, field): ``latest_wins`` keeps the newest
    message, ``likelihood_product`` multiplies all of them. *overrides* maps
    ``"source"`` or ``"source:field"`` to a reduction. Hard labels become a
    one-hot likelihood softened by the source's error rate: ``1 - eps`` on
    the reported state and ``eps / (k - 1)`` elsewhere.
    """
    reduction = attr.ib(default=LATEST_WINS, validator=attr.validators.in_(REDUCTIONS))
    error_rate = attr.ib(default=0.1, validator=validators.error_rate)
    source_error_rates = attr.ib(factory=dict, converter=_error_rates)
    overrides = attr.ib(factory=dict, converter=dict)
    use_confidence = attr.ib(default=False)
    radius = attr.ib(default=2.0, validator=validators.positive)
    cadence = attr.ib(default=1.0, validator=validators.positive)

    def __attrs_post_init__(self):
        for key, reduction in self.overrides.items():
            if reduction not in REDUCTIONS:
                raise ValueError("override '{}' names unknown reduction '{}'"
                                 .format(key, reduction))

    def reduction_for(self, source: str, field: VitalField) -> str:
        return self.overrides.get("{}:{}".format(source, field),
                                  self.overrides.get(source, self.reduction))

    def epsilon(self, msg: PredictionMessage) -> float:
        if self.use_confidence and msg.confidence is not None:
            k = msg.field.cardinality
            return min(max(1.0 - msg.confidence, 0.0), (k - 1.0) / k)
        return self.source_error_rates.get(msg.source, self.error_rate)

    def soften(self, msg: PredictionMessage) -> np.ndarray:
        """ Likelihood vector carried by *msg*. """
        if msg.likelihood is not None:
            return np.array(msg.likelihood, dtype=float)
        k = msg.field.cardinality
        eps = self.epsilon(msg)
        vec = np.full(k, eps / (k - 1))
        vec[msg.field.states.index(msg.label)] = 1.0 - eps
        return vec

    def todict(self) -> dict:
        return attr.asdict(self)

    @classmethod
    def fromdict(cls, d: Mapping) -> "FusionPolicy":
        try:
            return cls(**d)
        except (TypeError, ValueError) as e:
            raise BadConfig("fusion policy: {}".format(e))


@attr.s(slots=True, eq=False)
class CasualtyRecord(object):
    """ Evidence and latest results for one casualty. The log is append-only
    and the record has a single writer. """
    casualty_id = attr.ib()
    first_seen = attr.ib(type=float)
    position = attr.ib(default=None)
    log = attr.ib(factory=list)                 # type: List[PredictionMessage]
    posterior = attr.ib(default=None)           # type: Optional[Marginals]
    assessment = attr.ib(default=None)          # type: Optional[Assessment]
    first_report = attr.ib(default=None)
    dirty = attr.ib(default=True)
    latest = attr.ib(factory=dict, repr=False)  # (source, field) -> timestamp


@attr.s(slots=True, eq=False)
class CasualtyRegistry(object):
    """ Casualty records in creation order. Unhinted casualties get ids
    ``c1, c2, ...``. """
    records = attr.ib(factory=dict)             # type: Dict[str, CasualtyRecord]
    counter = attr.ib(default=0)

    def __iter__(self):
        return iter(self.records.values())

    def __len__(self):
        return len(self.records)

    def __contains__(self, cid):
        return cid in self.records

    def __getitem__(self, cid) -> CasualtyRecord:
        return self.records[cid]

    def new_id(self) -> str:
        while True:
            self.counter += 1
            cid = "c{}".format(self.counter)
            if cid not in self.records:
                return cid

    def create(self, cid: Optional[str], first_seen: float, position=None) -> CasualtyRecord:
        if cid is None:
            cid = self.new_id()
        record = CasualtyRecord(cid, first_seen, position)
        self.records[cid] = record
        logger.debug("new casualty %s at t=%s", cid, first_seen)
        return record

    def nearest(self, position, radius: float) -> Optional[str]:
        best, best_d = None, None
        for record in self.records.values():
            if record.position is None:
                continue
            d = math.hypot(record.position[0] - position[0], record.position[1] - position[1])
            if d <= radius and (best_d is None or d < best_d):
                best, best_d = record.casualty_id, d
        return best


def match_casualty(msg: Event, registry: CasualtyRegistry, radius: float = 2.0) -> str:
    """ Casualty id for *msg*: its hint when present (created if new), else
    the nearest known casualty within *radius* meters, else a new casualty.
    """
    hint = getattr(msg, "casualty_hint", None) or getattr(msg, "casualty_id", None)
    if hint is not None:
        if hint not in registry:
            registry.create(hint, msg.timestamp, msg.position)
        return hint
    if msg.position is None:
        raise NoPositionNoHint(getattr(msg, "source", SCAN_COMPLETE))
    cid = registry.nearest(msg.position, radius)
    if cid is None:
        cid = registry.create(None, msg.timestamp, msg.position).casualty_id
    return cid

def ingest(msg: PredictionMessage, record: CasualtyRecord,
           policy: FusionPolicy = FusionPolicy()) -> CasualtyRecord:
    """ Append *msg* to the record's log without running inference.

    Raises StaleMessage when, under ``latest_wins``, the record already holds
    a newer message from the same source and field.
    """
    latest = record.latest.get(msg.key)
    if (latest is not None and msg.timestamp < latest
            and policy.reduction_for(msg.source, msg.field) == LATEST_WINS):
        raise StaleMessage(msg.source, msg.field.value, msg.timestamp, latest)
    record.log.append(msg)
    record.latest[msg.key] = max(msg.timestamp, latest if latest is not None else msg.timestamp)
    if msg.position is not None:
        record.position = msg.position
    record.dirty = True
    return record

def retained_messages(record: CasualtyRecord,
                      policy: FusionPolicy = FusionPolicy()) -> List[PredictionMessage]:
    """ Messages that contribute evidence, ordered by field, source and
    time so the result does not depend on ingestion order across keys. """
    groups = {}
    for i, msg in enumerate(record.log):
        groups.setdefault(msg.key, []).append((msg.timestamp, i, msg))
    kept = []
    for (source, field), entries in groups.items():
        entries.sort(key=lambda e: (e[0], e[1]))
        if policy.reduction_for(source, field) == LATEST_WINS:
            entries = entries[-1:]
        kept.extend(entries)
    rank = {f: i for i, f in enumerate(FIELDS)}
    kept.sort(key=lambda e: (rank[e[2].field], e[2].source, e[0], e[1]))
    return [msg for _, _, msg in kept]

def build_evidence(record: CasualtyRecord, policy: FusionPolicy,
                   network: BayesianNetwork) -> EvidenceSet:
    """ Virtual evidence from the record's retained messages. Fields without
    messages are left out and summed over by inference. A field whose
    certain reports contradict each other is left out with a warning. """
    ev = EvidenceSet(network)
    dropped = set()
    for msg in retained_messages(record, policy):
        name = msg.field.value
        if name in dropped:
            continue
        try:
            ev.add_virtual(name, policy.soften(msg))
        except AllZeroLikelihood:
            logger.warning("casualty %s: contradictory certain reports on %s, "
                           "treating the field as unobserved", record.casualty_id, name)
            ev.clear(name)
            dropped.add(name)
    return ev


@attr.s(frozen=True, slots=True, eq=False)
class Snapshot(object):
    posterior = attr.ib(type=Marginals)
    assessment = attr.ib(type=Assessment)

    def todict(self) -> dict:
        return self.assessment.todict()

def write_snapshots(snapshots: Iterable[Snapshot], f, flush: bool = False) -> int:
    """ Write one assessment per line as snapshots arrive and return the
    count. With *flush* every line is flushed, for live consumers. """
    n = 0
    for snap in snapshots:
        f.write(jsonio.dumps(snap.todict()) + "\n")
        if flush:
            f.flush()
        n += 1
    return n

@docstring_insert(policy_args)
def run_inference(record: CasualtyRecord, network: BayesianNetwork, trigger: str,
                  now: float, policy: FusionPolicy = FusionPolicy(),
                  decision: DecisionPolicy = DecisionPolicy()) -> Snapshot:
    """ Build evidence from the record, compute posteriors over all nine
    fields, decide labels and stamp the assessment with *now*. Both results
    are stored on the record. Identical logs give identical snapshots.

    If the evidence is impossible the error is logged and re-raised and the
    record keeps its previous assessment.
    {}"""
    if trigger not in TRIGGERS:
        raise ValueError("unknown trigger '{}'".format(trigger))
    ev = build_evidence(record, policy, network)
    try:
        posterior = infer_marginals(network, ev, query=[f.value for f in FIELDS])
    except ZeroProbabilityEvidence:
        logger.warning("casualty %s: evidence has zero probability, keeping previous "
                       "assessment", record.casualty_id)
        raise
    first = record.first_report if record.first_report is not None else now
    assessment = assess(posterior, record.casualty_id, now, decision,
                        first_report=first, trigger=trigger)
    record.posterior = posterior
    record.assessment = assessment
    record.first_report = first
    record.dirty = False
    logger.debug("casualty %s: %s inference at t=%s", record.casualty_id, trigger, now)
    return Snapshot(posterior, assessment)


@docstring_insert(policy_args)
class FusionService(object):
    """ Replays an event stream through matching, ingestion and triggered
    inference, collecting snapshots.

    Cadence ticks fall at multiples of ``1 / policy.cadence`` seconds and
    re-run inference only for casualties whose log changed. Stale messages
    and impossible evidence are logged and skipped. A service is a single
    writer; run one per thread.

    {}"""
    def __init__(self, network: BayesianNetwork, policy: FusionPolicy = FusionPolicy(),
                 decision: DecisionPolicy = DecisionPolicy()):
        self.network = network
        self.policy = policy
        self.decision = decision
        self.registry = CasualtyRegistry()
        self.snapshots = []         # type: List[Snapshot]
        self.dropped = 0
        self._ticks = 0
        return

    @property
    def period(self) -> float:
        return 1.0 / self.policy.cadence

    def submit(self, msg: PredictionMessage) -> Optional[str]:
        cid = match_casualty(msg, self.registry, self.policy.radius)
        try:
            ingest(msg, self.registry[cid], self.policy)
        except StaleMessage as e:
            logger.warning("dropped: %s", e)
            self.dropped += 1
            return None
        return cid

    def infer(self, cid: str, trigger: str, now: float) -> Optional[Snapshot]:
        try:
            snap = run_inference(self.registry[cid], self.network, trigger, now,
                                 self.policy, self.decision)
        except ZeroProbabilityEvidence:
            return None
        self.snapshots.append(snap)
        return snap

    def scan_complete(self, event: ScanComplete) -> Optional[Snapshot]:
        cid = match_casualty(event, self.registry, self.policy.radius)
        return self.infer(cid, SCAN_COMPLETE, event.timestamp)

    def tick(self, now: float) -> List[Snapshot]:
        out = []
        for record in list(self.registry):
            if record.dirty and record.log:
                snap = self.infer(record.casualty_id, CADENCE_TICK, now)
                if snap is not None:
                    out.append(snap)
        return out

    def advance(self, now: float) -> List[Snapshot]:
        """ Fire every cadence tick up to and including *now*. """
        out = []
        while (self._ticks + 1) * self.period <= now:
            self._ticks += 1
            out.extend(self.tick(self._ticks * self.period))
        return out

    def process(self, event: Event) -> List[Snapshot]:
        out = self.advance(event.timestamp)
        if isinstance(event, ScanComplete):
            snap = self.scan_complete(event)
            if snap is not None:
                out.append(snap)
        else:
            self.submit(event)
        return out

    def replay(self, events: Iterable[Event], until: Optional[float] = None) -> Iterator[Snapshot]:
        """ Process a time-ordered stream, yielding snapshots as they are
        produced. With *until*, cadence ticks continue to that time after
        the last event. """
        for event in events:
            for snap in self.process(event):
                yield snap
        if until is not None:
            for snap in self.advance(until):
                yield snap

    def assessments(self) -> Dict[str, Assessment]:
        return {r.casualty_id: r.assessment for r in self.registry
                if r.assessment is not None}
