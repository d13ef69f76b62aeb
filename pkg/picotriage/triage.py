""" The triage domain: the nine scored vital fields, elicitation bands, the
posterior-to-label decision policy, the golden window, and the shipped
default network. """

import enum
import os
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Union

import attr
import numpy as np

from . import validators
from .errors import MissingField, NegativeTime
from .network import BayesianNetwork

ASSET_DIR_ENV = "PICOTRIAGE_ASSET_DIR"
DEFAULT_NETWORK_FILE = "triage_default.bnet"


class VitalField(str, enum.Enum):
    """ The scored fields, in rubric order. Members compare equal to their
    variable names. """
    severe_hemorrhage = "severe_hemorrhage"
    respiratory_distress = "respiratory_distress"
    head_trauma = "head_trauma"
    torso_trauma = "torso_trauma"
    lower_ext_trauma = "lower_ext_trauma"
    upper_ext_trauma = "upper_ext_trauma"
    ocular_alertness = "ocular_alertness"
    verbal_alertness = "verbal_alertness"
    motor_alertness = "motor_alertness"

    def __str__(self):
        return self.value

    @property
    def states(self):
        return FIELD_STATES[self]

    @property
    def cardinality(self) -> int:
        return len(FIELD_STATES[self])

    @classmethod
    def parse(cls, name: Union[str, "VitalField"]) -> "VitalField":
        try:
            return cls(name)
        except ValueError:
            raise ValueError("'{}' is not a vital field".format(name))

FIELD_STATES = {
    VitalField.severe_hemorrhage: ("present", "absent"),
    VitalField.respiratory_distress: ("present", "absent"),
    VitalField.head_trauma: ("wound", "normal"),
    VitalField.torso_trauma: ("wound", "normal"),
    VitalField.lower_ext_trauma: ("normal", "wound", "amputation"),
    VitalField.upper_ext_trauma: ("normal", "wound", "amputation"),
    VitalField.ocular_alertness: ("open", "closed", "nt"),
    VitalField.verbal_alertness: ("normal", "absent", "abnormal", "nt"),
    VitalField.motor_alertness: ("normal", "absent", "abnormal", "nt"),
}

FIELDS = tuple(VitalField)
GW_FIELDS = (VitalField.severe_hemorrhage, VitalField.respiratory_distress)
TRAUMA_GROUP = (VitalField.head_trauma, VitalField.torso_trauma,
                VitalField.lower_ext_trauma, VitalField.upper_ext_trauma)
ALERTNESS_GROUP = (VitalField.ocular_alertness, VitalField.verbal_alertness,
                   VitalField.motor_alertness)


class ElicitationBand(str, enum.Enum):
    """ Qualitative strength of an elicited relationship. """
    strong = "strong"
    moderate = "moderate"
    weak = "weak"

    def interval(self, prior: Optional[float] = None):
        """ Probability interval of the band; the weak band is the point
        interval at the baseline *prior*. """
        if self is ElicitationBand.weak:
            return (prior, prior)
        return BAND_INTERVALS[self]

    def contains(self, p: float, prior: Optional[float] = None) -> bool:
        if self is ElicitationBand.weak:
            return True if prior is None else np.isclose(p, prior)
        lo, hi = BAND_INTERVALS[self]
        return lo <= p <= hi

BAND_INTERVALS = {
    ElicitationBand.strong: (0.8, 0.95),
    ElicitationBand.moderate: (0.4, 0.6),
}

BAND_REPRESENTATIVES = {
    ElicitationBand.strong: 0.9,
    ElicitationBand.moderate: 0.5,
}

def band_to_probability(band: Union[str, ElicitationBand], prior: float) -> float:
    """ Representative probability of a band: 0.9 for strong, 0.5 for
    moderate, the baseline *prior* itself for weak. """
    band = ElicitationBand(band)
    if band is ElicitationBand.weak:
        return prior
    return BAND_REPRESENTATIVES[band]


@attr.s(frozen=True, slots=True)
class BandAnnotation(object):
    """ An annotated CPT row and its annotated entry (the row maximum). """
    child = attr.ib()
    key = attr.ib()
    band = attr.ib(converter=ElicitationBand)
    state = attr.ib()
    probability = attr.ib()

    def in_band(self) -> bool:
        return self.band.contains(self.probability)

def band_annotations(net: BayesianNetwork) -> Iterator[BandAnnotation]:
    for cpt in net.cpts:
        for key, band in cpt.bands.items():
            row = cpt.row(key)
            i = int(np.argmax(row))
            yield BandAnnotation(cpt.child.name, key, band, cpt.child.states[i], float(row[i]))

def check_band_annotations(net: BayesianNetwork) -> List[BandAnnotation]:
    """ Annotated rows whose entry lies outside the band's interval. """
    return [a for a in band_annotations(net) if not a.in_band()]


# Decisions

ARGMAX = "argmax"
ARGMAX_WITH_ABSTAIN = "argmax_with_abstain"

@attr.s(frozen=True, slots=True)
class DecisionPolicy(object):
    """ Posterior-to-label rule. Ties go to the first declared state. """
    rule = attr.ib(default=ARGMAX,
                   validator=attr.validators.in_((ARGMAX, ARGMAX_WITH_ABSTAIN)))
    threshold = attr.ib(default=0.0, validator=validators.probability)

    @classmethod
    def fromdict(cls, d: Mapping) -> "DecisionPolicy":
        return cls(**d)

    def todict(self) -> dict:
        return attr.asdict(self)

def decide_assessment(marginals: Mapping[str, Sequence[float]],
                      policy: DecisionPolicy = DecisionPolicy(),
                      fields: Sequence[VitalField] = FIELDS) -> Dict[VitalField, Optional[str]]:
    """ Label every field with its most probable state. Under
    ``argmax_with_abstain`` a field whose largest posterior is below the
    threshold is left as None (no attempt). Posteriors need not be
    normalized. """
    missing = [str(f) for f in fields if f not in marginals]
    if missing:
        raise MissingField(missing)
    labels = {}
    for f in fields:
        vec = np.asarray(marginals[f], dtype=float)
        i = int(np.argmax(vec))
        label = f.states[i]
        if policy.rule == ARGMAX_WITH_ABSTAIN:
            if vec[i] / vec.sum() < policy.threshold:
                label = None
        labels[f] = label
    return labels


# Golden window

@attr.s(frozen=True, slots=True)
class GoldenWindow(object):
    """ Early interval after scenario start, closed at both ends. *duration*
    is in seconds. """
    duration = attr.ib(default=300.0, validator=validators.non_negative)

    def contains(self, t: float) -> bool:
        return in_golden_window(t, self)

def in_golden_window(t: float, gw: GoldenWindow = GoldenWindow()) -> bool:
    """ True when a report *t* seconds after scenario start is inside the
    window; the boundary ``t == duration`` counts as inside. """
    if t < 0:
        raise NegativeTime(t)
    return t <= gw.duration


# Assessments

def _labels(d):
    return {VitalField.parse(k): v for k, v in dict(d).items()}

@attr.s(frozen=True, slots=True)
class Assessment(object):
    """ Per-field labels for one casualty at one snapshot time. A None label
    is an abstention. """
    casualty_id = attr.ib()
    timestamp = attr.ib(type=float)
    labels = attr.ib(converter=_labels)
    max_posterior = attr.ib(factory=dict, converter=_labels)
    first_report = attr.ib(default=None)
    trigger = attr.ib(default=None)

    def label(self, f: VitalField) -> Optional[str]:
        return self.labels.get(f)

    @property
    def attempts(self) -> int:
        return sum(1 for f in FIELDS if self.labels.get(f) is not None)

    def report_time(self, mode: str = "snapshot") -> float:
        if mode == "first_report" and self.first_report is not None:
            return self.first_report
        return self.timestamp

    def todict(self) -> dict:
        d = {"casualty_id": self.casualty_id,
             "timestamp": self.timestamp,
             "labels": {f.value: self.labels.get(f) for f in FIELDS}}
        if self.max_posterior:
            d["max_posterior"] = {f.value: p for f, p in self.max_posterior.items()}
        if self.first_report is not None:
            d["first_report"] = self.first_report
        if self.trigger is not None:
            d["trigger"] = self.trigger
        return d

    @classmethod
    def fromdict(cls, d: Mapping) -> "Assessment":
        return cls(casualty_id=d["casualty_id"],
                   timestamp=float(d.get("timestamp", 0.0)),
                   labels=d.get("labels", {}),
                   max_posterior=d.get("max_posterior", {}),
                   first_report=d.get("first_report"),
                   trigger=d.get("trigger"))

def assess(marginals, casualty_id, timestamp: float,
           policy: DecisionPolicy = DecisionPolicy(), first_report=None,
           trigger=None) -> Assessment:
    """ Decide labels from *marginals* and stamp them as an Assessment. """
    labels = decide_assessment(marginals, policy)
    peaks = {}
    for f in FIELDS:
        vec = np.asarray(marginals[f], dtype=float)
        peaks[f] = float(vec.max() / vec.sum())
    return Assessment(casualty_id, timestamp, labels, peaks,
                      first_report=first_report, trigger=trigger)


# Assets

def asset_dir() -> str:
    """ Directory of shipped assets; ``PICOTRIAGE_ASSET_DIR`` overrides it. """
    return os.environ.get(ASSET_DIR_ENV) or os.path.join(os.path.dirname(__file__), "assets")

def resolve_asset(path: str) -> str:
    """ *path* itself when it exists, else its base name inside the asset
    directory. """
    if os.path.exists(path):
        return path
    candidate = os.path.join(asset_dir(), os.path.basename(path))
    if os.path.exists(candidate):
        return candidate
    return path

def default_network_path() -> str:
    return os.path.join(asset_dir(), DEFAULT_NETWORK_FILE)

def default_triage_network() -> BayesianNetwork:
    """ Compile the shipped default triage network. """
    from .deserializer import fromfile
    from .document import compile
    return compile(fromfile(default_network_path()))
