""" Evaluation: the per-casualty points rubric, run totals, and the
reliability/performance/accuracy metrics over (casualty, field) pairs.

Rubric per casualty (12 points at most):

    severe_hemorrhage, respiratory_distress   4 if correct inside the golden
                                              window, 2 if correct after it
    head/torso/lower/upper trauma             2 if all four correct, 1 if at
                                              least two are
    ocular/verbal/motor alertness             2 if all three correct, 1 if at
                                              least two are

An abstained field never matches and is never an attempt.
"""

from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Mapping, Optional, Sequence, Union

import attr

from . import jsonio
from .errors import CasualtyMismatch, ScoringError, UnknownLabel
from .triage import (ALERTNESS_GROUP, FIELDS, TRAUMA_GROUP, Assessment,
                     GoldenWindow, VitalField)

CASUALTY_MAXIMUM = 12
GW_MODES = ("snapshot", "first_report")
NOT_A_VALUE = "n/a"


def _check_label(field: VitalField, label: Optional[str]) -> None:
    if label is not None and label not in field.states:
        raise UnknownLabel(field.value, label)

def _truth_labels(d):
    labels = {VitalField.parse(k): v for k, v in dict(d).items()}
    missing = [f.value for f in FIELDS if f not in labels]
    if missing:
        raise ValueError("ground truth lacks fields: {}".format(", ".join(missing)))
    for f, label in labels.items():
        if label is None:
            raise ValueError("ground truth for {} cannot be empty".format(f))
        _check_label(f, label)
    return labels


@attr.s(frozen=True, slots=True)
class GroundTruth(object):
    """ True labels of one casualty and whether the system located it. """
    casualty_id = attr.ib()
    labels = attr.ib(converter=_truth_labels)
    located = attr.ib(default=True, converter=bool)

    def label(self, f: VitalField) -> str:
        return self.labels[VitalField.parse(f)]

    def todict(self) -> dict:
        return {"casualty_id": self.casualty_id,
                "labels": {f.value: self.labels[f] for f in FIELDS},
                "located": self.located}

    @classmethod
    def fromdict(cls, d: Mapping) -> "GroundTruth":
        return cls(d["casualty_id"], d["labels"], d.get("located", True))


def _records(obj, key):
    if isinstance(obj, dict):
        return obj[key]
    return obj

def _load_records(f, key, build):
    obj = jsonio.load(f)
    try:
        return [build(d) for d in _records(obj, key)]
    except ScoringError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ScoringError("{}: malformed {} record ({})".format(
            getattr(f, "name", f), key, e))

def load_truths(f) -> List[GroundTruth]:
    """ Ground truths from a JSON list, or an object with a ``truths`` list. """
    return _load_records(f, "truths", GroundTruth.fromdict)

def load_assessments(f) -> List[Assessment]:
    """ Assessments from a JSON list, or an object with an ``assessments``
    list. """
    return _load_records(f, "assessments", Assessment.fromdict)


# Rubric

def score_field_gw(field: Union[str, VitalField], predicted: Optional[str], truth: str,
                   in_gw: bool) -> int:
    field = VitalField.parse(field)
    _check_label(field, predicted)
    _check_label(field, truth)
    if predicted is None or predicted != truth:
        return 0
    return 4 if in_gw else 2

def _score_group(fields, predicted: Sequence[Optional[str]], truth: Sequence[str]) -> int:
    if len(predicted) != len(fields) or len(truth) != len(fields):
        raise ValueError("expected {} labels".format(len(fields)))
    matches = 0
    for f, p, t in zip(fields, predicted, truth):
        _check_label(f, p)
        _check_label(f, t)
        if p is not None and p == t:
            matches += 1
    if matches == len(fields):
        return 2
    return 1 if matches >= 2 else 0

def score_trauma_group(predicted: Sequence[Optional[str]], truth: Sequence[str]) -> int:
    """ Labels ordered head, torso, lower extremity, upper extremity. """
    return _score_group(TRAUMA_GROUP, predicted, truth)

def score_alertness_group(predicted: Sequence[Optional[str]], truth: Sequence[str]) -> int:
    """ Labels ordered ocular, verbal, motor. """
    return _score_group(ALERTNESS_GROUP, predicted, truth)


@attr.s(frozen=True, slots=True)
class CasualtyScore(object):
    casualty_id = attr.ib()
    hemorrhage = attr.ib(default=0)
    respiratory = attr.ib(default=0)
    trauma = attr.ib(default=0)
    alertness = attr.ib(default=0)
    located = attr.ib(default=True)

    @property
    def total(self) -> int:
        return self.hemorrhage + self.respiratory + self.trauma + self.alertness

    @property
    def maximum(self) -> int:
        return CASUALTY_MAXIMUM

    def todict(self) -> dict:
        d = attr.asdict(self)
        d["total"] = self.total
        return d

def score_casualty(assessment: Optional[Assessment], truth: GroundTruth,
                   in_gw: Optional[bool] = None, gw: GoldenWindow = GoldenWindow(),
                   mode: str = "snapshot") -> CasualtyScore:
    """ Rubric points for one casualty.

    Parameters
    ----------
    assessment : Assessment or None
        None, or an unlocated truth, scores as all fields abstained.
    in_gw : bool, optional
        Golden-window flag. When omitted it is judged from the assessment's
        snapshot time, or its first report time with ``mode="first_report"``.
    """
    if assessment is None or not truth.located:
        return CasualtyScore(truth.casualty_id, located=truth.located)
    if mode not in GW_MODES:
        raise ValueError("golden-window mode must be one of {}".format(", ".join(GW_MODES)))
    if in_gw is None:
        in_gw = gw.contains(assessment.report_time(mode))
    pred = [assessment.label(f) for f in FIELDS]
    true = [truth.labels[f] for f in FIELDS]
    return CasualtyScore(
        truth.casualty_id,
        hemorrhage=score_field_gw(FIELDS[0], pred[0], true[0], in_gw),
        respiratory=score_field_gw(FIELDS[1], pred[1], true[1], in_gw),
        trauma=score_trauma_group(pred[2:6], true[2:6]),
        alertness=score_alertness_group(pred[6:9], true[6:9]))


def _by_id(assessments) -> Dict[str, Assessment]:
    if isinstance(assessments, Mapping):
        return dict(assessments)
    return {a.casualty_id: a for a in assessments}

def _check_ids(found: Mapping[str, Assessment], truths: Sequence[GroundTruth]) -> None:
    known = {t.casualty_id for t in truths}
    if len(known) != len(truths):
        raise CasualtyMismatch("ground truth repeats a casualty id")
    extra = sorted(set(found) - known)
    if extra:
        raise CasualtyMismatch("assessments for casualties without ground truth: {}"
                               .format(", ".join(map(str, extra))))


@attr.s(frozen=True, slots=True)
class ScoreReport(object):
    """ Per-casualty rubric scores of one run. """
    entries = attr.ib(converter=tuple)

    @property
    def total(self) -> int:
        return sum(e.total for e in self.entries)

    @property
    def maximum(self) -> int:
        return CASUALTY_MAXIMUM * len(self.entries)

    def summary(self) -> str:
        return "{}/{}".format(self.total, self.maximum)

    def todict(self) -> dict:
        return {"casualties": [e.todict() for e in self.entries],
                "total": self.total, "maximum": self.maximum}

    def totext(self) -> str:
        lines = ["{:<12} {:>4} {:>5} {:>7} {:>6} {:>6}".format(
            "casualty", "hem", "resp", "trauma", "alert", "total")]
        for e in self.entries:
            lines.append("{:<12} {:>4} {:>5} {:>7} {:>6} {:>6}".format(
                str(e.casualty_id) if e.located else "{} (x)".format(e.casualty_id),
                e.hemorrhage, e.respiratory, e.trauma, e.alertness,
                "{}/{}".format(e.total, e.maximum)))
        lines.append("{:<12} {:>32}".format("run", self.summary()))
        return "\n".join(lines)

def score_run(assessments, truths: Sequence[GroundTruth], gw: GoldenWindow = GoldenWindow(),
              mode: str = "snapshot") -> ScoreReport:
    truths = list(truths)
    found = _by_id(assessments)
    _check_ids(found, truths)
    return ScoreReport(score_casualty(found.get(t.casualty_id), t, gw=gw, mode=mode)
                       for t in truths)


# Metrics

@attr.s(frozen=True, slots=True)
class FieldCounts(object):
    correct = attr.ib(default=0)
    attempts = attr.ib(default=0)

    @property
    def accuracy(self) -> Optional[float]:
        return self.correct / self.attempts if self.attempts else None

def _counts(d):
    return {VitalField.parse(k): v if isinstance(v, FieldCounts) else FieldCounts(**v)
            for k, v in dict(d).items()}

@attr.s(frozen=True, slots=True)
class Metrics(object):
    """ Correct assignments and assignment attempts over ``9 * casualties``
    possible (casualty, field) pairs. Accuracy is None when nothing was
    attempted. """
    correct = attr.ib()
    attempts = attr.ib()
    casualties = attr.ib()
    fields = attr.ib(factory=dict, converter=_counts)

    def __attrs_post_init__(self):
        if not 0 <= self.correct <= self.attempts <= self.possible:
            raise ValueError("counts must satisfy 0 <= correct <= attempts <= possible, "
                             "received {}, {}, {}".format(self.correct, self.attempts,
                                                          self.possible))

    @classmethod
    def from_counts(cls, correct: int, attempts: int, casualties: int) -> "Metrics":
        return cls(correct, attempts, casualties)

    @property
    def possible(self) -> int:
        return len(FIELDS) * self.casualties

    @property
    def reliability(self) -> float:
        return self.attempts / self.possible if self.possible else 0.0

    @property
    def performance(self) -> float:
        return self.correct / self.possible if self.possible else 0.0

    @property
    def accuracy(self) -> Optional[float]:
        return self.correct / self.attempts if self.attempts else None

    def todict(self) -> dict:
        d = {"correct": self.correct, "attempts": self.attempts,
             "casualties": self.casualties, "possible": self.possible,
             "reliability": self.reliability, "performance": self.performance,
             "accuracy": self.accuracy}
        if self.fields:
            d["fields"] = {f.value: {"correct": c.correct, "attempts": c.attempts,
                                     "accuracy": c.accuracy,
                                     "random_accuracy": random_baseline_accuracy(f)}
                           for f, c in self.fields.items()}
        return d

def compute_metrics(assessments, truths: Sequence[GroundTruth],
                    located_only: bool = False) -> Metrics:
    """ Count attempts and correct assignments per field.

    Every truth counts towards the possible assignments, located or not,
    unless *located_only* restricts the run to located casualties.
    """
    truths = list(truths)
    found = _by_id(assessments)
    _check_ids(found, truths)
    if located_only:
        truths = [t for t in truths if t.located]
    correct = {f: 0 for f in FIELDS}
    attempts = {f: 0 for f in FIELDS}
    for t in truths:
        a = found.get(t.casualty_id)
        if a is None or not t.located:
            continue
        for f in FIELDS:
            label = a.label(f)
            _check_label(f, label)
            if label is None:
                continue
            attempts[f] += 1
            if label == t.labels[f]:
                correct[f] += 1
    return Metrics(sum(correct.values()), sum(attempts.values()), len(truths),
                   {f: FieldCounts(correct[f], attempts[f]) for f in FIELDS})

def random_baseline_accuracy(field: Union[str, VitalField]) -> float:
    """ Accuracy of a classifier picking uniformly among the field's states. """
    return 1.0 / VitalField.parse(field).cardinality


@attr.s(frozen=True, slots=True)
class Comparison(object):
    baseline = attr.ib(type=Metrics)
    fused = attr.ib(type=Metrics)

    @property
    def reliability_delta(self) -> float:
        return self.fused.reliability - self.baseline.reliability

    @property
    def performance_delta(self) -> float:
        return self.fused.performance - self.baseline.performance

    @property
    def accuracy_delta(self) -> Optional[float]:
        if self.fused.accuracy is None or self.baseline.accuracy is None:
            return None
        return self.fused.accuracy - self.baseline.accuracy

    @property
    def fold_increase(self) -> Optional[float]:
        """ Ratio of correct assignments, fused over baseline. """
        if self.baseline.correct == 0:
            return None
        return self.fused.correct / self.baseline.correct

    def todict(self) -> dict:
        return {"baseline": self.baseline.todict(), "fused": self.fused.todict(),
                "reliability_delta": self.reliability_delta,
                "performance_delta": self.performance_delta,
                "accuracy_delta": self.accuracy_delta,
                "fold_increase": self.fold_increase}

def compare_metrics(baseline: Metrics, fused: Metrics) -> Comparison:
    return Comparison(baseline, fused)


# Formatting

def format_percent(x: Optional[float]) -> str:
    """ Whole percent, rounded half up after first rounding to a tenth of a
    percent: 25/55 prints as 46%. """
    if x is None:
        return NOT_A_VALUE
    tenths = (Decimal(x) * 100).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return "{}%".format(tenths.quantize(Decimal("1"), rounding=ROUND_HALF_UP))

def format_ratio(x: Optional[float], places: int = 2) -> str:
    if x is None:
        return NOT_A_VALUE
    fine = Decimal(x).quantize(Decimal(1).scaleb(-(places + 1)), rounding=ROUND_HALF_UP)
    return str(fine.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))

def _field_cell(c: Optional[FieldCounts]) -> str:
    if c is None:
        return "-"
    return "{}/{} {:>4}".format(c.correct, c.attempts, format_percent(c.accuracy))

def format_metrics(metrics: Metrics, baseline: Optional[Metrics] = None) -> str:
    """ Per-field correct assignments, attempts and accuracy next to the
    accuracy of a uniform random classifier, followed by the three ratios.
    With *baseline*, both arms are shown side by side. """
    arms = [("fused", metrics)] if baseline is None else [("baseline", baseline),
                                                          ("fused", metrics)]
    head = "{:<22}".format("field") + "".join(
        "{:>20}".format("{} correct/attempts".format(name) if len(arms) > 1
                        else "correct/attempts") for name, _ in arms)
    lines = [head + "{:>10}".format("random")]
    for f in FIELDS:
        cells = ["{:>20}".format(_field_cell(m.fields.get(f))) for _, m in arms]
        lines.append("{:<22}".format(f.value) + "".join(cells)
                     + "{:>10}".format(format_percent(random_baseline_accuracy(f))))
    lines.append("{:<22}".format("total") + "".join(
        "{:>20}".format("{}/{}".format(m.correct, m.attempts)) for _, m in arms))
    lines.append("{:<22}".format("reliability") + "".join(
        "{:>20}".format(format_ratio(m.reliability)) for _, m in arms))
    lines.append("{:<22}".format("performance") + "".join(
        "{:>20}".format(format_percent(m.performance)) for _, m in arms))
    lines.append("{:<22}".format("accuracy") + "".join(
        "{:>20}".format(format_percent(m.accuracy)) for _, m in arms))
    if baseline is not None:
        fold = compare_metrics(baseline, metrics).fold_increase
        lines.append("{:<22}{:>40}".format(
            "correct fold increase", NOT_A_VALUE if fold is None else format_ratio(fold)))
    return "\n".join(lines)
