""" Exception hierarchy. Each family derives from a builtin so that callers
may catch broadly (``ValueError``) or narrowly (``CycleDetected``). """

import attr


@attr.s(frozen=True, slots=True)
class SourcePosition(object):
    """ One-based line and column of a declaration in a `.bnet` document. """
    line = attr.ib(type=int)
    column = attr.ib(type=int)

    def __str__(self):
        return "{}:{}".format(self.line, self.column)


class PositionedError(Exception):
    """ Mixin for errors that may point at a source position. """

    position = None

    def __str__(self):
        msg = super().__str__()
        if self.position is not None:
            return "{}: {}".format(self.position, msg)
        return msg

    @property
    def line(self):
        return None if self.position is None else self.position.line

    @property
    def column(self):
        return None if self.position is None else self.position.column


# Network definition

class NetworkError(PositionedError, ValueError):
    pass

class BnetSyntaxError(NetworkError):
    def __init__(self, msg, position):
        super().__init__(msg)
        self.position = position

class VersionUnsupported(NetworkError):
    def __init__(self, version, position=None):
        super().__init__("unsupported format version {}".format(version))
        self.version = version
        self.position = position

class DuplicateVariable(NetworkError):
    def __init__(self, variable, position=None):
        super().__init__("variable '{}' declared more than once".format(variable))
        self.variable = variable
        self.position = position

class DuplicateState(NetworkError):
    def __init__(self, variable, state, position=None):
        super().__init__("variable '{}' lists state '{}' more than once"
                         .format(variable, state))
        self.variable = variable
        self.state = state
        self.position = position

class UnknownVariable(NetworkError):
    def __init__(self, variable, position=None):
        super().__init__("unknown variable '{}'".format(variable))
        self.variable = variable
        self.position = position

class UnknownParent(NetworkError):
    def __init__(self, variable, parent, position=None):
        super().__init__("cpt '{}' names undeclared parent '{}'".format(variable, parent))
        self.variable = variable
        self.parent = parent
        self.position = position

class MissingCpt(NetworkError):
    def __init__(self, variable, position=None):
        super().__init__("variable '{}' has no cpt".format(variable))
        self.variable = variable
        self.position = position

class DuplicateCpt(NetworkError):
    def __init__(self, variable, position=None):
        super().__init__("variable '{}' has more than one cpt".format(variable))
        self.variable = variable
        self.position = position

class MissingRow(NetworkError):
    def __init__(self, variable, configuration, position=None):
        super().__init__("cpt '{}' has no row for parent states ({})"
                         .format(variable, ", ".join(configuration)))
        self.variable = variable
        self.configuration = tuple(configuration)
        self.position = position

class DuplicateRow(NetworkError):
    def __init__(self, variable, configuration, position=None):
        super().__init__("cpt '{}' repeats the row for parent states ({})"
                         .format(variable, ", ".join(configuration)))
        self.variable = variable
        self.configuration = tuple(configuration)
        self.position = position

class UnknownStateInRow(NetworkError):
    def __init__(self, variable, parent, state, position=None):
        super().__init__("cpt '{}' row uses state '{}' not declared for '{}'"
                         .format(variable, state, parent))
        self.variable = variable
        self.parent = parent
        self.state = state
        self.position = position

class ArityMismatch(NetworkError):
    def __init__(self, variable, configuration, expected, received, what="probabilities",
                 position=None):
        super().__init__("cpt '{}' row ({}) has {} {}, expected {}"
                         .format(variable, ", ".join(configuration), received, what, expected))
        self.variable = variable
        self.configuration = tuple(configuration)
        self.expected = expected
        self.received = received
        self.position = position

class RowNotNormalized(NetworkError):
    def __init__(self, variable, configuration, total, position=None):
        super().__init__("cpt '{}' row ({}) sums to {!r}"
                         .format(variable, ", ".join(configuration), total))
        self.variable = variable
        self.configuration = tuple(configuration)
        self.total = total
        self.position = position

class CycleDetected(NetworkError):
    def __init__(self, cycle, positions=()):
        super().__init__("parent graph has a cycle: {}"
                         .format(" -> ".join(list(cycle) + [cycle[0]])))
        self.cycle = tuple(cycle)
        self.positions = tuple(positions)
        self.position = self.positions[0] if self.positions else None

class InvalidNetwork(NetworkError):
    """ Raised with every violation found while compiling a network. """
    def __init__(self, errors):
        errors = list(errors)
        super().__init__("{} violation(s):\n  {}"
                         .format(len(errors), "\n  ".join(str(e) for e in errors)))
        self.errors = errors

    def __iter__(self):
        return iter(self.errors)


# Evidence

class EvidenceError(ValueError):
    pass

class UnknownState(EvidenceError):
    def __init__(self, variable, state):
        super().__init__("'{}' is not a state of '{}'".format(state, variable))
        self.variable = variable
        self.state = state

class IncompleteAssignment(EvidenceError):
    def __init__(self, missing):
        super().__init__("assignment is missing {}".format(", ".join(missing)))
        self.missing = tuple(missing)

class LengthMismatch(EvidenceError):
    def __init__(self, variable, expected, received):
        super().__init__("likelihood for '{}' has {} entries, expected {}"
                         .format(variable, received, expected))
        self.variable = variable
        self.expected = expected
        self.received = received

class AllZeroLikelihood(EvidenceError):
    def __init__(self, variable):
        super().__init__("likelihood for '{}' has no positive entry".format(variable))
        self.variable = variable

class ConflictsWithHardEvidence(EvidenceError):
    def __init__(self, variable):
        super().__init__("'{}' already carries evidence of the other kind".format(variable))
        self.variable = variable


# Inference

class InferenceError(ArithmeticError):
    pass

class ZeroProbabilityEvidence(InferenceError):
    def __init__(self, msg="evidence has probability zero under the network"):
        super().__init__(msg)

class StateSpaceTooLarge(InferenceError):
    def __init__(self, cells, cap):
        super().__init__("joint state space has {} cells, cap is {}".format(cells, cap))
        self.cells = cells
        self.cap = cap


# Triage domain

class TriageError(ValueError):
    pass

class MissingField(TriageError):
    def __init__(self, fields):
        super().__init__("marginals do not cover {}".format(", ".join(fields)))
        self.fields = tuple(fields)

class NegativeTime(TriageError):
    def __init__(self, t):
        super().__init__("report time {} is before scenario start".format(t))
        self.time = t


# Fusion

class FusionError(ValueError):
    pass

class InvalidMessage(FusionError):
    pass

class NoPositionNoHint(FusionError):
    def __init__(self, source):
        super().__init__("message from '{}' has neither casualty hint nor position"
                         .format(source))
        self.source = source

class StaleMessage(FusionError):
    def __init__(self, source, field, timestamp, latest):
        super().__init__("message from '{}' on {} at t={} is older than t={}"
                         .format(source, field, timestamp, latest))
        self.source = source
        self.field = field
        self.timestamp = timestamp
        self.latest = latest


# Scoring

class ScoringError(ValueError):
    pass

class UnknownLabel(ScoringError):
    def __init__(self, field, label):
        super().__init__("'{}' is not a label of {}".format(label, field))
        self.field = field
        self.label = label

class CasualtyMismatch(ScoringError):
    pass


# Configuration

class BadConfig(ValueError):
    pass


# Input files

class MalformedJson(ValueError):
    def __init__(self, source, reason):
        super().__init__("{}: not valid JSON ({})".format(source, reason))
        self.source = source
