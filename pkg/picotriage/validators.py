from numbers import Number

import numpy as np

# States

def state_list(cls, attr, val):
    if len(val) < 2:
        raise ValueError("received {} but require at least two states".format(list(val)))
    if any(not isinstance(s, str) or s == "" for s in val):
        raise TypeError("states must be non-empty strings, received {}".format(list(val)))

def identifier(cls, attr, val):
    if not isinstance(val, str) or val == "":
        raise TypeError("received {!r} but require a non-empty name".format(val))

# Probabilities

def probability(cls, attr, val):
    if not isinstance(val, Number) or not 0.0 <= val <= 1.0:
        raise ValueError("{} must be a probability, received {!r}".format(attr.name, val))

def optional_probability(cls, attr, val):
    if val is not None:
        probability(cls, attr, val)

def error_rate(cls, attr, val):
    if not isinstance(val, Number) or not 0.0 <= val < 0.5:
        raise ValueError("{} must lie in [0, 0.5), received {!r}".format(attr.name, val))

def non_negative(cls, attr, val):
    if not isinstance(val, Number) or val < 0:
        raise ValueError("{} must be non-negative, received {!r}".format(attr.name, val))

def positive(cls, attr, val):
    if not isinstance(val, Number) or val <= 0:
        raise ValueError("{} must be positive, received {!r}".format(attr.name, val))

def stochastic_matrix(cls, attr, val):
    for key, matrix in val.items():
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("confusion for {} must be square, received shape {}"
                             .format(key, arr.shape))
        if np.any(arr < 0) or not np.allclose(arr.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValueError("confusion rows for {} must be probability vectors".format(key))
