""" Canonical JSON: sorted keys, floats at a fixed precision, one record per
line for streams. """

import typing

import numpy as np
import ujson

from .errors import MalformedJson

DEFAULT_PRECISION = 6


def fixed_precision(obj, prec=DEFAULT_PRECISION):
    """ Recursively convert nested containers to plain lists and dicts with
    every float rounded to *prec* decimals. """
    if isinstance(obj, dict):
        return {str(k): fixed_precision(v, prec) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [fixed_precision(el, prec) for el in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = round(float(obj), prec)
        return 0.0 if value == 0.0 else value
    return obj

def dumps(obj, prec=DEFAULT_PRECISION, indent=0) -> str:
    return ujson.dumps(fixed_precision(obj, prec), sort_keys=True, indent=indent,
                       escape_forward_slashes=False)

def loads(s: str, source: str = "<string>"):
    try:
        return ujson.loads(s)
    except ValueError as e:
        raise MalformedJson(source, e)

def load(f):
    if hasattr(f, "read"):
        return loads(f.read(), getattr(f, "name", "<stream>"))
    with open(f) as fobj:
        return loads(fobj.read(), str(f))

def dump(obj, f, prec=DEFAULT_PRECISION, indent=2) -> None:
    text = dumps(obj, prec=prec, indent=indent) + "\n"
    if hasattr(f, "write"):
        f.write(text)
    else:
        with open(f, "w") as fobj:
            fobj.write(text)

def read_lines(f) -> typing.Iterator[dict]:
    """ Decode a newline-delimited stream, skipping blank lines. """
    if not hasattr(f, "read"):
        with open(f) as fobj:
            yield from read_lines(fobj)
        return
    source = getattr(f, "name", "<stream>")
    for lineno, line in enumerate(f, 1):
        line = line.strip()
        if line:
            yield loads(line, "{}:{}".format(source, lineno))

def write_lines(records: typing.Iterable, f, prec=DEFAULT_PRECISION) -> None:
    for rec in records:
        f.write(dumps(rec, prec=prec) + "\n")
