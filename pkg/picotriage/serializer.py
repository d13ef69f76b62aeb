import ujson

from .docstrings import docstring_insert, writer_args
from .document import PRECISION, NetworkDocument


@docstring_insert(writer_args)
class Serializer(object):
    """ Writes network documents as canonical `.bnet` text or as the JSON
    mirror.

    Canonical text lists metadata by key, then variables and CPTs in
    variable declaration order, one CPT row per line with rows ordered by
    parent states (last parent varying fastest). Serializing a parsed
    canonical document reproduces it byte for byte.

    Usage:

        serializer = Serializer(precision=6)
        text = serializer(document)

    {}"""
    def __init__(self, precision: int = PRECISION):
        self.precision = precision
        return

    def __call__(self, doc):
        return self.tostring(doc)

    def _number(self, p: float) -> str:
        text = "{:.{}f}".format(p, self.precision)
        if text.startswith("-") and float(text) == 0.0:
            text = text[1:]
        return text

    def _ordered_cpts(self, doc):
        order = {v.name: i for i, v in enumerate(doc.variables)}
        return sorted(doc.cpts, key=lambda c: order.get(c.child, len(order)))

    def _ordered_rows(self, doc, cpt):
        parents = [doc.variable(p) for p in cpt.parents]
        if any(p is None for p in parents):
            return list(cpt.rows)

        def rank(row):
            try:
                return tuple(p.states.index(s) for p, s in zip(parents, row.key))
            except ValueError:
                return (len(row.key),)
        return sorted(cpt.rows, key=rank)

    def tostring(self, doc: NetworkDocument) -> str:
        lines = ["version {}".format(doc.version), ""]
        if doc.metadata:
            for key in sorted(doc.metadata):
                lines.append("meta {} = {}".format(
                    key, ujson.dumps(doc.metadata[key], ensure_ascii=False,
                                     escape_forward_slashes=False)))
            lines.append("")

        for v in doc.variables:
            lines.append("variable {} {{ {} }}".format(v.name, ", ".join(v.states)))
        lines.append("")

        for cpt in self._ordered_cpts(doc):
            head = "cpt {}".format(cpt.child)
            if cpt.parents:
                head += " | {}".format(", ".join(cpt.parents))
            lines.append(head + " {")
            for row in self._ordered_rows(doc, cpt):
                text = "    {}: {}".format(", ".join(row.key),
                                           " ".join(self._number(p) for p in row.probabilities))
                if row.band is not None:
                    text += " band={}".format(row.band)
                lines.append(text)
            lines.append("}")
            lines.append("")
        return "\n".join(lines).rstrip("\n") + "\n"

    def todict(self, doc: NetworkDocument) -> dict:
        cpts = []
        for cpt in self._ordered_cpts(doc):
            rows = []
            for row in self._ordered_rows(doc, cpt):
                r = {"key": list(row.key),
                     "probabilities": [round(p, self.precision) for p in row.probabilities]}
                if row.band is not None:
                    r["band"] = row.band
                rows.append(r)
            cpts.append({"child": cpt.child, "parents": list(cpt.parents), "rows": rows})
        return {"version": doc.version,
                "metadata": dict(doc.metadata),
                "variables": [{"name": v.name, "states": list(v.states)}
                              for v in doc.variables],
                "cpts": cpts}

    def tojson(self, doc: NetworkDocument) -> str:
        return ujson.dumps(self.todict(doc), indent=2, sort_keys=True,
                           escape_forward_slashes=False)

@docstring_insert(writer_args)
def serialize_network(doc: NetworkDocument, **kw) -> str:
    """ Canonical `.bnet` text for *doc*.
    {} """
    return Serializer(**kw).tostring(doc)

@docstring_insert(writer_args)
def tostring(doc: NetworkDocument, **kw) -> str:
    """ Serialize *doc* to `.bnet` text.
    {} """
    return Serializer(**kw).tostring(doc)

@docstring_insert(writer_args)
def tofile(doc: NetworkDocument, f, **kw) -> None:
    """ Serialize *doc* to a file, given as a path, pathlib.Path or file
    object.
    {} """
    if hasattr(f, "write"):
        f.write(tostring(doc, **kw))
    elif hasattr(f, "open"):
        with f.open("w") as fobj:
            fobj.write(tostring(doc, **kw))
    else:
        with open(f, "w") as fobj:
            fobj.write(tostring(doc, **kw))

@docstring_insert(writer_args)
def todict(doc: NetworkDocument, **kw) -> dict:
    """ The JSON mirror of *doc* as a dictionary.
    {} """
    return Serializer(**kw).todict(doc)

@docstring_insert(writer_args)
def tojson(doc: NetworkDocument, **kw) -> str:
    """ The JSON mirror of *doc* as a string.
    {} """
    return Serializer(**kw).tojson(doc)
