def docstring_insert(*s):
    """ Format shared parameter blocks into the decorated object's
    docstring. """
    def wrapped(obj):
        try:
            obj.__doc__ = obj.__doc__.format(*s)
        except (AttributeError, TypeError):
            pass
        return obj
    return wrapped

reader_args = """
    Parameters
    ----------
    check : bool
        Run the declaration checks (repeated variables, undeclared row states,
        repeated or missing rows) after reading (default True).
    """

writer_args = """
    Parameters
    ----------
    precision : int
        Decimal places written for every probability (default 6).
    """

policy_args = """
    Parameters
    ----------
    policy : FusionPolicy, optional
        Reduction, softening and matching options (default FusionPolicy()).
    decision : DecisionPolicy, optional
        Posterior-to-label rule (default plain argmax).
    """
