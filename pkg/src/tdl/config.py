import os

from .errors import FormatError, TooLarge

DEFAULT_BUDGET = 10**8
BUDGET_ENV = "TDL_BUDGET"


def resolve_budget(budget=None):
    """Explicit argument wins, then ``$TDL_BUDGET``, then ``DEFAULT_BUDGET``."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"{BUDGET_ENV}={env!r} is not an integer") from None
    return DEFAULT_BUDGET


def check_budget(needed, budget=None, what="search space"):
    limit = resolve_budget(budget)
    if needed > limit:
        raise TooLarge(needed, limit, what)
    return limit
