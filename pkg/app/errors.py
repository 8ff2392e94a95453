"""
Exceptions raised by the planning toolkit.

Precondition / configuration problems also derive from ValueError so the
HTTP layer and the CLI can treat them as bad input.
"""


class PlanningError(Exception):
    pass


# --- tree / ledger -----------------------------------------------------------

class NodeNotPresent(PlanningError):
    def __init__(self, node):
        super().__init__(f"Node {node} is not in the tree.")
        self.node = node


class AlreadyOpened(PlanningError):
    def __init__(self, node):
        super().__init__(f"Node {node} was already opened.")
        self.node = node


class MissingSamples(PlanningError):
    def __init__(self, node):
        super().__init__(f"Edge entering {node} has no samples.")
        self.node = node


class BudgetExhausted(PlanningError):
    def __init__(self, requested: int, remaining: int):
        super().__init__(
            f"Budget exhausted: requested {requested}, remaining {remaining}.")
        self.requested = requested
        self.remaining = remaining


# --- preconditions -----------------------------------------------------------

class BudgetTooSmall(PlanningError, ValueError):
    pass


class NoisyEnvironment(PlanningError, ValueError):
    pass


class InvalidConfig(PlanningError, ValueError):
    pass


class InfeasibleHorizon(PlanningError, ValueError):
    pass


class InfeasibleParameters(PlanningError, ValueError):
    pass


class HorizonTooShallow(PlanningError, ValueError):
    pass


class ConfigError(PlanningError, ValueError):
    """Experiment config could not be parsed or validated."""

    def __init__(self, message: str, *, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
