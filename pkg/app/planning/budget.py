from dataclasses import dataclass
from enum import Enum

from ..environments.base import AccessMode
from ..errors import BudgetExhausted


class LedgerMode(str, Enum):
    FREE = "free"
    RESET = "reset"

    @classmethod
    def for_access(cls, access: AccessMode) -> "LedgerMode":
        return cls.RESET if access is AccessMode.RESET else cls.FREE


@dataclass
class BudgetLedger:
    """
    Integer accounting of evaluations against a budget n.

    One opening with m evaluations charges m units; in reset mode opening a
    depth-h node charges h more (the cost of replaying the path from the start
    state). `tolerance` is the extra unit some planners are allowed (n + 1).
    """
    limit: int
    mode: LedgerMode = LedgerMode.FREE
    tolerance: int = 0
    charged: int = 0

    def __post_init__(self):
        self.mode = LedgerMode(self.mode)
        if self.limit < 0:
            raise ValueError("Budget limit must be >= 0.")
        if self.tolerance not in (0, 1):
            raise ValueError("Ledger tolerance is 0 or 1.")

    @property
    def capacity(self) -> int:
        return self.limit + self.tolerance

    @property
    def remaining(self) -> int:
        return self.capacity - self.charged

    def opening_cost(self, m: int, depth: int) -> int:
        return m + (depth if self.mode is LedgerMode.RESET else 0)

    def can_afford(self, units: int) -> bool:
        return 0 <= units <= self.remaining

    def charge(self, units: int) -> None:
        if units < 0:
            raise ValueError("Cannot charge a negative amount.")
        if units > self.remaining:
            raise BudgetExhausted(units, self.remaining)
        self.charged += units

    def charge_opening(self, m: int, depth: int) -> None:
        self.charge(self.opening_cost(m, depth))
