"""Exception types shared across the toolkit."""


class PohammerError(Exception):
    """Base class for all toolkit errors."""


class SignatureError(PohammerError):
    """A relation symbol is missing, duplicated, or used at the wrong arity."""


class DomainError(PohammerError):
    """A domain element lies outside a structure's universe."""


class PreconditionError(PohammerError):
    """An operation was called on input that violates its contract."""


class BlowupError(PohammerError):
    """Clause-form conversion exceeded the configured size cap."""

    def __init__(self, attempted_clauses: int, size_cap: int):
        self.attempted_clauses = attempted_clauses
        self.size_cap = size_cap
        super().__init__(
            f"clause normalization would produce {attempted_clauses} clauses "
            f"(cap is {size_cap})"
        )


class BudgetExceededError(PohammerError):
    """Model checking ran out of its game-tree node budget.

    Carries the number of nodes expanded so far; never stands for a truth
    value.
    """

    def __init__(self, nodes_expanded: int, budget: int):
        self.nodes_expanded = nodes_expanded
        self.budget = budget
        super().__init__(
            f"evaluation budget exhausted after {nodes_expanded} game-tree nodes "
            f"(budget {budget})"
        )


class EnumerationLimitError(PohammerError):
    """Exhaustive structure enumeration would exceed the configured ceiling."""

    def __init__(self, count: int, ceiling: int):
        self.count = count
        self.ceiling = ceiling
        super().__init__(
            f"exhaustive enumeration would visit {count} structures "
            f"(ceiling {ceiling})"
        )
