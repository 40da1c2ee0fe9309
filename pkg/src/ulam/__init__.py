"""Liar games: exact solving, closed-form thresholds, constructive strategies
and quasiball coverings."""

from .closed_forms import (
    f_1,
    f_star_1,
    f_star_2,
    paul_wins_1lie_original,
    paul_wins_1lie_pathological,
    paul_wins_2lie_pathological,
)
from .core import (
    GameSpec,
    QuestionVector,
    Response,
    StateVector,
    Variant,
    binom_le,
    character,
    covers,
    imbalance,
    majorizes,
    sphere_bound,
    transition,
    weight,
)
from .errors import (
    BudgetExceeded,
    CapacityError,
    DomainError,
    FormatError,
    LegalityError,
    ShapeError,
    StrategyInapplicable,
    UlamError,
    VerificationError,
)
from .solver import DecisionTree, Solver, Winner, f_original, f_star, max_winning_rounds, solve

__all__ = [name for name in dir() if not name.startswith("_")]
