"""The nine-factor input record consumed by the scoring pipeline."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Mapping

from ..errors import ValidationError

AGE_MIN = 12
AGE_MAX = 120

_BOOL_FIELDS = (
    "current_violent_offense",
    "violent_and_20_or_younger",
    "pending_charge",
    "prior_misdemeanor_conviction",
    "prior_felony_conviction",
    "prior_conviction",
    "prior_fta_older_2y",
    "prior_sentence_incarceration",
)
_COUNT_FIELDS = ("prior_violent_convictions", "prior_fta_past_2y")


@dataclass(frozen=True)
class FactorVector:
    """One defendant's factor responses.

    Counts are open-ended non-negative integers; the weight tables band them
    (e.g. "3 or more"), so 3 and 7 prior violent convictions score alike.
    """

    age_at_arrest: int
    current_violent_offense: bool = False
    violent_and_20_or_younger: bool = False
    pending_charge: bool = False
    prior_misdemeanor_conviction: bool = False
    prior_felony_conviction: bool = False
    prior_conviction: bool = False
    prior_violent_convictions: int = 0
    prior_fta_past_2y: int = 0
    prior_fta_older_2y: bool = False
    prior_sentence_incarceration: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.age_at_arrest, int) or isinstance(self.age_at_arrest, bool):
            raise ValidationError(
                f"age_at_arrest must be an integer, got {self.age_at_arrest!r}",
                invariant="age_bounds",
            )
        if not (AGE_MIN <= self.age_at_arrest <= AGE_MAX):
            raise ValidationError(
                f"age_at_arrest must be within [{AGE_MIN}, {AGE_MAX}], "
                f"got {self.age_at_arrest}",
                invariant="age_bounds",
            )
        for name in _BOOL_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, bool):
                raise ValidationError(
                    f"{name} must be a boolean, got {value!r}", invariant="field_types"
                )
        for name in _COUNT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValidationError(
                    f"{name} must be a non-negative integer, got {value!r}",
                    invariant="field_types",
                )
        if self.prior_conviction != (
            self.prior_misdemeanor_conviction or self.prior_felony_conviction
        ):
            raise ValidationError(
                "prior_conviction must equal prior_misdemeanor_conviction OR "
                "prior_felony_conviction",
                invariant="prior_conviction_consistency",
            )
        if self.violent_and_20_or_younger and not (
            self.current_violent_offense and self.age_at_arrest <= 20
        ):
            raise ValidationError(
                "violent_and_20_or_younger requires current_violent_offense and "
                "age_at_arrest <= 20",
                invariant="violent_and_young_consistency",
            )

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "FactorVector":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(
                f"unknown factor field(s): {sorted(unknown)}", invariant="field_names"
            )
        if "age_at_arrest" not in data:
            raise ValidationError("age_at_arrest is required", invariant="field_names")
        return cls(**dict(data))

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace(self, **changes: Any) -> "FactorVector":
        merged = self.as_dict()
        merged.update(changes)
        return FactorVector(**merged)
