"""Plain-text court report mirroring the served report's section layout."""

from __future__ import annotations

from typing import Mapping, Sequence

from .engine import RiskAssessment
from .factors import FactorVector

_METADATA_LINES = (
    ("Name", "name", "SF#", "sf_number"),
    ("DOB", "dob", "PSA Completion Date", "psa_completion_date"),
    ("Arrest Date", "arrest_date", None, None),
)


def _scale_line(title: str, selected: int) -> str:
    marks = []
    for value in range(1, 7):
        marks.append(f"[{value}]" if value == selected else f" {value} ")
        if value < 6:
            marks.append(" ")
    return f"{title:<34}{''.join(marks)}".rstrip()


def _yes_no(value: bool) -> str:
    return "Yes" if value else "No"


def _count_response(count: int, open_band: int) -> str:
    if count == 0:
        return "none"
    if count >= open_band:
        return f"{open_band} or more"
    return str(count)


def _factor_rows(factors: FactorVector) -> list[tuple[str, str]]:
    return [
        ("1. Age at Current Arrest",
         "23 or older" if factors.age_at_arrest >= 23 else "22 or younger"),
        ("2. Current Violent Offense", _yes_no(factors.current_violent_offense)),
        ("   a. Current Violent Offense & 20 Years Old or Younger",
         _yes_no(factors.violent_and_20_or_younger)),
        ("3. Pending Charge at Time of the Offense", _yes_no(factors.pending_charge)),
        ("4. Prior Misdemeanor Conviction", _yes_no(factors.prior_misdemeanor_conviction)),
        ("5. Prior Felony Conviction", _yes_no(factors.prior_felony_conviction)),
        ("   a. Prior Conviction", _yes_no(factors.prior_conviction)),
        ("6. Prior Violent Conviction",
         _count_response(factors.prior_violent_convictions, open_band=3)),
        ("7. Prior Failure to Appear in Past 2 Years",
         _count_response(factors.prior_fta_past_2y, open_band=2)),
        ("8. Prior Failure to Appear Older than 2 Years",
         _yes_no(factors.prior_fta_older_2y)),
        ("9. Prior Sentence Incarceration",
         _yes_no(factors.prior_sentence_incarceration)),
    ]


def render_court_report(
    assessment: RiskAssessment,
    factors: FactorVector,
    case_metadata: Mapping[str, str] | None = None,
    offenses: Sequence[str] = (),
) -> str:
    """Byte-stable rendering: fixed field order, "\\n" newlines, UTF-8 text."""
    metadata = dict(case_metadata or {})
    lines: list[str] = [
        "Pretrial Services",
        "Public Safety Assessment - Court Report",
        "",
    ]
    for left_label, left_key, right_label, right_key in _METADATA_LINES:
        left = f"{left_label}: {metadata.get(left_key, '')}"
        if right_label is None:
            lines.append(left.rstrip())
        else:
            right = f"{right_label}: {metadata.get(right_key, '')}"
            lines.append(f"{left:<36}{right}".rstrip())
    lines += [
        "",
        f"New Violent Criminal Activity Flag {_yes_no(assessment.nvca_flag)}",
        "",
        _scale_line("New Criminal Activity Scale", assessment.scaled_nca),
        _scale_line("Failure to Appear Scale", assessment.scaled_fta),
        "",
        "Booked Offense(s):",
    ]
    lines += [f"  {offense}" for offense in offenses] or ["  (none)"]
    lines += ["", f"{'Risk Factors:':<56}Responses:"]
    lines += [f"{label:<56}{response}" for label, response in _factor_rows(factors)]
    lines += [
        "",
        "Decision Making Framework Response",
        assessment.recommendation,
        "",
        f"Is this Response based on a Step 2 exclusion? {_yes_no(assessment.step2_applied)}",
        "Does this Response include a Step 4 increase? No",
        "",
    ]
    return "\n".join(lines)
