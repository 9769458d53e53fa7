"""Expert-vote aggregation into occupation labels.

Each expert answers yes/no (or skips) per occupation. Per occupation we keep
the share of yes votes (``mean``), the majority label (``mode``; an exact
50/50 split resolves to 0) and a ``consensus`` label that only exists when at
least ``threshold`` of the responding experts agree.
"""
import csv
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .data import validate_isco
from .errors import BadEnumValue, DuplicateLabel, MissingColumn, NoVotes

DEFAULT_THRESHOLD = 0.75
VOTE_COLUMNS = ("isco4", "expert_id", "vote")
LABEL_COLUMNS = ("isco4", "mean", "mode", "consensus", "n_votes")


@dataclass(frozen=True)
class ExpertVoteSet:
    occupations: tuple
    # one tuple per occupation, one slot per expert: True/False/None (skipped)
    votes: tuple

    def __post_init__(self):
        if len(self.occupations) != len(self.votes):
            raise ValueError("occupations and votes differ in length")


@dataclass(frozen=True)
class OccupationLabel:
    isco4: str
    mean: float
    mode: int
    consensus: Optional[int]
    n_votes: int


def label_from_votes(isco4, votes, threshold=DEFAULT_THRESHOLD):
    cast = [v for v in votes if v is not None]
    n = len(cast)
    if n == 0:
        raise NoVotes(f"occupation {isco4} has no recorded votes")
    yes = sum(1 for v in cast if v)
    share_yes = Fraction(yes, n)
    mode = 1 if share_yes > Fraction(1, 2) else 0
    # exact rational comparison: 3/4 must meet a 0.75 threshold
    t = Fraction(threshold).limit_denominator(10**9)
    agree = max(share_yes, 1 - share_yes)
    consensus = mode if agree >= t else None
    return OccupationLabel(isco4=isco4, mean=yes / n, mode=mode, consensus=consensus, n_votes=n)


def aggregate_labels(votes, threshold=DEFAULT_THRESHOLD):
    """Mean, mode and consensus label for every occupation in ``votes``."""
    return [
        label_from_votes(code, vs, threshold)
        for code, vs in zip(votes.occupations, votes.votes)
    ]


def attach_labels(records, labels):
    """Join labels onto workers by exact 4-digit code: ``{worker id: label or None}``."""
    by_code = {}
    for lab in labels:
        if lab.isco4 in by_code:
            raise DuplicateLabel(f"isco4 {lab.isco4} labelled twice")
        by_code[lab.isco4] = lab
    return {r.id: by_code.get(r.isco4) for r in records}


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def parse_votes_csv(path):
    """Read ``isco4,expert_id,vote`` rows; vote is 1, 0 or empty (skipped).

    Occupations and experts keep their order of first appearance.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in VOTE_COLUMNS:
            if col not in header:
                raise MissingColumn(f"row 1 (header), column {col!r}: missing from {path}")
        table = OrderedDict()
        experts = OrderedDict()
        for rowno, row in enumerate(reader, start=2):
            code = (row["isco4"] or "").strip()
            validate_isco(code)
            raw = (row["vote"] or "").strip()
            if raw == "":
                v = None
            elif raw in ("0", "1"):
                v = raw == "1"
            else:
                raise BadEnumValue(f"row {rowno}, column 'vote': expected 1, 0 or empty (got {raw!r})")
            expert = (row["expert_id"] or "").strip()
            experts.setdefault(expert, len(experts))
            table.setdefault(code, {})[expert] = v
    if not table:
        raise NoVotes(f"{path} contains no votes")
    n_exp = len(experts)
    occupations, votes = [], []
    for code, per_expert in table.items():
        slots = [None] * n_exp
        for e, v in per_expert.items():
            slots[experts[e]] = v
        occupations.append(code)
        votes.append(tuple(slots))
    return ExpertVoteSet(tuple(occupations), tuple(votes))


def write_votes_csv(votes, path, expert_ids=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VOTE_COLUMNS)
        for code, vs in zip(votes.occupations, votes.votes):
            for j, v in enumerate(vs):
                eid = expert_ids[j] if expert_ids else f"E{j + 1:03d}"
                w.writerow([code, eid, "" if v is None else int(v)])


def write_labels_csv(labels, path, precision=None):
    """Write labels; ``consensus`` is empty when absent.

    ``precision=None`` stores the mean at full precision so the file reads
    back bit-identically; ``precision=3`` gives the familiar 3-decimal table.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_COLUMNS)
        for lab in labels:
            mean = repr(lab.mean) if precision is None else f"{lab.mean:.{precision}f}"
            w.writerow([
                lab.isco4, mean, lab.mode,
                "" if lab.consensus is None else lab.consensus, lab.n_votes,
            ])


def parse_labels_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in LABEL_COLUMNS:
            if col not in header:
                raise MissingColumn(f"row 1 (header), column {col!r}: missing from {path}")
        out = []
        for row in reader:
            cons = row["consensus"].strip()
            out.append(OccupationLabel(
                isco4=validate_isco(row["isco4"].strip()),
                mean=float(row["mean"]),
                mode=int(row["mode"]),
                consensus=None if cons in ("", ".") else int(cons),
                n_votes=int(row["n_votes"]),
            ))
    return out
