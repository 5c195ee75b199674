"""Word-level edit alignment and its natural-language revision rendering.

A hypothesis is aligned to a reference with the unit-cost edit-distance
matrix; backtracing the matrix gives an ordered edit script whose non-match
operations render one revision instruction each, e.g.

    "manual" should be deleted.
    "handbook" should be inserted after "kontact;".
"""

from __future__ import annotations

from dataclasses import dataclass

from .textops import TokenSeq, tokenize

MATCH = "match"
DELETE = "delete"
INSERT = "insert"
SUBSTITUTE = "substitute"

DELETE_TEMPLATE = '"{h_token}" should be deleted.'
SUBSTITUTE_TEMPLATE = '"{h_token}" should be replaced with "{r_token}".'
INSERT_TEMPLATE = '"{r_token}" should be inserted after "{prev_r_token}".'
INSERT_INITIAL_TEMPLATE = '"{r_token}" should be inserted at the beginning.'


@dataclass(frozen=True)
class EditOp:
    """One alignment step. Match/substitute carry both sides, delete only the
    hypothesis side, insert only the reference side."""

    kind: str
    h_index: int | None = None
    r_index: int | None = None
    h_token: str | None = None
    r_token: str | None = None


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]
    cost: int


@dataclass(frozen=True)
class FeedbackRecord:
    instructions: tuple[str, ...]
    script: EditScript


def cost_matrix(h: TokenSeq, r: TokenSeq) -> list[list[int]]:
    """Fill the (|h|+1) x (|r|+1) edit-distance matrix with unit costs.

    D(i,0)=i, D(0,j)=j; D(i,j)=D(i-1,j-1) when h[i-1]==r[j-1], else
    1 + min of the three neighbors.
    """
    rows, cols = len(h) + 1, len(r) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(1, rows):
        d[i][0] = i
    for j in range(1, cols):
        d[0][j] = j
    for i in range(1, rows):
        h_tok = h[i - 1]
        row, above = d[i], d[i - 1]
        for j in range(1, cols):
            if h_tok == r[j - 1]:
                row[j] = above[j - 1]
            else:
                row[j] = 1 + min(above[j], row[j - 1], above[j - 1])
    return d


def backtrace(matrix: list[list[int]], h: TokenSeq, r: TokenSeq) -> EditScript:
    """Recover one optimal edit script from a filled cost matrix.

    Ties are broken with priority match > substitute > delete > insert, so
    the result is deterministic for a given (h, r).
    """
    if len(matrix) != len(h) + 1 or any(len(row) != len(r) + 1 for row in matrix):
        raise ValueError(
            f"cost matrix dims do not fit sequences of length {len(h)} and {len(r)}"
        )
    ops: list[EditOp] = []
    i, j = len(h), len(r)
    while i > 0 or j > 0:
        if i > 0 and j > 0 and h[i - 1] == r[j - 1] and matrix[i][j] == matrix[i - 1][j - 1]:
            ops.append(EditOp(MATCH, i - 1, j - 1, h[i - 1], r[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and matrix[i][j] == matrix[i - 1][j - 1] + 1:
            ops.append(EditOp(SUBSTITUTE, i - 1, j - 1, h[i - 1], r[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and matrix[i][j] == matrix[i - 1][j] + 1:
            ops.append(EditOp(DELETE, h_index=i - 1, h_token=h[i - 1]))
            i -= 1
        elif j > 0 and matrix[i][j] == matrix[i][j - 1] + 1:
            ops.append(EditOp(INSERT, r_index=j - 1, r_token=r[j - 1]))
            j -= 1
        else:
            raise ValueError("cost matrix is inconsistent with the sequences")
    ops.reverse()
    return EditScript(tuple(ops), matrix[len(h)][len(r)])


def render_feedback(script: EditScript) -> FeedbackRecord:
    """Render one instruction per non-match op, in script order.

    Insertions anchor on the reference token just emitted before them; an
    insertion before any emission uses the "at the beginning" wording.
    """
    instructions: list[str] = []
    prev_r_token: str | None = None
    for op in script.ops:
        if op.kind == MATCH:
            prev_r_token = op.r_token
        elif op.kind == SUBSTITUTE:
            instructions.append(
                SUBSTITUTE_TEMPLATE.format(h_token=op.h_token, r_token=op.r_token)
            )
            prev_r_token = op.r_token
        elif op.kind == DELETE:
            instructions.append(DELETE_TEMPLATE.format(h_token=op.h_token))
        elif op.kind == INSERT:
            if prev_r_token is None:
                instructions.append(INSERT_INITIAL_TEMPLATE.format(r_token=op.r_token))
            else:
                instructions.append(
                    INSERT_TEMPLATE.format(r_token=op.r_token, prev_r_token=prev_r_token)
                )
            prev_r_token = op.r_token
        else:
            raise ValueError(f"unknown edit op kind: {op.kind!r}")
    return FeedbackRecord(tuple(instructions), script)


def apply_script(h: TokenSeq, script: EditScript) -> TokenSeq:
    """Replay a script against the hypothesis it was traced from.

    Returns the reference sequence. Rejects scripts whose h-side ops do not
    cover h exactly, which catches scripts applied to the wrong sequence.
    """
    out: list[str] = []
    cursor = 0
    for op in script.ops:
        if op.kind in (MATCH, SUBSTITUTE, DELETE):
            if op.h_index != cursor or cursor >= len(h) or h[cursor] != op.h_token:
                raise ValueError("script does not cover this hypothesis")
            cursor += 1
        if op.kind in (MATCH, SUBSTITUTE, INSERT):
            out.append(op.r_token)
    if cursor != len(h):
        raise ValueError("script does not cover this hypothesis")
    return out


def generate_feedback(hypothesis_text: str, reference_text: str) -> FeedbackRecord:
    """Tokenize (case-folded), align, and render revision instructions."""
    h = tokenize(hypothesis_text, lowercase=True)
    r = tokenize(reference_text, lowercase=True)
    return render_feedback(backtrace(cost_matrix(h, r), h, r))
