# Copyright (c) 2026 Pointmatic
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""MPS export of planning MILPs and a reader for the same subset."""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from tepps._exceptions import MpsNameError
from tepps._milp import MilpProblem

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import TextIO

    from numpy.typing import NDArray

_log = logging.getLogger("tepps")

OBJECTIVE_ROW = "COST"
FIXED_NAME_WIDTH = 8


def _num(value: float) -> str:
    return f"{value:.12g}"


def _mangle(name: str, prefix: str, free: bool) -> str:
    limit = None if free else FIXED_NAME_WIDTH
    if not any(ch.isspace() for ch in name) and (limit is None or len(name) <= limit):
        return name
    digest = hashlib.sha1(name.encode("utf-8")).hexdigest()[:7]
    return f"{prefix}{digest}"


def mps_names(names: Sequence[str], prefix: str, free: bool = False) -> list[str]:
    """MPS-safe names: short names are kept, others become ``prefix`` + 7 hex digits.

    Raises:
        MpsNameError: two names coincide before or after mangling.
    """
    duplicates = [name for name, count in Counter(names).items() if count > 1]
    if duplicates:
        raise MpsNameError([f"duplicate name {name!r}" for name in sorted(duplicates)])
    mangled = [_mangle(name, prefix, free) for name in names]
    owners: dict[str, list[str]] = {}
    for original, short in zip(names, mangled):
        owners.setdefault(short, []).append(original)
    collisions = [
        f"{short} <- {', '.join(originals)}"
        for short, originals in sorted(owners.items())
        if len(originals) > 1
    ]
    if collisions:
        raise MpsNameError(collisions)
    return mangled


class _Lines:
    def __init__(self, stream: TextIO, free: bool) -> None:
        self._stream = stream
        self._free = free

    def section(self, header: str) -> None:
        self._stream.write(header + "\n")

    def entry(self, code: str, name: str, *rest: str) -> None:
        if self._free:
            fields = [code, name, *rest] if code else [name, *rest]
            self._stream.write(" " + " ".join(fields) + "\n")
            return
        # Fixed columns 2-3, 5-12, 15-22, 25-36.
        line = f" {code:<2} {name:<8}"
        if rest:
            line += f"  {rest[0]:<8}"
        if len(rest) > 1:
            line += f"  {rest[1]:>12}"
        self._stream.write(line.rstrip() + "\n")


def write_mps(milp: MilpProblem, stream: TextIO, free: bool = False, name: str = "TEPPS") -> None:
    """Write ``milp`` in fixed (default) or free MPS format.

    Binaries are wrapped in ``INTORG``/``INTEND`` markers and bounded to
    [0, 1]; numbers carry 12 significant digits.

    Raises:
        MpsNameError: names collide after mangling.
        ValueError: the objective has a constant term.
    """
    if milp.objective_offset != 0.0:
        raise ValueError(f"objective must be constant-free, got offset {milp.objective_offset}")
    cols = mps_names(milp.var_names, "C", free)
    ub_rows = mps_names(milp.ub_names, "R", free)
    eq_rows = mps_names(milp.eq_names, "E", free)
    clash = {OBJECTIVE_ROW} & (set(ub_rows) | set(eq_rows))
    clash |= set(ub_rows) & set(eq_rows)
    if clash:
        raise MpsNameError([f"row name {row!r} used twice" for row in sorted(clash)])

    out = _Lines(stream, free)
    out.section(f"NAME          {name}")
    out.section("ROWS")
    out.entry("N", OBJECTIVE_ROW)
    for row in ub_rows:
        out.entry("L", row)
    for row in eq_rows:
        out.entry("E", row)

    out.section("COLUMNS")
    a_ub = sp.csc_matrix(milp.a_ub)
    a_eq = sp.csc_matrix(milp.a_eq)
    binaries = set(milp.binaries)
    in_marker = False
    markers = 0
    for j, col in enumerate(cols):
        is_binary = j in binaries
        if is_binary != in_marker:
            tag = "'INTORG'" if is_binary else "'INTEND'"
            out.entry("", f"MARKER{markers:02d}", "'MARKER'", tag)
            markers += 1
            in_marker = is_binary
        entries: list[tuple[str, float]] = []
        if milp.c[j] != 0.0:
            entries.append((OBJECTIVE_ROW, float(milp.c[j])))
        for matrix, rows in ((a_ub, ub_rows), (a_eq, eq_rows)):
            start, end = matrix.indptr[j], matrix.indptr[j + 1]
            for i, value in zip(matrix.indices[start:end], matrix.data[start:end]):
                if value != 0.0:
                    entries.append((rows[i], float(value)))
        if not entries:
            # Keeps the column declared for readers that build columns from this section.
            entries.append((OBJECTIVE_ROW, 0.0))
        for row, value in entries:
            out.entry("", col, row, _num(value))
    if in_marker:
        out.entry("", f"MARKER{markers:02d}", "'MARKER'", "'INTEND'")

    out.section("RHS")
    for rows, values in ((ub_rows, milp.b_ub), (eq_rows, milp.b_eq)):
        for row, value in zip(rows, values):
            if value != 0.0:
                out.entry("", "RHS", row, _num(float(value)))

    out.section("BOUNDS")
    for j, col in enumerate(cols):
        lo, hi = float(milp.lb[j]), float(milp.ub[j])
        if j in binaries:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        for code, value in _bound_records(lo, hi):
            if value is None:
                out.entry(code, "BND", col)
            else:
                out.entry(code, "BND", col, _num(value))
    out.section("ENDATA")
    _log.info(
        "Wrote %s MPS: %d columns, %d rows, %d binaries",
        "free" if free else "fixed",
        len(cols),
        len(ub_rows) + len(eq_rows),
        len(binaries),
    )


def _bound_records(lo: float, hi: float) -> list[tuple[str, float | None]]:
    if lo == hi:
        return [("FX", lo)]
    if lo == -np.inf and hi == np.inf:
        return [("FR", None)]
    records: list[tuple[str, float | None]] = []
    if lo == -np.inf:
        records.append(("MI", None))
    elif lo != 0.0:
        records.append(("LO", lo))
    if hi != np.inf:
        records.append(("UP", hi))
    return records


def read_mps(stream: TextIO) -> MilpProblem:
    """Read the MPS subset produced by :func:`write_mps` (fixed or free).

    ``G`` rows are negated into ``<=`` rows; integer columns must be binary.

    Raises:
        ValueError: the file uses an unsupported feature.
    """
    section = ""
    objective: str | None = None
    row_kind: dict[str, str] = {}
    row_order: list[str] = []
    col_index: dict[str, int] = {}
    coefficients: dict[tuple[str, int], float] = {}
    integer_cols: set[int] = set()
    rhs: dict[str, float] = {}
    lower: dict[int, float] = {}
    upper: dict[int, float] = {}
    in_integer = False

    for raw in stream:
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("*"):
            continue
        if not line[0].isspace():
            section = line.split()[0]
            if section == "ENDATA":
                break
            continue
        fields = line.split()
        if section == "ROWS":
            kind, row = fields[0], fields[1]
            if kind == "N":
                objective = objective or row
                continue
            row_kind[row] = kind
            row_order.append(row)
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                in_integer = fields[2] == "'INTORG'"
                continue
            col = fields[0]
            j = col_index.setdefault(col, len(col_index))
            if in_integer:
                integer_cols.add(j)
            for row, value in zip(fields[1::2], fields[2::2]):
                coefficients[(row, j)] = float(value)
        elif section == "RHS":
            pairs = fields[1:] if len(fields) % 2 == 1 else fields
            for row, value in zip(pairs[0::2], pairs[1::2]):
                rhs[row] = float(value)
        elif section == "BOUNDS":
            code, col = fields[0], fields[2]
            j = col_index[col]
            value = float(fields[3]) if len(fields) > 3 else 0.0
            if code == "UP":
                upper[j] = value
            elif code == "LO":
                lower[j] = value
            elif code == "FX":
                lower[j] = upper[j] = value
            elif code == "FR":
                lower[j], upper[j] = -np.inf, np.inf
            elif code == "MI":
                lower[j] = -np.inf
            elif code == "BV":
                lower[j], upper[j] = 0.0, 1.0
                integer_cols.add(j)
            else:
                raise ValueError(f"unsupported bound type {code}")
        elif section in ("RANGES", "OBJSENSE"):
            raise ValueError(f"unsupported MPS section {section}")

    n = len(col_index)
    names = [""] * n
    for col, j in col_index.items():
        names[j] = col
    ub_rows = [r for r in row_order if row_kind[r] in ("L", "G")]
    eq_rows = [r for r in row_order if row_kind[r] == "E"]
    sign = {r: (-1.0 if row_kind[r] == "G" else 1.0) for r in row_order}

    c = np.zeros(n)
    ub_pos = {r: i for i, r in enumerate(ub_rows)}
    eq_pos = {r: i for i, r in enumerate(eq_rows)}
    ub_entries: tuple[list[int], list[int], list[float]] = ([], [], [])
    eq_entries: tuple[list[int], list[int], list[float]] = ([], [], [])
    for (row, j), value in coefficients.items():
        if row == objective:
            c[j] = value
        elif row in ub_pos:
            ub_entries[0].append(ub_pos[row])
            ub_entries[1].append(j)
            ub_entries[2].append(sign[row] * value)
        elif row in eq_pos:
            eq_entries[0].append(eq_pos[row])
            eq_entries[1].append(j)
            eq_entries[2].append(value)
        else:
            raise ValueError(f"column {names[j]} references unknown row {row}")

    lb = np.array([lower.get(j, 0.0) for j in range(n)], dtype=float)
    ub = np.array([upper.get(j, np.inf) for j in range(n)], dtype=float)
    for j in integer_cols:
        if lb[j] < 0.0 or ub[j] > 1.0:
            raise ValueError(f"integer column {names[j]} is not binary")

    def matrix(entries: tuple[list[int], list[int], list[float]], m: int) -> sp.csr_matrix:
        return sp.csr_matrix((entries[2], (entries[0], entries[1])), shape=(m, n))

    b_ub: NDArray[np.float64] = np.array([sign[r] * rhs.get(r, 0.0) for r in ub_rows])
    b_eq: NDArray[np.float64] = np.array([rhs.get(r, 0.0) for r in eq_rows])
    return MilpProblem(
        c=c,
        a_ub=matrix(ub_entries, len(ub_rows)),
        b_ub=b_ub,
        a_eq=matrix(eq_entries, len(eq_rows)),
        b_eq=b_eq,
        lb=lb,
        ub=ub,
        binaries=tuple(sorted(integer_cols)),
        var_names=tuple(names),
        ub_names=tuple(ub_rows),
        eq_names=tuple(eq_rows),
    )
