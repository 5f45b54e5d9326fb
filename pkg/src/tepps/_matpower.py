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

"""Reader and printer for the DC-relevant subset of MATPOWER case files."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from tepps._exceptions import CaseParseError, CaseStructureError

if TYPE_CHECKING:
    from collections.abc import Iterator

_log = logging.getLogger("tepps")

REFERENCE_BUS_TYPE = 3
POLYNOMIAL_COST = 2
PIECEWISE_LINEAR_COST = 1

# Minimum columns read from each matrix (MATPOWER column positions).
_MIN_COLUMNS = {"bus": 3, "gen": 10, "branch": 11, "gencost": 4}
_MANDATORY = ("bus", "gen", "branch", "gencost")

_ASSIGN = re.compile(r"^\s*mpc\.(\w+)\s*=\s*(.*)$")
_TOKEN = re.compile(r"[^\s,;\[\]]+")


@dataclass(frozen=True)
class RawBus:
    id: int
    bus_type: int
    load: float

    @property
    def is_reference(self) -> bool:
        return self.bus_type == REFERENCE_BUS_TYPE


@dataclass(frozen=True)
class RawGenerator:
    """In-service generator with its MATPOWER cost model.

    ``cost`` holds the polynomial coefficients, highest order first, or the
    flattened ``(p1, f1, p2, f2, ...)`` breakpoints of a piecewise-linear model.
    """

    bus: int
    p_min: float
    p_max: float
    cost_model: int = POLYNOMIAL_COST
    cost: tuple[float, ...] = (0.0, 0.0)

    @property
    def marginal_cost(self) -> float:
        """Linear marginal cost in $/MWh.

        Polynomial models use the linear coefficient; when that coefficient is
        zero the derivative at ``p_max / 2`` is used instead. Piecewise-linear
        models use the average slope across the breakpoints.
        """
        if self.cost_model == PIECEWISE_LINEAR_COST:
            points = self.cost
            p_first, f_first = points[0], points[1]
            p_last, f_last = points[-2], points[-1]
            if p_last == p_first:
                return 0.0
            return (f_last - f_first) / (p_last - p_first)
        degree = len(self.cost) - 1
        if degree < 1:
            return 0.0
        linear = self.cost[-2]
        if linear != 0.0 or degree == 1:
            return linear
        at = self.p_max / 2.0
        return sum(
            power * coef * at ** (power - 1)
            for power, coef in zip(range(degree, 0, -1), self.cost)
        )


@dataclass(frozen=True)
class RawBranch:
    from_bus: int
    to_bus: int
    reactance: float
    rating: float


@dataclass(frozen=True)
class RawCaseFile:
    buses: tuple[RawBus, ...]
    generators: tuple[RawGenerator, ...]
    branches: tuple[RawBranch, ...]
    mva_base: float = 100.0
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.buses or not self.generators or not self.branches:
            raise CaseStructureError("case tables must be non-empty")
        if self.mva_base <= 0:
            raise CaseStructureError(f"baseMVA must be > 0, got {self.mva_base}")
        known = {bus.id for bus in self.buses}
        unknown = sorted(
            {g.bus for g in self.generators if g.bus not in known}
            | {b.from_bus for b in self.branches if b.from_bus not in known}
            | {b.to_bus for b in self.branches if b.to_bus not in known}
        )
        if unknown:
            raise CaseStructureError(f"rows reference unknown buses: {unknown}")


@dataclass
class _Row:
    line: int
    values: list[float]


def _tokens(text: str, line_no: int, offset: int) -> Iterator[tuple[float, int]]:
    for match in _TOKEN.finditer(text):
        token = match.group(0)
        column = offset + match.start() + 1
        try:
            yield float(token), column
        except ValueError:
            raise CaseParseError(f"malformed number {token!r}", line_no, column) from None


def _scan(text: str) -> tuple[dict[str, list[_Row]], dict[str, float]]:
    """Split a case into its matrix blocks and scalar assignments."""
    blocks: dict[str, list[_Row]] = {}
    scalars: dict[str, float] = {}
    current: str | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("%", 1)[0]
        offset = 0
        if current is None:
            match = _ASSIGN.match(line)
            if match is None:
                continue
            name, rest = match.group(1), match.group(2)
            offset = match.start(2)
            if not rest.lstrip().startswith("["):
                value = rest.strip().rstrip(";").strip()
                if value and not value.startswith(("'", "{")):
                    try:
                        scalars[name] = float(value)
                    except ValueError:
                        raise CaseParseError(
                            f"malformed number {value!r}", line_no, offset + 1
                        ) from None
                continue
            current = name
            blocks[current] = []
            bracket = rest.index("[")
            offset += bracket + 1
            line = rest[bracket + 1 :]
        closed = "]" in line
        body = line.split("]", 1)[0]
        segment_offset = offset
        for segment in body.split(";"):
            values = [value for value, _ in _tokens(segment, line_no, segment_offset)]
            if values:
                blocks[current].append(_Row(line_no, values))
            segment_offset += len(segment) + 1
        if closed:
            current = None
    if current is not None:
        raise CaseStructureError(f"matrix mpc.{current} is not closed with ']'")
    return blocks, scalars


def _check_width(section: str, index: int, row: _Row) -> None:
    need = _MIN_COLUMNS[section]
    if len(row.values) < need:
        raise CaseStructureError(
            f"{section} row {index + 1} (line {row.line}) has {len(row.values)} columns, "
            f"needs at least {need}"
        )


def _parse_cost(index: int, row: _Row) -> tuple[int, tuple[float, ...]]:
    _check_width("gencost", index, row)
    model = int(row.values[0])
    count = int(row.values[3])
    width = 2 * count if model == PIECEWISE_LINEAR_COST else count
    if model not in (PIECEWISE_LINEAR_COST, POLYNOMIAL_COST) or count < 1:
        raise CaseStructureError(
            f"gencost row {index + 1} (line {row.line}) has unsupported model {model}"
        )
    coefficients = row.values[4 : 4 + width]
    if len(coefficients) < width:
        raise CaseStructureError(
            f"gencost row {index + 1} (line {row.line}) has {len(coefficients)} cost "
            f"values, needs {width}"
        )
    return model, tuple(coefficients)


def parse_matpower(text: str) -> RawCaseFile:
    """Parse MATPOWER case text.

    Out-of-service branches and generators, and generators with zero
    capacity, are dropped; unsupported sections are ignored. Both are reported
    in ``RawCaseFile.warnings``.

    Raises:
        CaseParseError: a numeric token is malformed.
        CaseStructureError: a mandatory section is missing or a row is too short.
    """
    blocks, scalars = _scan(text)
    missing = [name for name in _MANDATORY if name not in blocks]
    if missing:
        raise CaseStructureError(f"missing mandatory section(s): {', '.join(missing)}")
    warnings = [f"ignored section mpc.{name}" for name in blocks if name not in _MANDATORY]

    buses = []
    for i, row in enumerate(blocks["bus"]):
        _check_width("bus", i, row)
        values = row.values
        buses.append(RawBus(id=int(values[0]), bus_type=int(values[1]), load=values[2]))

    gen_rows = blocks["gen"]
    cost_rows = blocks["gencost"]
    if len(cost_rows) < len(gen_rows):
        raise CaseStructureError(
            f"gencost has {len(cost_rows)} rows for {len(gen_rows)} generators"
        )
    generators = []
    for i, row in enumerate(gen_rows):
        _check_width("gen", i, row)
        model, cost = _parse_cost(i, cost_rows[i])
        bus, status, p_max, p_min = int(row.values[0]), row.values[7], row.values[8], row.values[9]
        if status <= 0:
            warnings.append(f"generator row {i + 1} at bus {bus} out of service, dropped")
            continue
        if p_max <= 0:
            warnings.append(f"generator row {i + 1} at bus {bus} has no active capacity, dropped")
            continue
        generators.append(
            RawGenerator(bus=bus, p_min=max(0.0, p_min), p_max=p_max, cost_model=model, cost=cost)
        )

    branches = []
    for i, row in enumerate(blocks["branch"]):
        _check_width("branch", i, row)
        f_bus, t_bus = int(row.values[0]), int(row.values[1])
        if row.values[10] <= 0:
            warnings.append(f"branch row {i + 1} ({f_bus}-{t_bus}) out of service, dropped")
            continue
        branches.append(
            RawBranch(from_bus=f_bus, to_bus=t_bus, reactance=row.values[3], rating=row.values[5])
        )

    for message in warnings:
        _log.warning("MATPOWER: %s", message)
    return RawCaseFile(
        buses=tuple(buses),
        generators=tuple(generators),
        branches=tuple(branches),
        mva_base=scalars.get("baseMVA", 100.0),
        warnings=tuple(warnings),
    )


def _num(value: float) -> str:
    return repr(float(value))


def format_matpower(case: RawCaseFile, name: str = "case") -> str:
    """Print ``case`` as MATPOWER text that :func:`parse_matpower` reads back unchanged."""
    lines = [
        f"function mpc = {name}",
        "mpc.version = '2';",
        f"mpc.baseMVA = {_num(case.mva_base)};",
        "",
        "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin",
        "mpc.bus = [",
    ]
    for bus in case.buses:
        lines.append(
            f"\t{bus.id}\t{bus.bus_type}\t{_num(bus.load)}\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;"
        )
    lines += [
        "];",
        "",
        "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin",
        "mpc.gen = [",
    ]
    for gen in case.generators:
        lines.append(
            f"\t{gen.bus}\t0\t0\t0\t0\t1\t{_num(case.mva_base)}\t1"
            f"\t{_num(gen.p_max)}\t{_num(gen.p_min)};"
        )
    lines += [
        "];",
        "",
        "%% fbus tbus r x b rateA rateB rateC ratio angle status",
        "mpc.branch = [",
    ]
    for branch in case.branches:
        lines.append(
            f"\t{branch.from_bus}\t{branch.to_bus}\t0\t{_num(branch.reactance)}\t0"
            f"\t{_num(branch.rating)}\t0\t0\t0\t0\t1;"
        )
    lines += [
        "];",
        "",
        "%% model startup shutdown n cost",
        "mpc.gencost = [",
    ]
    for gen in case.generators:
        count = len(gen.cost) // 2 if gen.cost_model == PIECEWISE_LINEAR_COST else len(gen.cost)
        cost = "\t".join(_num(c) for c in gen.cost)
        lines.append(f"\t{gen.cost_model}\t0\t0\t{count}\t{cost};")
    lines += ["];", ""]
    return "\n".join(lines)


def apply_modifiers(
    case: RawCaseFile,
    load_scale: float = 1.0,
    gen_scale: float = 1.0,
    thermal_derate: float = 1.0,
) -> RawCaseFile:
    """Scale bus loads, generator limits and branch ratings; nothing else changes."""
    for label, factor in (
        ("load_scale", load_scale),
        ("gen_scale", gen_scale),
        ("thermal_derate", thermal_derate),
    ):
        if factor <= 0:
            raise ValueError(f"{label} must be > 0, got {factor}")
    return replace(
        case,
        buses=tuple(replace(bus, load=bus.load * load_scale) for bus in case.buses),
        generators=tuple(
            replace(gen, p_min=gen.p_min * gen_scale, p_max=gen.p_max * gen_scale)
            for gen in case.generators
        ),
        branches=tuple(
            replace(branch, rating=branch.rating * thermal_derate) for branch in case.branches
        ),
    )
