# pylint: disable=line-too-long, function-name-too-long
"""
CPLEX-LP text export of shallow ReLU problems for external MIP solvers.

Each ReLU term j gets a continuous ``y_j`` and a binary ``z_j`` with the big-M encoding

    y_j >= 0,  y_j >= a_j.v + b_j,  y_j <= a_j.v + b_j - L_j (1 - z_j),  y_j <= U_j z_j

where ``[L_j, U_j]`` is the interval of ``a_j.v + b_j`` over the box. Constants are carried by
a variable fixed to one, the way Pyomo's writer handles them.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..errors import BpmipError
from .shallow import ShallowReluProblem
from .simplex import Sense

ONE_VAR = "ONE_VAR_CONSTANT"


def _num(value: float) -> str:
    if value == 0:
        value = 0.0
    return format(float(value), ".17g")


def _linear(terms: Sequence[Tuple[float, str]]) -> str:
    parts = []
    for coeff, name in terms:
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        parts.append(f"{sign} {_num(abs(coeff))} {name}")
    if not parts:
        return f"0 {ONE_VAR}"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_lp_text(problem: ShallowReluProblem) -> str:
    n = problem.n_vars
    v = [f"v{i}" for i in range(n)]
    m = len(problem.relu_terms)
    intervals = problem.term_intervals()

    objective = [(float(problem.linear_coeffs[i]), v[i]) for i in range(n)]
    objective += [(term.weight, f"y{j}") for j, term in enumerate(problem.relu_terms)]
    objective.append((problem.constant, ONE_VAR))

    lines: List[str] = ["\\ shallow ReLU problem, big-M encoding",
                        "Minimize" if problem.sense == Sense.MINIMIZE else "Maximize",
                        f"obj: {_linear(objective)}",
                        "Subject To"]
    for j, term in enumerate(problem.relu_terms):
        low, high = intervals[j]
        affine = [(float(term.coeffs[i]), v[i]) for i in range(n)]
        y, z = f"y{j}", f"z{j}"
        lines.append(f"r{j}_nonneg: {_linear([(1.0, y)])} >= 0")
        # y - a.v >= b
        lines.append(f"r{j}_above: {_linear([(1.0, y)] + [(-c, name) for c, name in affine])} >= {_num(term.const)}")
        # y - a.v - L z <= b - L
        lines.append(f"r{j}_active: {_linear([(1.0, y)] + [(-c, name) for c, name in affine] + [(-low, z)])} <= {_num(term.const - low)}")
        # y - U z <= 0
        lines.append(f"r{j}_inactive: {_linear([(1.0, y), (-high, z)])} <= 0")

    lines.append("Bounds")
    for i in range(n):
        lines.append(f"{_num(problem.box_lower[i])} <= {v[i]} <= {_num(problem.box_upper[i])}")
    for j in range(m):
        lines.append(f"y{j} free")
    lines.append(f"{ONE_VAR} = 1")
    if m:
        lines.append("Binary")
        lines.extend(f"z{j}" for j in range(m))
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class LpSummary:
    sense: str
    objective_terms: int
    constraints: int
    bounds: int
    binaries: int
    variables: int


class LpFormatError(BpmipError):
    pass


_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf"
_TERM = re.compile(rf"^([-+])?\s*({_NUMBER})?\s*({_NAME})$")
_SECTIONS = ("minimize", "maximize", "subject to", "bounds", "binary", "end")


def _parse_expression(text: str) -> Dict[str, float]:
    tokens = re.findall(rf"[-+]?\s*(?:{_NUMBER})?\s*{_NAME}|[-+]?\s*(?:{_NUMBER})", text.strip())
    if "".join(t.replace(" ", "") for t in tokens) != text.replace(" ", ""):
        raise LpFormatError(f"cannot parse linear expression {text!r}")
    coeffs: Dict[str, float] = {}
    for token in tokens:
        match = _TERM.match(token.strip())
        if match is None:
            raise LpFormatError(f"bad term {token!r} in {text!r}")
        sign, number, name = match.groups()
        value = float(number) if number else 1.0
        coeffs[name] = coeffs.get(name, 0.0) + (-value if sign == "-" else value)
    return coeffs


def check_lp_text(text: str) -> LpSummary:
    """Validate the LP sections this exporter emits and count their contents."""
    section = None
    seen: List[str] = []
    sense = ""
    objective_terms = constraints = bounds = binaries = 0
    variables = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in _SECTIONS:
            if seen and _SECTIONS.index(lowered) <= _SECTIONS.index(seen[-1]):
                raise LpFormatError(f"section {line!r} out of order")
            if lowered in ("minimize", "maximize"):
                if seen:
                    raise LpFormatError("objective sense must come first")
                sense = lowered
            seen.append(lowered)
            section = lowered
            continue
        if section in ("minimize", "maximize"):
            name, _, expression = line.partition(":")
            coeffs = _parse_expression(expression if _ else name)
            objective_terms += len(coeffs)
            variables.update(coeffs)
        elif section == "subject to":
            match = re.match(rf"^({_NAME}):\s*(.+?)\s*(<=|>=|=)\s*({_NUMBER})$", line)
            if match is None:
                raise LpFormatError(f"bad constraint line {line!r}")
            variables.update(_parse_expression(match.group(2)))
            constraints += 1
        elif section == "bounds":
            free = re.match(rf"^({_NAME})\s+free$", line)
            fixed = re.match(rf"^({_NAME})\s*=\s*({_NUMBER})$", line)
            ranged = re.match(rf"^({_NUMBER})\s*<=\s*({_NAME})\s*<=\s*({_NUMBER})$", line)
            match = free or fixed or ranged
            if match is None:
                raise LpFormatError(f"bad bound line {line!r}")
            variables.add(ranged.group(2) if ranged else match.group(1))
            bounds += 1
        elif section == "binary":
            if not re.match(rf"^{_NAME}$", line):
                raise LpFormatError(f"bad binary line {line!r}")
            variables.add(line)
            binaries += 1
        elif section == "end":
            raise LpFormatError("content after End")
        else:
            raise LpFormatError(f"line outside any section: {line!r}")
    if not seen or seen[-1] != "end":
        raise LpFormatError("missing End")
    if "subject to" not in seen:
        raise LpFormatError("missing Subject To")
    return LpSummary(sense, objective_terms, constraints, bounds, binaries, len(variables))
