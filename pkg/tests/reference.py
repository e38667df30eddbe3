"""Reference matrices, face weights and paths, used as independent oracles."""

from __future__ import annotations

from pathlib import Path

from perfnet.exprcore import parse_expr

GOLDEN = Path(__file__).parent / "golden"

# boundary measurement matrix of the fig1 network in symbolic edge weights (entry (1,2) without w10)
_DEN = "(1 + w3*w7*w10*w11)"
FIG1_MATRIX = [
    [f"w3*w4*w5*w6*w10/{_DEN}", f"w3*w5*w6*w8*w11/{_DEN}"],
    [f"w1*w3*w4*(w2 + w6*w9*w10)/{_DEN}", f"w1*w3*w8*w11*(w2 + w6*w9*w10)/{_DEN}"],
]

# edge weights of the fig1 network in the x coordinates
FIG1_X = {
    "w1": "x1^2/(x2 + 1)",
    "w2": "x2",
    "w3": "x2 + 1",
    "w4": "x1 + x3",
    "w5": "x3",
    "w6": "x3",
    "w7": "x3",
    "w8": "x4",
    "w9": "1",
    "w10": "1",
    "w11": "1",
}

_D24 = "(1 + w2*w4*w5*w7)"
G24_MATRIX = [
    ["1", f"w1*w4*w6/{_D24}", "0", f"-w1*w3*w4*w5*w7/{_D24}"],
    ["0", f"w2*w4*w5*w6*w8/{_D24}", "1", f"w3*w5*w8/{_D24}"],
]

G24_FACE_WEIGHTS = [
    "w1*w3/w2",
    "1/(w3*w5*w8)",
    "w6*w8/w7",
    "1/(w1*w4*w6)",
    "w2*w4*w5*w7",
]

EXAMPLE_PATH = ["e1", "e2", "e3", "e11", "e7", "e10", "e3", "e11", "e8"]
EXAMPLE_PATH_WEIGHT = "-w1*w2*w3^2*w7*w8*w10*w11^2"


def fig1_x_matrix():
    """The reference fig1 matrix after the substitution to x coordinates."""
    m = [[parse_expr(e) for e in row] for row in FIG1_MATRIX]
    sub = {k: parse_expr(v) for k, v in FIG1_X.items()}
    return [[e.subst(sub) for e in row] for row in m]


def render(rows) -> str:
    return "".join("\t".join(str(x) for x in row) + "\n" for row in rows)
