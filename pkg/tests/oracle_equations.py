"""Independent oracle for the scaling/scoring equations.

Evaluates each formula with exact rational arithmetic (fractions.Fraction),
taking the square root as the single floating step for distances. Running
this module prints the frozen case tables pasted into test_acceptance.py.

Kept deliberately separate from the package: no attacksim imports.
"""

from fractions import Fraction
from math import sqrt


def oracle_scale_bounded(eps, lo, hi) -> float:
    return float((Fraction(str(eps)) - Fraction(str(lo)))
                 / (Fraction(str(hi)) - Fraction(str(lo))))


def oracle_scale_ordered(index: int, k: int) -> float:
    if k == 1:
        return 0.5
    return float(Fraction(index, k - 1))


def oracle_distance(theta, gamma, beta) -> float:
    # slots are numbers, or ("label", "label") pairs contributing 0/1
    radicand = Fraction(0)
    for t, g, b in zip(theta, gamma, beta):
        if isinstance(t, str):
            diff = Fraction(0) if t == g else Fraction(1)
        else:
            diff = Fraction(str(t)) - Fraction(str(g))
        radicand += diff * diff / (Fraction(str(b)) ** 2)
    return sqrt(float(radicand))


def oracle_scores(distances) -> list[float]:
    m = len(distances)
    if m == 1:
        return [1.0]
    total = sum(Fraction(d) for d in distances)
    if total == 0:
        return [1.0] * m
    return [float(1 - Fraction(d) / total) for d in distances]


def oracle_probabilities(scores) -> list[float]:
    total = sum(Fraction(s) for s in scores)
    return [float(Fraction(s) / total) for s in scores]


SCALE_BOUNDED_CASES = [
    (5, 0, 10), (0, 0, 10), (10, 0, 10), (7, 2, 12), (2.5, 0, 10),
    (-5, -10, 0), (1, 0, 8), (3.25, 3, 4), (0.1, 0, 0.4), (-2, -4, 4),
    (9.9, 0, 10), (0.001, 0, 0.1),
]

SCALE_ORDERED_CASES = [
    (0, 3), (1, 3), (2, 3), (0, 1), (0, 2), (1, 2),
    (0, 5), (1, 5), (2, 5), (3, 5), (4, 5), (1, 4),
]

DISTANCE_CASES = [
    # (theta, gamma, beta)
    ((0.0, 0.0), (0.6, 0.8), (1.0, 1.0)),
    ((0.5, 0.5), (0.5, 0.5), (1.0, 0.25)),
    ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)),
    ((0.25,), (0.75,), (0.5,)),
    ((0.3, 0.7, 0.1), (0.9, 0.2, 0.4), (1.0, 1.0, 1.0)),
    ((0.3, 0.7, 0.1), (0.9, 0.2, 0.4), (0.5, 1.0, 0.25)),
    (("Direct", 0.5), ("Direct", 0.5), (1.0, 1.0)),
    (("Direct", 0.5), ("Offsite", 0.5), (1.0, 1.0)),
    (("Direct", 0.25), ("Offsite", 1.0), (0.5, 1.0)),
    ((0.125, 0.875, "A", 0.5), (0.625, 0.375, "B", 0.0), (1.0, 0.5, 0.25, 1.0)),
    ((0.9, "x"), (0.9, "x"), (0.1, 0.1)),
    ((0.0, 1.0, 0.5), (1.0, 0.0, 0.5), (0.2, 0.4, 0.6)),
]

SCORES_CASES = [
    (0.2, 0.3, 0.5),
    (1.0, 1.0),
    (0.0, 0.0),
    (1.5,),
    (0.0, 1.0),
    (0.1, 0.2, 0.3, 0.4),
    (2.0, 2.0, 2.0, 2.0),
    (0.25, 0.75),
    (5.0, 3.0, 2.0),
    (0.0, 0.0, 0.0),
    (1e-06, 2e-06),
    (0.125, 0.25, 0.5, 0.125),
]

PROBABILITIES_CASES = [
    (0.8, 0.7, 0.5),
    (1.0,),
    (0.5, 0.5),
    (0.25, 0.25, 0.25, 0.25),
    (1.0, 1.0, 1.0),
    (0.9, 0.1),
    (0.6, 0.3, 0.1),
    (1.0, 0.0),
    (0.2, 0.4, 0.6, 0.8),
    (0.75, 0.5, 0.25, 0.5),
    (1e-09, 3e-09),
    (0.35, 0.65),
]


def main():
    print("SCALE_BOUNDED_TABLE = [")
    for eps, lo, hi in SCALE_BOUNDED_CASES:
        print(f"    ({eps!r}, {lo!r}, {hi!r}, {oracle_scale_bounded(eps, lo, hi)!r}),")
    print("]")
    print("SCALE_ORDERED_TABLE = [")
    for idx, k in SCALE_ORDERED_CASES:
        print(f"    ({idx!r}, {k!r}, {oracle_scale_ordered(idx, k)!r}),")
    print("]")
    print("DISTANCE_TABLE = [")
    for theta, gamma, beta in DISTANCE_CASES:
        print(f"    ({theta!r}, {gamma!r}, {beta!r}, "
              f"{oracle_distance(theta, gamma, beta)!r}),")
    print("]")
    print("SCORES_TABLE = [")
    for d in SCORES_CASES:
        print(f"    ({d!r}, {oracle_scores(d)!r}),")
    print("]")
    print("PROBABILITIES_TABLE = [")
    for s in PROBABILITIES_CASES:
        print(f"    ({s!r}, {oracle_probabilities(s)!r}),")
    print("]")


if __name__ == "__main__":
    main()
