"""Independent pure-Python reference computations for the tests.

Nothing here imports the package's numerics: distances come from ``math``
and every sup/inf is an explicit loop over tuples.
"""

import math


def dist(x, y, p=1.0):
    """Euclidean distance between coordinate tuples, raised to ``p``."""
    return math.dist(x, y) ** p


def point_to_set(x, B, p=1.0):
    return min(dist(x, y, p) for y in B)


def directed(A, B, p=1.0):
    return max(point_to_set(a, B, p) for a in A)


def hausdorff(A, B, p=1.0):
    return max(directed(A, B, p), directed(B, A, p))


def image(maps, A):
    """Apply affine maps given as (matrix rows, translation) to tuples."""
    out = set()
    for lin, tr in maps:
        for x in A:
            out.add(tuple(sum(r * c for r, c in zip(row, x)) + t for row, t in zip(lin, tr)))
    return out


def ciric_terms(maps, A, B, b=1.0, p=1.0):
    TA, TB = image(maps, A), image(maps, B)
    T2A = image(maps, TA)
    H = lambda X, Y: hausdorff(X, Y, p)  # noqa: E731
    return [
        H(A, B),
        H(A, TA),
        H(B, TB),
        (H(A, TB) + H(B, TA)) / (2 * b),
        H(T2A, TA),
        H(T2A, B),
        H(T2A, TB),
    ]


def box_count(points, s):
    return len({tuple(math.floor(c / s) for c in x) for x in points})
