"""
Seifert matrices and PD codes shared by the engine tests.

The 4x4 matrices are the family [[0, B], [C, D]] with B - C^T = I. Every
member has Alexander polynomial (t^2 - t + 1)^2 and determinant 9; the
middle block D decides the double cover homology and the signature data.
"""
from core.seifert import block_sum, concordance_inverse, connected_sum

TREFOIL = [[-1, 1], [0, -1]]
FIGURE_EIGHT = [[1, 1], [0, -1]]
STEVEDORE = [[-1, 1], [0, 2]]


def metabolic_family(d):
    (a, b), (c, e) = d
    return [
        [0, 0, 1, -1],
        [0, 0, 1, 0],
        [0, 1, a, b],
        [-1, -1, c, e],
    ]


KNOT_8_20 = metabolic_family([[1, 0], [0, 0]])
KNOT_12N_582 = metabolic_family([[1, 1], [1, 1]])
KNOT_8_18 = block_sum(metabolic_family([[3, 0], [0, 0]]), FIGURE_EIGHT).as_lists()

KNOT_8_18_DOUBLE = connected_sum(KNOT_8_18, concordance_inverse(KNOT_8_18)).as_lists()
KNOT_8_20_DOUBLE = connected_sum(KNOT_8_20, concordance_inverse(KNOT_8_20)).as_lists()

PD_TREFOIL = [(1, 4, 2, 5), (3, 6, 4, 1), (5, 2, 6, 3)]
PD_FIGURE_EIGHT = [(4, 2, 5, 1), (8, 6, 1, 5), (6, 3, 7, 4), (2, 7, 3, 8)]
PD_STEVEDORE = [(1, 4, 2, 5), (7, 10, 8, 11), (3, 9, 4, 8), (9, 3, 10, 2),
                (5, 12, 6, 1), (11, 6, 12, 7)]
