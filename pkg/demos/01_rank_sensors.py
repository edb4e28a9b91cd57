"""Rank a handful of candidate sensors on their context properties.

Walks the ranking pipeline a step at a time — normalization, ideal points,
distances, closeness — so you can see why the winner wins.
"""

import numpy as np

from sensedeploy.selector import (
    DEFAULT_CRITERIA,
    DecisionMatrix,
    ideal_points,
    normalize,
    rank,
)

# Five candidate sensors scored on the six context properties
# (battery %, price, drift, frequency Hz, energy mW, response ms).
options = ["alpha", "bravo", "charlie", "delta", "echo"]
values = np.array(
    [
        [88.0, 12.0, 0.02, 5.0, 120.0, 180.0],   # strong all-rounder
        [97.0, 55.0, 0.10, 2.0, 400.0, 420.0],   # great battery, pricey
        [35.0, 4.0, 0.01, 1.0, 90.0, 600.0],     # cheap but weak battery
        [60.0, 20.0, 0.50, 8.0, 700.0, 90.0],    # fast but drifty and hungry
        [88.0, 12.0, 0.02, 5.0, 121.0, 181.0],   # alpha's slightly worse twin
    ]
)
matrix = DecisionMatrix(tuple(options), DEFAULT_CRITERIA, values)

print("criteria:", ", ".join(f"{c.name}({c.direction})" for c in matrix.criteria))

normalized = normalize(matrix)
print("\ncolumn norms after normalization (should all be 1):")
print(" ", np.linalg.norm(normalized.values, axis=0).round(6))

p_plus, p_minus = ideal_points(normalized)
print("\npositive ideal per criterion:", p_plus.round(4))
print("negative ideal per criterion:", p_minus.round(4))

result = rank(matrix)
print("\nranking (best first):")
for position, index in enumerate(result.order, start=1):
    s_plus, s_minus = result.distances[0][index], result.distances[1][index]
    print(
        f"  {position}. {options[index]:8s} closeness={result.closeness[index]:.4f} "
        f"(d+={s_plus:.4f}, d-={s_minus:.4f})"
    )

print(
    "\nnote: alpha dominates echo on every criterion, so alpha must rank "
    "above it — and does."
)
