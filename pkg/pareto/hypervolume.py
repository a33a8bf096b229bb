from typing import Tuple

import numpy as np

REFERENCE_POINT: Tuple[float, float] = (1.0, 1.0)


def hypervolume_2d(points, ref: Tuple[float, float] = REFERENCE_POINT) -> float:
    """
    Exact area dominated by points (minimization) and bounded by ref, by sweeping
    the points in ascending order of the first objective.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ref_x, ref_y = float(ref[0]), float(ref[1])
    if points.shape[0] == 0:
        return 0.0
    if np.any(points[:, 0] > ref_x) or np.any(points[:, 1] > ref_y):
        raise ValueError(f"every point must be dominated by the reference point {ref}")

    order = np.lexsort((points[:, 1], points[:, 0]))
    area = 0.0
    best_y = ref_y
    staircase = []
    for x, y in points[order]:
        if y < best_y:
            staircase.append((x, y))
            best_y = y
    for (x, y), (next_x, _) in zip(staircase, staircase[1:] + [(ref_x, None)]):
        area += (next_x - x) * (ref_y - y)
    return float(area)


def hv_monte_carlo(points, ref: Tuple[float, float], samples: int, seed: int) -> float:
    """Hypervolume estimate from uniform samples in [0, ref_x] x [0, ref_y]."""
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if points.shape[0] == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    draws = rng.random((samples, 2)) * np.asarray(ref, dtype=np.float64)
    dominated = np.zeros(samples, dtype=bool)
    for x, y in points:
        dominated |= (draws[:, 0] >= x) & (draws[:, 1] >= y)
    return float(dominated.mean() * ref[0] * ref[1])
