import math


def map_to_coordinates(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError("n must be a non-negative integer")
    x = (math.isqrt(8 * n + 1) - 1) // 2
    y = n - x * (x + 1) // 2
    return (x, y)
