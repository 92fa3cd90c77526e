import math


def map_to_coordinates(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError("n must be a non-negative integer")
    z = max(int(round((6 * n) ** (1.0 / 3.0))) - 2, 0)
    while (z + 1) * (z + 2) * (z + 3) // 6 <= n:
        z += 1
    while z * (z + 1) * (z + 2) // 6 > n:
        z -= 1
    r = n - z * (z + 1) * (z + 2) // 6
    x = (math.isqrt(8 * r + 1) - 1) // 2
    y = r - x * (x + 1) // 2
    return (x, y, z)
