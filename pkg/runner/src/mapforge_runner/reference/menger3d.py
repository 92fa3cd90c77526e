VECTORS = (
    (0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 0), (0, 1, 2),
    (0, 2, 0), (0, 2, 1), (0, 2, 2), (1, 0, 0), (1, 0, 2),
    (1, 2, 0), (1, 2, 2), (2, 0, 0), (2, 0, 1), (2, 0, 2),
    (2, 1, 0), (2, 1, 2), (2, 2, 0), (2, 2, 1), (2, 2, 2),
)


def map_to_coordinates(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError("n must be a non-negative integer")
    x = y = z = 0
    unit = 1
    while n:
        n, d = divmod(n, 20)
        vx, vy, vz = VECTORS[d]
        x += vx * unit
        y += vy * unit
        z += vz * unit
        unit *= 3
    return (x, y, z)
