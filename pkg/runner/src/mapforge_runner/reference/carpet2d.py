VECTORS = ((0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2))


def map_to_coordinates(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError("n must be a non-negative integer")
    x = y = 0
    unit = 1
    while n:
        n, d = divmod(n, 8)
        vx, vy = VECTORS[d]
        x += vx * unit
        y += vy * unit
        unit *= 3
    return (x, y)
