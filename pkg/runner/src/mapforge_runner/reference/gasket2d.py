def map_to_coordinates(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError("n must be a non-negative integer")
    x = y = 0
    unit = 1
    while n:
        n, d = divmod(n, 3)
        if d == 1:
            x += unit
        elif d == 2:
            y += unit
        unit *= 2
    return (x, y)
