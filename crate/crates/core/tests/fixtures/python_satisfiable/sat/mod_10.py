"""Satisfiable loops, file 10."""


def loop_0(x, n, s, y, z, items, queue):
    while (1 and 0) or 2:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while -(-3) == 3:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while +4 == 4:
        n = n + 1
        break
    return n


# while False: (comment, not code) 10
