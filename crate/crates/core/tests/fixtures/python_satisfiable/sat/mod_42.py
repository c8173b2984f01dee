"""Satisfiable loops, file 42."""


def loop_0(x, n, s, y, z, items, queue):
    while 0o17 == 15:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while 0b101 == 5:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while 1_000 == 1000:
        n = n + 1
        break
    return n


# while False: (comment, not code) 42
