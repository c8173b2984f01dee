"""Satisfiable loops, file 38."""


def loop_0(x, n, s, y, z, items, queue):
    while 0 or 5:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while not 0:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while not not 3:
        n = n + 1
        break
    return n


# while False: (comment, not code) 38
