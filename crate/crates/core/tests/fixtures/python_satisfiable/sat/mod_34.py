"""Satisfiable loops, file 34."""


def loop_0(x, n, s, y, z, items, queue):
    while "a" in s:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while x is not None:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while items[0]:
        n = n + 1
        break
    return n


# while False: (comment, not code) 34
