"""Satisfiable loops, file 14."""


def loop_0(x, n, s, y, z, items, queue):
    while 0 or x:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while 1 and x:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while queue:
        n = n + 1
        break
    return n


# while False: (comment, not code) 14
