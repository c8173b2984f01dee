"""Satisfiable loops, file 20."""


def loop_0(x, n, s, y, z, items, queue):
    while not 0:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while not not 3:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while -7 // 2 == -4:
        n = n + 1
        break
    return n


# while False: (comment, not code) 20
