"""Satisfiable loops, file 40."""


def loop_0(x, n, s, y, z, items, queue):
    while 2 ** 10 == 1024:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while True + True == 2:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while 1 < 2 < 3:
        n = n + 1
        break
    return n


# while False: (comment, not code) 40
