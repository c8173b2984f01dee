"""Satisfiable loops, file 18."""


def loop_0(x, n, s, y, z, items, queue):
    while not y and z:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while True:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while 1:
        n = n + 1
        break
    return n


# while False: (comment, not code) 18
