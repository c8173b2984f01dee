"""Satisfiable loops, file 29."""


def loop_0(x, n, s, y, z, items, queue):
    while +4 == 4:
        n = n + 1
        break
    return n


def loop_1(x, n, s, y, z, items, queue):
    while 100 // 7 == 14:
        n = n + 1
        break
    return n


def loop_2(x, n, s, y, z, items, queue):
    while 2 ** 3 ** 2 == 512:
        n = n + 1
        break
    return n


# while False: (comment, not code) 29
