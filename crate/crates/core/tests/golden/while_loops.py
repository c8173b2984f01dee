while False:
    pass
while 2+2 != 4:
    x()
# while False
while x:
    if y:
        f(1)
    elif z:
        pass
for i in range(3):
    def g(a=1):
        return a
